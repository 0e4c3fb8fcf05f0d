"""Tiny dependency-free SVG line plots (axes, ticks, polylines, legend)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    markers: bool = False


def _nice_ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = np.arange(start, hi + 0.5 * step, step)
    return ticks[(ticks >= lo - 1e-12 * step) & (ticks <= hi + 1e-12 * step)]


def _log_ticks(lo, hi):
    a, b = math.floor(lo), math.ceil(hi)
    step = max(1, (b - a) // 6)
    return np.arange(a, b + 1, step, dtype=float)


def _fmt(v, log):
    if log:
        return f"1e{int(round(v))}"
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.3g}"
    return f"{v:.6g}"


def line_plot(path, series, xlabel="", ylabel="", title="", logx=False, logy=False,
              width=640, height=420):
    """Write an SVG file with one polyline per series.

    Non-finite points (and non-positive ones on log axes) are dropped.
    """
    margin_l, margin_r, margin_t, margin_b = 80, 20, 36, 56
    pw, ph = width - margin_l - margin_r, height - margin_t - margin_b
    clean = []
    for s in series:
        x = np.asarray(s.x, float)
        y = np.asarray(s.y, float)
        ok = np.isfinite(x) & np.isfinite(y)
        if logx:
            ok &= x > 0
        if logy:
            ok &= y > 0
        x, y = x[ok], y[ok]
        if logx:
            x = np.log10(x)
        if logy:
            y = np.log10(y)
        clean.append((x, y, s))
    allx = np.concatenate([c[0] for c in clean]) if clean else np.zeros(0)
    ally = np.concatenate([c[1] for c in clean]) if clean else np.zeros(0)
    if allx.size == 0:
        allx, ally = np.array([0.0, 1.0]), np.array([0.0, 1.0])
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.04 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def X(v):
        return margin_l + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return margin_t + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{margin_l}" y="{margin_t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    xt = _log_ticks(x0, x1) if logx else _nice_ticks(x0, x1)
    yt = _log_ticks(y0, y1) if logy else _nice_ticks(y0, y1)
    for t in xt:
        if x0 <= t <= x1:
            px = X(t)
            out.append(f'<line x1="{px:.2f}" y1="{margin_t + ph}" x2="{px:.2f}" y2="{margin_t + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{px:.2f}" y="{margin_t + ph + 18}" text-anchor="middle">{_fmt(t, logx)}</text>')
    for t in yt:
        if y0 <= t <= y1:
            py = Y(t)
            out.append(f'<line x1="{margin_l - 5}" y1="{py:.2f}" x2="{margin_l}" y2="{py:.2f}" stroke="black"/>')
            out.append(f'<text x="{margin_l - 8}" y="{py + 4:.2f}" text-anchor="end">{_fmt(t, logy)}</text>')
    if title:
        out.append(f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{margin_l + pw / 2}" y="{height - 14}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{margin_t + ph / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {margin_t + ph / 2})">{escape(ylabel)}</text>')
    for k, (x, y, s) in enumerate(clean):
        col = COLORS[k % len(COLORS)]
        if x.size > 1:
            pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(x, y))
            out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{pts}"/>')
        if s.markers or x.size == 1:
            for a, b in zip(x, y):
                out.append(f'<circle cx="{X(a):.2f}" cy="{Y(b):.2f}" r="3" fill="{col}"/>')
        if s.label:
            ly = margin_t + 16 + 16 * k
            out.append(f'<line x1="{margin_l + pw - 150}" y1="{ly - 4}" x2="{margin_l + pw - 130}" '
                       f'y2="{ly - 4}" stroke="{col}" stroke-width="2"/>')
            out.append(f'<text x="{margin_l + pw - 125}" y="{ly}">{escape(s.label)}</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
