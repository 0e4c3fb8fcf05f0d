"""Command-line front end: single solves, cross-solver comparison, sweeps and xi scans.

Configuration is one JSON document::

    {
      "params": {"T_a": 7216.0},            # or "params": "path/to/params.json"
      "solver": "shoot",                     # "shoot" | "fv"
      "init": "shooter",                     # "none" | "shooter" (fv only)
      "shoot_options": {"dtheta_offset": 1e-6},
      "fv_options": {"refine_dT": 1.0},
      "sweep": {"parameter": "T_a", "values": [0, 7216, 15000],
                "overrides": {"15000": {"A_reac": 200.0}}, "xi_points": 40},
      "xi_scan": {"n": 200, "sets": [{"c_p": 600.0}, {"c_p": 3600.0}]},
      "output": "runs/reference"
    }

Every key is optional; unknown keys anywhere are rejected.  A sweep may give
``"range": {"start": a, "stop": b, "num": n, "scale": "linear" | "log"}``
instead of ``values``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import __version__
from .errors import ConfigurationError, PropwaveError
from .fv import FvOptions, pressure_drop_diagnostic, solve_fv
from .model import (PhysicalParams, derive, nondimensionalize, params_from_dict, params_to_dict)
from .shooting import (ShootOptions, pressure_drop, solve_constant_ts, solve_wave, xi_scan)
from .svgplot import Series, line_plot

log = logging.getLogger("propwave")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_PARTIAL = 0, 1, 2, 3

SWEEP_PARAMETERS = ("T_a", "cp_over_cs", "Le", "P", "Ts_fixed", "Q_g", "Q_p_std", "T0")
SOLVERS = ("shoot", "fv")
INITS = ("none", "shooter")
_TOP_KEYS = {"params", "solver", "init", "shoot_options", "fv_options", "sweep", "xi_scan", "output"}
_SWEEP_KEYS = {"parameter", "values", "range", "overrides", "xi_points"}
_RANGE_KEYS = {"start", "stop", "num", "scale"}
_SCAN_KEYS = {"n", "sets"}

RECORD_FIELDS = ("parameter", "value", "status", "solver", "c", "T_s", "mass_flux", "xi_residual",
                 "iterations", "n_cells", "c_max", "c_min", "c_shoot", "T_s_shoot", "err_c",
                 "err_T_s", "message", "config_hash")


# -- configuration ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    overrides: Mapping[float, Mapping[str, Any]] = field(default_factory=dict)
    xi_points: int = 40


@dataclass(frozen=True)
class XiScanSpec:
    n: int = 200
    sets: tuple = ({},)


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams
    solver: str = "shoot"
    init: str = "shooter"
    shoot: ShootOptions = ShootOptions()
    fv: FvOptions = FvOptions()
    sweep: SweepSpec | None = None
    xi_scan: XiScanSpec | None = None
    output: str | None = None
    hash: str = ""

    def canonical(self) -> dict:
        """Resolved settings that determine the numbers (output location excluded)."""
        doc = {
            "params": params_to_dict(self.params),
            "solver": self.solver,
            "init": self.init,
            "shoot_options": dataclasses.asdict(self.shoot),
            "fv_options": dataclasses.asdict(self.fv),
        }
        if self.sweep is not None:
            doc["sweep"] = {"parameter": self.sweep.parameter, "values": list(self.sweep.values),
                            "overrides": {repr(k): dict(v) for k, v in sorted(self.sweep.overrides.items())},
                            "xi_points": self.sweep.xi_points}
        if self.xi_scan is not None:
            doc["xi_scan"] = {"n": self.xi_scan.n, "sets": [dict(s) for s in self.xi_scan.sets]}
        return doc


def config_hash(doc: Mapping) -> str:
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"), default=repr)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _reject_unknown(doc, allowed, where):
    if not isinstance(doc, Mapping):
        raise ConfigurationError(f"{where} must be a JSON object", where)
    bad = sorted(set(doc) - set(allowed))
    if bad:
        raise ConfigurationError(f"unknown key(s) in {where}: {', '.join(bad)}", f"{where}.{bad[0]}")


def _options(cls, doc, where):
    doc = doc or {}
    names = {f.name for f in dataclasses.fields(cls)}
    _reject_unknown(doc, names, where)
    try:
        return cls(**doc)
    except ConfigurationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{where}: {exc}", where) from exc


def _sweep_values(doc):
    if ("values" in doc) == ("range" in doc):
        raise ConfigurationError("sweep needs exactly one of 'values' or 'range'", "sweep.values")
    if "values" in doc:
        vals = doc["values"]
        if not isinstance(vals, list) or not vals:
            raise ConfigurationError("sweep.values must be a non-empty list", "sweep.values")
        out = []
        for v in vals:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigurationError(f"sweep value {v!r} is not a finite number", "sweep.values")
            out.append(float(v))
        return tuple(out)
    r = doc["range"]
    _reject_unknown(r, _RANGE_KEYS, "sweep.range")
    try:
        start, stop, num = float(r["start"]), float(r["stop"]), int(r["num"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"sweep.range needs start, stop and num ({exc})", "sweep.range") from exc
    if num < 1:
        raise ConfigurationError("sweep.range.num must be >= 1", "sweep.range.num")
    scale = r.get("scale", "linear")
    if scale == "linear":
        return tuple(float(v) for v in np.linspace(start, stop, num))
    if scale == "log":
        if start <= 0 or stop <= 0:
            raise ConfigurationError("log range needs positive bounds", "sweep.range")
        return tuple(float(v) for v in np.geomspace(start, stop, num))
    raise ConfigurationError("sweep.range.scale must be 'linear' or 'log'", "sweep.range.scale")


def _parse_sweep(doc) -> SweepSpec:
    _reject_unknown(doc, _SWEEP_KEYS, "sweep")
    name = doc.get("parameter")
    if name not in SWEEP_PARAMETERS:
        raise ConfigurationError(f"sweep.parameter must be one of {', '.join(SWEEP_PARAMETERS)}",
                                 "sweep.parameter")
    values = _sweep_values(doc)
    overrides = {}
    for key, ov in (doc.get("overrides") or {}).items():
        try:
            v = float(key)
        except ValueError as exc:
            raise ConfigurationError(f"override key {key!r} is not a number", "sweep.overrides") from exc
        if v not in values:
            raise ConfigurationError(f"override for {key} matches no sweep value", "sweep.overrides")
        _reject_unknown(ov, {f.name for f in dataclasses.fields(PhysicalParams)}, f"sweep.overrides.{key}")
        overrides[v] = dict(ov)
    xi_points = doc.get("xi_points", 40)
    if not isinstance(xi_points, int) or xi_points < 3:
        raise ConfigurationError("sweep.xi_points must be an integer >= 3", "sweep.xi_points")
    return SweepSpec(name, values, overrides, xi_points)


def _parse_scan(doc) -> XiScanSpec:
    _reject_unknown(doc, _SCAN_KEYS, "xi_scan")
    n = doc.get("n", 200)
    if not isinstance(n, int) or n < 3:
        raise ConfigurationError("xi_scan.n must be an integer >= 3", "xi_scan.n")
    sets = doc.get("sets", [{}])
    if not isinstance(sets, list) or not sets:
        raise ConfigurationError("xi_scan.sets must be a non-empty list", "xi_scan.sets")
    for k, s in enumerate(sets):
        _reject_unknown(s, {f.name for f in dataclasses.fields(PhysicalParams)}, f"xi_scan.sets[{k}]")
    return XiScanSpec(n, tuple(dict(s) for s in sets))


def parse_config(doc: Mapping, base_dir: Path | None = None, solver=None, init=None,
                 output=None) -> RunConfig:
    """Validate a configuration document; command-line choices override the document."""
    _reject_unknown(doc, _TOP_KEYS, "config")
    pdoc = doc.get("params", {})
    if isinstance(pdoc, str):
        path = Path(pdoc)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        try:
            pdoc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read parameter file {path}: {exc}", "params") from exc
    params = params_from_dict(pdoc)
    solver = solver or doc.get("solver", "shoot")
    init = init or doc.get("init", "shooter")
    if solver not in SOLVERS:
        raise ConfigurationError(f"solver must be one of {SOLVERS}", "solver")
    if init not in INITS:
        raise ConfigurationError(f"init must be one of {INITS}", "init")
    shoot = _options(ShootOptions, doc.get("shoot_options"), "shoot_options")
    fv = _options(FvOptions, doc.get("fv_options"), "fv_options")
    sweep = _parse_sweep(doc["sweep"]) if "sweep" in doc else None
    scan = _parse_scan(doc["xi_scan"]) if "xi_scan" in doc else None
    out = output or doc.get("output")
    cfg = RunConfig(params, solver, init, shoot, fv, sweep, scan, out)
    return dataclasses.replace(cfg, hash=config_hash(cfg.canonical()))


def load_config(path, **kw) -> RunConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}", "config") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})", "config") from exc
    return parse_config(doc, base_dir=path.parent, **kw)


# -- output helpers -------------------------------------------------------------------

def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows):
    """RFC 4180 CSV (CRLF line ends) with floats at 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])


def write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return repr(o)


def prepare_output(out, overwrite: bool) -> Path:
    if out is None:
        raise ConfigurationError("no output directory (use --out or the 'output' key)", "output")
    path = Path(out)
    if path.exists():
        if not path.is_dir():
            raise ConfigurationError(f"{path} exists and is not a directory", "output")
        if any(path.iterdir()) and not overwrite:
            raise ConfigurationError(f"{path} is not empty; pass --overwrite to replace its files",
                                     "output")
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigurationError(f"cannot create {path}: {exc}", "output") from exc
    return path


def _rel(a, b):
    return abs(a - b) / abs(b)


# -- solves ----------------------------------------------------------------------------

def _shooter_start(params: PhysicalParams, cfg: RunConfig):
    """Le = 1 shooter solution used as FV initial data (and as the Le = 1 prediction)."""
    return solve_wave(params.with_(Le=1.0), cfg.shoot)


def run_solve(params: PhysicalParams, cfg: RunConfig, solver: str | None = None):
    """One solve; returns (record dict, solution, optional shooter solution)."""
    solver = solver or cfg.solver
    rec = {"solver": solver}
    if solver == "shoot":
        sol = solve_wave(params, cfg.shoot)
        rec.update(c=sol.c, T_s=sol.T_s, mass_flux=sol.mass_flux, xi_residual=sol.xi_residual,
                   iterations=sol.iterations)
        return rec, sol, None
    wave = _shooter_start(params, cfg) if cfg.init == "shooter" else None
    sol = solve_fv(params, cfg.fv, initial=wave)
    rec.update(c=sol.c, T_s=sol.T_s, mass_flux=sol.mass_flux,
               iterations=sum(h["newton_iterations"] for h in sol.history), n_cells=sol.n_cells)
    if wave is not None:
        rec.update(c_shoot=wave.c, T_s_shoot=wave.T_s, err_c=(wave.c - sol.c) / sol.c,
                   err_T_s=(wave.T_s - sol.T_s) / sol.T_s)
    return rec, sol, wave


def _portrait(sol, params: PhysicalParams):
    if hasattr(sol, "orbit"):
        prof = sol.profiles
        return prof.theta, prof.gamma
    prof = sol.profiles
    d = derive(params)
    dT = d.T_f - params.T0
    x = np.concatenate([prof.x[~prof.gas], [0.0], prof.x[prof.gas]])
    T = np.concatenate([prof.T[~prof.gas], [sol.T_s], prof.T[prof.gas]])
    theta = (T - params.T0) / dT
    gamma = np.gradient(theta, x / params.L_ref)
    return theta, gamma


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    params = cfg.params
    t0 = time.perf_counter()
    rec, sol, wave = run_solve(params, cfg)
    wall = time.perf_counter() - t0
    prof = sol.profiles
    cols = prof.columns()
    h = cfg.hash
    write_csv(out / "profile.csv", list(cols) + ["config_hash"],
              [list(row) + [h] for row in zip(*cols.values())])
    theta, gamma = _portrait(sol, params)
    write_csv(out / "portrait.csv", ["theta", "gamma", "config_hash"],
              [(a, b, h) for a, b in zip(theta, gamma)])
    d = derive(params)
    meta = {
        "config_hash": h,
        "version": __version__,
        "solver": cfg.solver,
        "c": sol.c,
        "T_s": sol.T_s,
        "mass_flux": sol.mass_flux,
        "T_f": d.T_f,
        "c_max": d.c_max,
        "c_min": d.c_min,
        "wall_time_s": wall,
        "config": cfg.canonical(),
    }
    if cfg.solver == "shoot":
        meta.update(xi_residual=sol.xi_residual, iterations=sol.iterations,
                    bracket=list(sol.bracket), bracket_width=sol.bracket_width,
                    pressure_drop=pressure_drop(sol))
    else:
        meta.update(fv=sol.meta(), pressure_drop=pressure_drop_diagnostic(sol))
        if wave is not None:
            meta.update(c_shoot=wave.c, c_fv=sol.c, rel_diff_c=_rel(wave.c, sol.c),
                        T_s_shoot=wave.T_s, rel_diff_T_s=_rel(wave.T_s, sol.T_s))
    write_json(out / "meta.json", meta)
    x_mm = prof.x * 1e3
    line_plot(out / "profile.svg", [Series(x_mm, prof.T, "T")], "x [mm]", "T [K]", "Temperature")
    g = prof.gas
    line_plot(out / "mass_fraction.svg", [Series(x_mm[g], prof.Y[g], "Y")], "x [mm]", "Y [-]",
              "Reactant mass fraction")
    line_plot(out / "portrait.svg", [Series(theta, gamma, "gamma")], "theta", "gamma",
              "Phase portrait")
    print(f"c = {sol.c:.12g} m/s, T_s = {sol.T_s:.12g} K  ({cfg.solver})")
    if cfg.solver == "fv" and wave is not None:
        print(f"shooter c = {wave.c:.12g} m/s, relative difference {_rel(wave.c, sol.c):.3e}")
    return EXIT_OK


def cmd_compare(cfg: RunConfig, out: Path) -> int:
    params = cfg.params
    t0 = time.perf_counter()
    wave = solve_wave(params.with_(Le=1.0), cfg.shoot)
    fvsol = solve_fv(params, cfg.fv, initial=wave if cfg.init == "shooter" else None)
    wall = time.perf_counter() - t0
    rows = [("shoot", wave.c, wave.T_s, wave.mass_flux, None, cfg.hash),
            ("fv", fvsol.c, fvsol.T_s, fvsol.mass_flux, fvsol.n_cells, cfg.hash)]
    write_csv(out / "compare.csv", ["solver", "c", "T_s", "mass_flux", "n_cells", "config_hash"], rows)
    doc = {"config_hash": cfg.hash, "version": __version__, "c_shoot": wave.c, "c_fv": fvsol.c,
           "rel_diff_c": _rel(wave.c, fvsol.c), "T_s_shoot": wave.T_s, "T_s_fv": fvsol.T_s,
           "rel_diff_T_s": _rel(wave.T_s, fvsol.T_s), "n_cells": fvsol.n_cells,
           "fv_rounds": fvsol.history, "wall_time_s": wall, "config": cfg.canonical()}
    write_json(out / "compare.json", doc)
    print(f"shoot c = {wave.c:.12g}, fv c = {fvsol.c:.12g}, relative difference {doc['rel_diff_c']:.3e}")
    return EXIT_OK


def apply_sweep_value(params: PhysicalParams, name: str, value: float) -> PhysicalParams:
    if name == "cp_over_cs":
        return params.with_(c_p=value * params.c_s)
    if name == "Ts_fixed":
        return params
    return params.with_(**{name: value})


def _effective_solver(cfg: RunConfig, name: str) -> str:
    if name == "Le":
        return "fv"
    if name == "Ts_fixed":
        return "shoot"
    return cfg.solver


def run_point(cfg: RunConfig, value: float) -> dict:
    """Solve one sweep point; failures become records with status 'failed'."""
    sw = cfg.sweep
    solver = _effective_solver(cfg, sw.parameter)
    rec = dict.fromkeys(RECORD_FIELDS)
    rec.update(parameter=sw.parameter, value=value, solver=solver, config_hash=cfg.hash)
    t0 = time.perf_counter()
    curve = None
    try:
        params = params_from_dict(sw.overrides.get(value, {}),
                                  apply_sweep_value(cfg.params, sw.parameter, value))
        d = derive(params)
        rec.update(c_max=d.c_max, c_min=d.c_min)
        if sw.parameter == "Ts_fixed":
            sol = solve_constant_ts(value, params, cfg.shoot, profile=False)
            rec.update(c=sol.c, T_s=sol.T_s, mass_flux=sol.mass_flux, xi_residual=sol.xi_residual,
                       iterations=sol.iterations)
        else:
            if solver == "fv" and sw.parameter == "Le":
                cfg = dataclasses.replace(cfg, init="shooter")
            r, _, _ = run_solve(params, cfg, solver)
            rec.update(r)
        if sw.parameter == "cp_over_cs":
            problem = nondimensionalize(params)
            scan = xi_scan(problem, sw.xi_points, cfg.shoot)
            curve = {"c_tilde": scan.c_tilde, "c_over_c_max": scan.c_tilde / problem.c_max_tilde,
                     "xi": scan.xi, "xi_over_xi0": scan.xi / scan.xi_zero}
        rec["status"] = "ok"
        rec["message"] = ""
    except PropwaveError as exc:
        rec["status"] = "failed"
        rec["message"] = f"{type(exc).__name__}: {exc}"
    return {"record": rec, "curve": curve, "wall_time": time.perf_counter() - t0}


def _sweep_plots(out: Path, name: str, records, curves):
    ok = [r for r in records if r["status"] == "ok"]
    if not ok:
        return
    v = np.array([r["value"] for r in ok])
    absc = np.array([abs(r["c"]) for r in ok])
    line_plot(out / "sweep.svg", [Series(v, absc, "|c|", markers=True)], name, "|c| [m/s]",
              f"Regression speed versus {name}", logy=True)
    if name == "Le":
        err = np.array([abs(r["err_c"]) if r["err_c"] is not None else np.nan for r in ok])
        line_plot(out / "lewis_error.svg", [Series(v, err, "|c_shoot - c_fv| / |c_fv|", markers=True)],
                  "Le", "relative error on c", "Le = 1 prediction error", logy=True)
    if name == "cp_over_cs" and curves:
        series = [Series(cv["c_over_c_max"], cv["xi_over_xi0"], f"c_p/c_s = {val:g}")
                  for val, cv in curves]
        line_plot(out / "xi_curves.svg", series, "c / c_max", "xi / xi(0)", "Normalised mismatch")


def cmd_sweep(cfg: RunConfig, out: Path, jobs: int = 1) -> int:
    if cfg.sweep is None:
        raise ConfigurationError("the sweep command needs a 'sweep' block", "sweep")
    sw = cfg.sweep
    if sw.parameter == "Ts_fixed" and cfg.solver == "fv":
        raise ConfigurationError("constant-T_s sweeps run with the shooter only", "solver")
    values = sorted(set(sw.values))
    t0 = time.perf_counter()
    if jobs > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_point, [cfg] * len(values), values))
    else:
        results = [run_point(cfg, v) for v in values]
    order = np.argsort([r["record"]["value"] for r in results], kind="stable")
    results = [results[i] for i in order]
    records = [r["record"] for r in results]
    write_csv(out / "sweep.csv", RECORD_FIELDS, [[r[k] for k in RECORD_FIELDS] for r in records])
    curves = [(r["record"]["value"], r["curve"]) for r in results if r["curve"] is not None]
    if curves:
        rows = []
        for val, cv in curves:
            for k in range(len(cv["xi"])):
                rows.append((val, cv["c_tilde"][k], cv["c_over_c_max"][k], cv["xi"][k],
                             cv["xi_over_xi0"][k], cfg.hash))
        write_csv(out / "xi_curves.csv", ["value", "c_tilde", "c_over_c_max", "xi", "xi_over_xi0",
                                          "config_hash"], rows)
    n_fail = sum(r["status"] != "ok" for r in records)
    meta = {"config_hash": cfg.hash, "version": __version__, "parameter": sw.parameter,
            "n_points": len(records), "n_failed": n_fail,
            "wall_time_s": time.perf_counter() - t0,
            "point_wall_time_s": {repr(r["record"]["value"]): r["wall_time"] for r in results},
            "config": cfg.canonical()}
    write_json(out / "meta.json", meta)
    _sweep_plots(out, sw.parameter, records, curves)
    for r in records:
        tail = f"c = {r['c']:.10g} m/s, T_s = {r['T_s']:.10g} K" if r["status"] == "ok" else r["message"]
        print(f"{sw.parameter} = {r['value']:g}: {r['status']}  {tail}")
    if n_fail == len(records):
        return EXIT_SOLVER
    return EXIT_PARTIAL if n_fail else EXIT_OK


def cmd_xi_scan(cfg: RunConfig, out: Path) -> int:
    spec = cfg.xi_scan or XiScanSpec()
    rows, summary = [], []
    for k, ov in enumerate(spec.sets):
        params = params_from_dict(ov, cfg.params)
        problem = nondimensionalize(params)
        scan = xi_scan(problem, spec.n, cfg.shoot)
        sol = solve_wave(params, cfg.shoot, profile=False)
        c_max = problem.c_max_tilde
        c_min = problem.c_min_tilde
        for j in range(scan.xi.size):
            rows.append((k, scan.c_tilde[j], scan.theta_s[j], scan.xi[j], scan.xi[j] / scan.xi_zero,
                         cfg.hash))
        summary.append({"set": k, "overrides": ov, "strictly_increasing": scan.strictly_increasing,
                        "sign_changes": scan.sign_changes, "xi_zero": scan.xi_zero,
                        "c_sol": sol.c, "c_sol_over_c_max": sol.c_tilde / c_max,
                        "c_min_over_c_max": (c_min / c_max) if c_min is not None else None})
        print(f"set {k}: increasing={scan.strictly_increasing}, sign changes={scan.sign_changes}, "
              f"c_sol/c_max={sol.c_tilde / c_max:.6g}")
    write_csv(out / "xi_scan.csv", ["set", "c_tilde", "theta_s", "xi", "xi_over_xi0", "config_hash"], rows)
    write_json(out / "xi_summary.json", {"config_hash": cfg.hash, "version": __version__,
                                         "sets": summary, "config": cfg.canonical()})
    series = []
    for k in range(len(spec.sets)):
        sel = [r for r in rows if r[0] == k]
        c_max = nondimensionalize(params_from_dict(spec.sets[k], cfg.params)).c_max_tilde
        series.append(Series([r[1] / c_max for r in sel], [r[4] for r in sel], f"set {k}"))
    line_plot(out / "xi_scan.svg", series, "c / c_max", "xi / xi(0)", "Mismatch over the bracket")
    return EXIT_OK


# -- entry point ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="propwave", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, hlp in (("solve", "single travelling-wave solve"),
                      ("sweep", "parametric sweep"),
                      ("xi-scan", "tabulate the mismatch function over the bracket"),
                      ("compare", "shooter versus finite-volume comparison")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--config", type=Path, help="JSON configuration (reference case if omitted)")
        p.add_argument("--solver", choices=SOLVERS)
        p.add_argument("--init", choices=INITS)
        p.add_argument("--out", type=Path)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--overwrite", action="store_true")
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        kw = dict(solver=args.solver, init=args.init, output=str(args.out) if args.out else None)
        cfg = load_config(args.config, **kw) if args.config else parse_config({}, **kw)
        if args.jobs < 1:
            raise ConfigurationError("--jobs must be >= 1", "jobs")
        if args.command == "sweep" and cfg.sweep is None:
            raise ConfigurationError("the sweep command needs a 'sweep' block", "sweep")
        out = prepare_output(cfg.output, args.overwrite)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "solve":
            return cmd_solve(cfg, out)
        if args.command == "compare":
            return cmd_compare(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out, args.jobs)
        return cmd_xi_scan(cfg, out)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PropwaveError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
