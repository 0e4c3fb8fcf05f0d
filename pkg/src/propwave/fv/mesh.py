"""Cell-centred meshes with the solid/gas interface on a face."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, DomainError


@dataclass(frozen=True, eq=False)
class FvMesh:
    """Face positions (m), strictly increasing; ``faces[n_solid] == 0`` is the interface."""

    faces: np.ndarray
    n_solid: int

    def __post_init__(self):
        f = np.asarray(self.faces, dtype=float)
        object.__setattr__(self, "faces", f)
        if f.ndim != 1 or not np.all(np.isfinite(f)):
            raise DomainError("faces must be a finite 1-d array")
        if np.any(np.diff(f) <= 0):
            raise DomainError("faces must be strictly increasing")
        if not (2 <= self.n_solid <= f.size - 3):
            raise DomainError("need at least two solid and two gas cells")
        if f[self.n_solid] != 0.0:
            raise DomainError("the interface x = 0 must be a face")

    @property
    def n_cells(self) -> int:
        return self.faces.size - 1

    @property
    def n_gas(self) -> int:
        return self.n_cells - self.n_solid

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.faces[1:] + self.faces[:-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.faces)

    @property
    def solid_length(self) -> float:
        return -self.faces[0]

    @property
    def gas_length(self) -> float:
        return self.faces[-1]

    def same_as(self, other: "FvMesh") -> bool:
        return self.n_solid == other.n_solid and self.faces.size == other.faces.size \
            and np.array_equal(self.faces, other.faces)


def _geometric_tail(start_width, length, ratio):
    """Cumulative offsets of cells growing by ``ratio`` until ``length`` is covered."""
    out = []
    pos, w = 0.0, start_width
    while pos < length:
        w = w * ratio
        pos += w
        out.append(pos)
    return np.array(out)


def _side_points(xs, Ts, Tstart, Tend, thr, length, ratio, max_cells):
    """Distances from the interface where |T - Tstart| crosses multiples of thr.

    ``xs`` are increasing distances (>= 0) from the interface with matching
    monotone ``Ts``.  Beyond the last crossing cells grow geometrically.
    """
    span = abs(Tend - Tstart)
    n = int(np.floor(span / thr))
    if n > max_cells:
        raise ConvergenceError(f"equidistribution would need more than {max_cells} cells")
    levels = np.abs(Ts - Tstart)
    targets = thr * np.arange(1, n + 1)
    targets = targets[targets < levels[-1]]
    d = np.interp(targets, levels, xs) if targets.size else np.zeros(0)
    d = d[d > 0]
    if d.size:
        d = np.unique(d)
    if d.size < 3:
        d = np.array([length / 200, length / 100, length / 50]) if d.size == 0 else \
            np.concatenate([d, d[-1] * np.array([1.5, 2.25, 3.375])[:3 - d.size]])
    # smooth transition: cap growth of consecutive widths
    widths = np.diff(np.concatenate([[0.0], d]))
    for i in range(1, widths.size):
        widths[i] = min(widths[i], widths[i - 1] * ratio)
    d = np.cumsum(widths)
    if d[-1] < length:
        d = np.concatenate([d, d[-1] + _geometric_tail(widths[-1], length - d[-1], ratio)])
    return d


def equidistributed_mesh(x, T, threshold: float, solid_length: float, gas_length: float,
                         ratio: float = 1.2, max_cells: int = 400_000) -> FvMesh:
    """Mesh on which the interpolated temperature changes by at most ``threshold`` per cell.

    ``x``, ``T`` describe a monotone profile with the interface at x = 0
    (both sides must contain x = 0 or points near it).
    """
    x = np.asarray(x, float)
    T = np.asarray(T, float)
    order = np.argsort(x)
    x, T = x[order], T[order]
    Ts = np.interp(0.0, x, T)
    s = x <= 0
    g = x >= 0
    xs = np.concatenate([[0.0], -x[s][::-1]])
    Tsol = np.concatenate([[Ts], T[s][::-1]])
    xs, idx = np.unique(xs, return_index=True)
    Tsol = Tsol[idx]
    xg = np.concatenate([[0.0], x[g]])
    Tgas = np.concatenate([[Ts], T[g]])
    xg, idx = np.unique(xg, return_index=True)
    Tgas = Tgas[idx]
    ds = _side_points(xs, Tsol, Ts, Tsol[-1], threshold, solid_length, ratio, max_cells)
    dg = _side_points(xg, Tgas, Ts, Tgas[-1], threshold, gas_length, ratio, max_cells)
    faces = np.concatenate([-ds[::-1], [0.0], dg])
    return FvMesh(faces, ds.size)


def geometric_mesh(solid_length, gas_length, first_width, ratio=1.1):
    ds = np.concatenate([[first_width], first_width + _geometric_tail(first_width, solid_length, ratio)])
    dg = np.concatenate([[first_width], first_width + _geometric_tail(first_width, gas_length, ratio)])
    return FvMesh(np.concatenate([-ds[::-1], [0.0], dg]), ds.size)


def _phase_points(T_cells, T_s, centers, side):
    """Values and positions on one side including the interface point, ordered outward."""
    if side == "solid":
        return np.concatenate([[0.0], -centers[::-1]]), np.concatenate([[T_s], T_cells[::-1]])
    return np.concatenate([[0.0], centers]), np.concatenate([[T_s], T_cells])


def refine_mesh(state, mesh: FvMesh, options) -> FvMesh:
    """Split cells where the temperature (or mass-fraction) jump or the curvature is large.

    The interface stays a face.  When the gradient next to an outer boundary
    exceeds ``options.extend_tol`` times the peak gradient, the domain is
    extended on that side with geometrically growing cells.
    """
    xc = mesh.centers
    ns = mesh.n_solid
    T = state.T
    dT_thr = options.refine_dT
    span_T = max(np.ptp(np.concatenate([T, [state.T_s]])), 1e-300)
    dY_thr = options.refine_dY if options.refine_dY is not None else dT_thr / span_T
    mark = np.zeros(mesh.n_cells, bool)

    def mark_side(vals, pos, cells, thr):
        # vals/pos ordered outward from the interface; cells[k] is the cell at point k (k >= 1)
        dv = np.abs(np.diff(vals))
        big = dv > thr
        for k in np.nonzero(big)[0]:
            if k >= 1:
                mark[cells[k - 1]] = True
            mark[cells[k]] = True
        if options.refine_curv is not None and vals.size > 3:
            slope = np.diff(vals) / np.diff(pos)
            rng = np.ptp(slope)
            if rng > 0:
                dslope = np.abs(np.diff(slope))
                for k in np.nonzero(dslope > options.refine_curv * rng)[0]:
                    mark[cells[k]] = True

    solid_cells = np.arange(ns)[::-1]
    gas_cells = np.arange(ns, mesh.n_cells)
    pos_s, vals_s = _phase_points(T[:ns], state.T_s, xc[:ns], "solid")
    mark_side(vals_s, pos_s, solid_cells, dT_thr)
    pos_g, vals_g = _phase_points(T[ns:], state.T_s, xc[ns:], "gas")
    mark_side(vals_g, pos_g, gas_cells, dT_thr)
    Y0 = state.Y[0] + (state.Y[0] - state.Y[1]) * (xc[ns] / (xc[ns + 1] - xc[ns]))
    pos_y, vals_y = _phase_points(state.Y, Y0, xc[ns:], "gas")
    mark_side(vals_y, pos_y, gas_cells, dY_thr)

    faces = mesh.faces
    w = mesh.widths
    # limit the size ratio of neighbours
    new_w_mark = mark.copy()
    for _ in range(50):
        w_new = np.where(new_w_mark, w / 2, w)
        ratio_r = w_new[1:] / w_new[:-1]
        grow = np.zeros_like(new_w_mark)
        grow[1:] |= (ratio_r > options.max_ratio) & ~new_w_mark[1:]
        grow[:-1] |= (1.0 / ratio_r > options.max_ratio) & ~new_w_mark[:-1]
        if not grow.any():
            break
        new_w_mark |= grow
    mids = 0.5 * (faces[:-1] + faces[1:])[new_w_mark]
    new_faces = np.sort(np.concatenate([faces, mids]))
    n_solid = ns + int(np.count_nonzero(new_w_mark[:ns]))

    # boundary extension
    grad = np.abs(np.diff(np.concatenate([T[:ns], [state.T_s], T[ns:]])) /
                  np.diff(np.concatenate([xc[:ns], [0.0], xc[ns:]])))
    peak = grad.max() if grad.size else 0.0
    if peak > 0:
        if grad[0] > options.extend_tol * peak:
            L = new_faces[0]
            tail = _geometric_tail(new_faces[1] - new_faces[0], 0.5 * abs(L), options.extend_ratio)
            new_faces = np.concatenate([(L - tail)[::-1], new_faces])
            n_solid += tail.size
        if grad[-1] > options.extend_tol * peak:
            L = new_faces[-1]
            tail = _geometric_tail(new_faces[-1] - new_faces[-2], 0.5 * L, options.extend_ratio)
            new_faces = np.concatenate([new_faces, L + tail])
    if new_faces.size - 1 > options.max_cells:
        raise ConvergenceError(f"refinement exceeds the cell cap ({options.max_cells})")
    if new_faces.size == faces.size:
        return mesh
    return FvMesh(new_faces, n_solid)
