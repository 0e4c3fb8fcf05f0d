"""Stiff initial-value integration, quadrature and bracketed root finding.

The integrator is the three-stage Radau IIA collocation method (order 5)
with simplified Newton iterations, an embedded error estimate, cubic dense
output and terminal events.  The core loop is written so that numba can
compile it; right-hand sides that are themselves numba-compiled run entirely
in machine code, plain Python callables go through the interpreted copy.
"""

from __future__ import annotations

import hashlib
import inspect
import math
import types
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
import scipy.integrate
from numba import njit
from numba.extending import is_jitted

from .errors import BracketError, ConvergenceError, IntegrationError

__all__ = [
    "IvpSpec",
    "IvpResult",
    "DenseTrajectory",
    "RootResult",
    "CompiledSystem",
    "integrate",
    "quad",
    "find_root",
]

# -- Radau IIA tableau and its transformation to block-diagonal form ----------

_S6 = math.sqrt(6.0)
_A = np.array([
    [(88 - 7 * _S6) / 360, (296 - 169 * _S6) / 1800, (-2 + 3 * _S6) / 225],
    [(296 + 169 * _S6) / 1800, (88 + 7 * _S6) / 360, (-2 - 3 * _S6) / 225],
    [(16 - _S6) / 36, (16 + _S6) / 36, 1 / 9],
])
C = np.array([(4 - _S6) / 10, (4 + _S6) / 10, 1.0])
E = np.array([-13 - 7 * _S6, -13 + 7 * _S6, -1.0]) / 3.0


def _transformation():
    lam, V = np.linalg.eig(np.linalg.inv(_A))
    ir = int(np.argmin(np.abs(lam.imag)))
    ic = int(np.argmax(lam.imag))
    t1 = V[:, ir].real
    v = V[:, ic]
    T = np.column_stack([t1 / t1[-1], v.real, v.imag])
    TI = np.linalg.inv(T)
    return T, TI, float(lam[ir].real), complex(lam[ic].conjugate())


T_MAT, TI_MAT, MU_REAL, MU_COMPLEX = _transformation()
TI_REAL = TI_MAT[0].copy()
TI_COMPLEX = TI_MAT[1] + 1j * TI_MAT[2]
# dense output: y(t_old + x h) = y_old + sum_k Q[:, k] x^(k+1), collocation through the stages
P_MAT = np.linalg.inv(np.vander(C, 4, increasing=True)[:, 1:]).T

NEWTON_MAXITER = 6
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
EPS = np.finfo(float).eps

ST_DONE, ST_EVENT = 0, 1
ST_MAXSTEPS, ST_SMALLSTEP, ST_NONFINITE = -1, -2, -3


# -- small dense LU usable from compiled code --------------------------------

@njit(cache=True)
def _lu_factor(A):
    n = A.shape[0]
    LU = A.copy()
    piv = np.arange(n)
    for k in range(n):
        p = k
        best = abs(LU[k, k])
        for i in range(k + 1, n):
            if abs(LU[i, k]) > best:
                best = abs(LU[i, k])
                p = i
        if p != k:
            for j in range(n):
                tmp = LU[k, j]
                LU[k, j] = LU[p, j]
                LU[p, j] = tmp
            tp = piv[k]
            piv[k] = piv[p]
            piv[p] = tp
        d = LU[k, k]
        if d == 0:
            continue
        for i in range(k + 1, n):
            LU[i, k] /= d
            f = LU[i, k]
            if f != 0:
                for j in range(k + 1, n):
                    LU[i, j] -= f * LU[k, j]
    return LU, piv


@njit(cache=True)
def _lu_solve(LU, piv, b):
    n = LU.shape[0]
    x = np.empty(n, dtype=LU.dtype)
    for i in range(n):
        x[i] = b[piv[i]]
    for i in range(n):
        s = x[i]
        for j in range(i):
            s -= LU[i, j] * x[j]
        x[i] = s
    for i in range(n - 1, -1, -1):
        s = x[i]
        for j in range(i + 1, n):
            s -= LU[i, j] * x[j]
        x[i] = s / LU[i, i]
    return x


@njit(cache=True)
def _rms(x):
    return math.sqrt(np.sum(x * x) / x.size)


@njit(cache=True)
def _all_finite(x):
    for v in x.ravel():
        if not math.isfinite(v):
            return False
    return True


@njit(cache=True)
def _dense_eval(t_old, h, y_old, Q, t):
    x = (t - t_old) / h
    out = y_old.copy()
    p = x
    for k in range(Q.shape[1]):
        out += Q[:, k] * p
        p *= x
    return out


@njit(cache=True)
def _no_event(t, y, args):
    return 1.0


@njit(cache=True)
def _no_jac(t, y, args):
    return np.zeros((y.size, y.size))


def _jac_eval(use_fd, t, y, f, args, atol):
    if not use_fd:
        return _JAC(t, y, args)
    n = y.size
    J = np.empty((n, n))
    for j in range(n):
        yj = y.copy()
        d = math.sqrt(EPS * max(1e-5, abs(y[j])))
        yj[j] += d
        d = yj[j] - y[j]
        J[:, j] = (_FUN(t, yj, args) - f) / d
    return J


# placeholders, rebound per system in _build_core
def _FUN(t, y, args):
    raise NotImplementedError


_JAC = _EVENT = _FUN


def _radau_core_py(has_event, use_fd, args, t0, y0, t_end, rtol, atol,
                   h0, max_steps, T, TI, TI_R, TI_C, mu_r, mu_c, Cn, En, P):
    n = y0.size
    direction = 1.0 if t_end >= t0 else -1.0
    t = t0
    y = y0.copy()
    n_fev = 0
    n_jev = 0
    n_lu = 0
    f = _FUN(t, y, args)
    n_fev += 1

    cap = 64
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    Qs = np.empty((cap, n, 3))
    ts[0] = t
    ys[0] = y
    n_nodes = 1

    status = ST_DONE
    t_event = np.nan
    if not _all_finite(f):
        return (ST_NONFINITE, t, y, ts[:1], ys[:1], Qs[:0], 0, 0, n_fev, n_jev, n_lu, t_event)

    g_old = 1.0
    if has_event:
        g_old = _EVENT(t, y, args)
        if g_old <= 0.0:
            return (ST_EVENT, t, y, ts[:1], ys[:1], Qs[:0], 0, 0, n_fev, n_jev, n_lu, t)

    J = _jac_eval(use_fd, t, y, f, args, atol)
    n_fev += n
    n_jev += 1
    current_jac = True

    span = abs(t_end - t0)
    if span == 0.0:
        return (ST_DONE, t, y, ts[:1], ys[:1], Qs[:0], 0, 0, n_fev, n_jev, n_lu, t_event)

    if h0 > 0:
        h_abs = min(h0, span)
    else:
        scale = atol + np.abs(y) * rtol
        d0 = _rms(y / scale)
        d1 = _rms(f / scale)
        if d0 < 1e-5 or d1 < 1e-5:
            hh = 1e-6
        else:
            hh = 0.01 * d0 / d1
        hh = min(hh, span)
        y1 = y + hh * direction * f
        f1 = _FUN(t + hh * direction, y1, args)
        n_fev += 1
        d2 = _rms((f1 - f) / scale) / hh
        if d1 <= 1e-15 and d2 <= 1e-15:
            h1 = max(1e-6, hh * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** (1.0 / 4.0)
        h_abs = min(100 * hh, h1, span)

    newton_tol = max(10 * EPS / rtol, min(0.03, rtol ** 0.5))
    h_abs_old = -1.0
    err_old = -1.0
    have_sol = False
    sol_t_old = t
    sol_h = 1.0
    sol_y_old = y.copy()
    sol_Q = np.zeros((n, 3))
    LU_r = np.empty((n, n))
    piv_r = np.empty(n, dtype=np.int64)
    LU_c = np.empty((n, n), dtype=np.complex128)
    piv_c = np.empty(n, dtype=np.int64)
    have_lu = False
    I = np.eye(n)
    n_steps = 0
    n_rej = 0
    Z = np.zeros((3, n))
    F = np.empty((3, n))
    W = np.empty((3, n))
    dW = np.empty((3, n))

    while True:
        if n_steps >= max_steps:
            status = ST_MAXSTEPS
            break
        min_step = 10 * EPS * abs(t) + 1e-300
        rejected = False
        accepted = False
        failed = False
        err_norm = 0.0
        n_iter = 0
        rate = 0.0
        y_new = y
        t_new = t
        h = h_abs * direction
        safety = 0.9
        while not accepted:
            if h_abs < min_step:
                failed = True
                break
            h = h_abs * direction
            t_new = t + h
            if direction * (t_new - t_end) > 0:
                t_new = t_end
            h = t_new - t
            h_abs = abs(h)
            if have_sol:
                for i in range(3):
                    Z[i] = _dense_eval(sol_t_old, sol_h, sol_y_old, sol_Q, t + h * Cn[i]) - y
            else:
                Z[:] = 0.0
            scale = atol + np.abs(y) * rtol
            converged = False
            while not converged:
                if not have_lu:
                    LU_r, piv_r = _lu_factor(mu_r / h * I - J)
                    LU_c, piv_c = _lu_factor(mu_c / h * I.astype(np.complex128) - J.astype(np.complex128))
                    n_lu += 1
                    have_lu = True
                # simplified Newton on the transformed stage system
                for i in range(3):
                    W[i] = TI[i, 0] * Z[0] + TI[i, 1] * Z[1] + TI[i, 2] * Z[2]
                dW_norm_old = -1.0
                rate = -1.0
                converged = False
                k = 0
                ok = True
                while k < NEWTON_MAXITER:
                    for i in range(3):
                        F[i] = _FUN(t + h * Cn[i], y + Z[i], args)
                    n_fev += 3
                    if not _all_finite(F):
                        ok = False
                        break
                    f_r = TI_R[0] * F[0] + TI_R[1] * F[1] + TI_R[2] * F[2] - (mu_r / h) * W[0]
                    f_c = (TI_C[0] * F[0] + TI_C[1] * F[1] + TI_C[2] * F[2]
                           - (mu_c / h) * (W[1] + 1j * W[2]))
                    dr = _lu_solve(LU_r, piv_r, f_r)
                    dc = _lu_solve(LU_c, piv_c, f_c)
                    dW[0] = dr
                    dW[1] = dc.real
                    dW[2] = dc.imag
                    dW_norm = _rms(dW / scale)
                    if dW_norm_old >= 0:
                        rate = dW_norm / dW_norm_old
                    if rate >= 0 and (rate >= 1 or rate ** (NEWTON_MAXITER - k) / (1 - rate) * dW_norm > newton_tol):
                        ok = False
                        break
                    W += dW
                    for i in range(3):
                        Z[i] = T[i, 0] * W[0] + T[i, 1] * W[1] + T[i, 2] * W[2]
                    k += 1
                    if dW_norm == 0 or (rate >= 0 and rate / (1 - rate) * dW_norm < newton_tol):
                        converged = True
                        break
                    dW_norm_old = dW_norm
                n_iter = k if converged else k + 1
                if not ok or not converged:
                    converged = False
                    if current_jac:
                        break
                    J = _jac_eval(use_fd, t, y, f, args, atol)
                    n_fev += n
                    n_jev += 1
                    current_jac = True
                    have_lu = False
            if not converged:
                h_abs *= 0.5
                have_lu = False
                continue
            y_new = y + Z[2]
            ZE = (En[0] * Z[0] + En[1] * Z[1] + En[2] * Z[2]) / h
            err = _lu_solve(LU_r, piv_r, f + ZE)
            scale = atol + np.maximum(np.abs(y), np.abs(y_new)) * rtol
            err_norm = _rms(err / scale)
            safety = 0.9 * (2 * NEWTON_MAXITER + 1) / (2 * NEWTON_MAXITER + n_iter)
            if (rejected or n_steps == 0) and err_norm > 1:
                fe = _FUN(t, y + err, args)
                n_fev += 1
                if _all_finite(fe):
                    err = _lu_solve(LU_r, piv_r, fe + ZE)
                    err_norm = _rms(err / scale)
            if not math.isfinite(err_norm):
                err_norm = 1e10
            if err_norm > 1:
                if err_old < 0 or h_abs_old < 0 or err_norm == 0:
                    mult = 1.0
                else:
                    mult = h_abs / h_abs_old * (err_old / err_norm) ** 0.25
                factor = min(1.0, mult) * err_norm ** -0.2
                h_abs *= max(MIN_FACTOR, safety * factor)
                have_lu = False
                rejected = True
                n_rej += 1
            else:
                accepted = True
        if failed:
            status = ST_SMALLSTEP
            break

        recompute_jac = n_iter > 2 and rate > 1e-3
        if err_norm == 0:
            factor = MAX_FACTOR
        else:
            if err_old < 0 or h_abs_old < 0:
                mult = 1.0
            else:
                mult = h_abs / h_abs_old * (err_old / err_norm) ** 0.25
            factor = min(1.0, mult) * err_norm ** -0.2
        factor = min(MAX_FACTOR, safety * factor)
        if not recompute_jac and factor < 1.2:
            factor = 1.0
        else:
            have_lu = False
        f_new = _FUN(t_new, y_new, args)
        n_fev += 1
        if not _all_finite(f_new) or not _all_finite(y_new):
            status = ST_NONFINITE
            t = t_new
            y = y_new
            break
        if recompute_jac:
            J = _jac_eval(use_fd, t_new, y_new, f_new, args, atol)
            n_fev += n
            n_jev += 1
            current_jac = True
        else:
            current_jac = False
        h_abs_old = h_abs
        err_old = err_norm

        # dense output over the accepted step
        Q = np.zeros((n, 3))
        for kk in range(3):
            for i in range(3):
                Q[:, kk] += Z[i] * P[i, kk]
        sol_t_old = t
        sol_h = h
        sol_y_old = y.copy()
        sol_Q = Q
        have_sol = True

        if n_nodes >= cap:
            cap *= 2
            ts2 = np.empty(cap)
            ys2 = np.empty((cap, n))
            Qs2 = np.empty((cap, n, 3))
            ts2[:n_nodes] = ts[:n_nodes]
            ys2[:n_nodes] = ys[:n_nodes]
            Qs2[:n_nodes - 1] = Qs[:n_nodes - 1]
            ts, ys, Qs = ts2, ys2, Qs2
        Qs[n_nodes - 1] = Q
        ts[n_nodes] = t_new
        ys[n_nodes] = y_new
        n_nodes += 1
        n_steps += 1

        if has_event:
            g_new = _EVENT(t_new, y_new, args)
            if g_new <= 0.0:
                # Brent on the interpolant between t and t_new
                a = t
                b = t_new
                fa = g_old
                fb = g_new
                if fb == 0.0:
                    t_ev = b
                else:
                    cc = a
                    fc = fa
                    dd = b - a
                    ee = dd
                    for _ in range(200):
                        if (fb > 0 and fc > 0) or (fb < 0 and fc < 0):
                            cc = a
                            fc = fa
                            dd = b - a
                            ee = dd
                        if abs(fc) < abs(fb):
                            a = b
                            b = cc
                            cc = a
                            fa = fb
                            fb = fc
                            fc = fa
                        tol1 = 2 * EPS * abs(b) + 0.5e-15
                        xm = 0.5 * (cc - b)
                        if abs(xm) <= tol1 or fb == 0.0:
                            break
                        if abs(ee) >= tol1 and abs(fa) > abs(fb):
                            s = fb / fa
                            if a == cc:
                                pp = 2 * xm * s
                                qq = 1 - s
                            else:
                                qq = fa / fc
                                rr = fb / fc
                                pp = s * (2 * xm * qq * (qq - rr) - (b - a) * (rr - 1))
                                qq = (qq - 1) * (rr - 1) * (s - 1)
                            if pp > 0:
                                qq = -qq
                            pp = abs(pp)
                            if 2 * pp < min(3 * xm * qq - abs(tol1 * qq), abs(ee * qq)):
                                ee = dd
                                dd = pp / qq
                            else:
                                dd = xm
                                ee = dd
                        else:
                            dd = xm
                            ee = dd
                        a = b
                        fa = fb
                        if abs(dd) > tol1:
                            b += dd
                        else:
                            b += tol1 if xm > 0 else -tol1
                        fb = _EVENT(b, _dense_eval(sol_t_old, sol_h, sol_y_old, sol_Q, b), args)
                    t_ev = b
                t_event = t_ev
                status = ST_EVENT
                t = t_ev
                y = _dense_eval(sol_t_old, sol_h, sol_y_old, sol_Q, t_ev)
                break
            g_old = g_new

        t = t_new
        y = y_new
        f = f_new
        h_abs *= factor
        if direction * (t - t_end) >= 0:
            status = ST_DONE
            break

    n_q = max(n_nodes - 1, 0)
    return (status, t, y, ts[:n_nodes].copy(), ys[:n_nodes].copy(), Qs[:n_q].copy(),
            n_steps, n_rej, n_fev, n_jev, n_lu, t_event)




# -- public interface ----------------------------------------------------------

@dataclass
class IvpSpec:
    """Initial-value problem y' = fun(t, y), y(t0) = y0, integrated to t_end.

    ``fun``, ``jac`` and ``event`` take ``(t, y)``; alternatively ``fun`` is a
    :class:`CompiledSystem` and ``args`` its parameter array.  Integration
    stops when ``event`` becomes <= 0.  Without ``jac`` the Jacobian is built
    by forward differences.
    """

    fun: Callable
    t0: float
    y0: Any
    t_end: float
    rtol: float = 1e-10
    atol: float = 1e-12
    event: Callable | None = None
    jac: Callable | None = None
    max_steps: int = 100_000
    args: Any = None
    first_step: float | None = None

    def __post_init__(self):
        for name in ("rtol", "atol"):
            v = getattr(self, name)
            if not (1e-15 <= v <= 1e-1):
                raise ValueError(f"{name}={v!r} outside [1e-15, 1e-1]")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


class DenseTrajectory:
    """Piecewise polynomial interpolant over accepted steps."""

    def __init__(self, ts, ys, Q):
        self.ts = ts
        self.ys = ys
        self.Q = Q
        self._forward = len(ts) < 2 or ts[-1] >= ts[0]
        self._key = ts if self._forward else -ts

    @property
    def t_min(self):
        return min(self.ts[0], self.ts[-1])

    @property
    def t_max(self):
        return max(self.ts[0], self.ts[-1])

    def __call__(self, t):
        """State at t (scalar -> (n,), array -> (n, m)); exact at stored nodes."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr < self.t_min - 1e-15 * max(1, abs(self.t_min))) or \
                np.any(t_arr > self.t_max + 1e-15 * max(1, abs(self.t_max))):
            raise ValueError("dense output requested outside the integrated range")
        key = t_arr if self._forward else -t_arr
        j = np.searchsorted(self._key, key, side="right") - 1
        j = np.clip(j, 0, max(len(self.ts) - 2, 0))
        if len(self.ts) < 2:
            out = np.repeat(self.ys[:1].T, t_arr.size, axis=1)
        else:
            t0 = self.ts[j]
            h = self.ts[j + 1] - t0
            x = (t_arr - t0) / h
            Q = self.Q[j]                                    # (m, n, 3)
            out = self.ys[j] + Q[:, :, 0] * x[:, None] + Q[:, :, 1] * (x ** 2)[:, None] \
                + Q[:, :, 2] * (x ** 3)[:, None]
            out = out.T
            hit = np.isin(t_arr, self.ts)
            if np.any(hit):
                idx = np.searchsorted(self._key, key[hit])
                out[:, hit] = self.ys[idx].T
        return out[:, 0] if np.ndim(t) == 0 else out


@dataclass
class IvpResult:
    t: float
    y: np.ndarray
    status: str
    message: str
    trajectory: DenseTrajectory
    n_steps: int
    n_rejected: int
    n_fev: int
    n_jev: int
    n_lu: int
    t_event: float | None = None

    @property
    def success(self) -> bool:
        return self.status in ("done", "event")


_STATUS = {ST_DONE: "done", ST_EVENT: "event", ST_MAXSTEPS: "max_steps",
           ST_SMALLSTEP: "step_size_underflow", ST_NONFINITE: "non_finite"}


def _build_core(fun, jac, event, jit, tag=None):
    """Copy of the integrator loop with the system functions bound as globals.

    Binding by global name (rather than passing functions as arguments) keeps
    the compiled loop cacheable on disk.
    """
    g = dict(globals())
    g.update(_FUN=fun, _JAC=jac if jac is not None else _no_jac, _EVENT=event if event is not None else _no_event)
    helper = types.FunctionType(_jac_eval.__code__, g, "_jac_eval")
    core = types.FunctionType(_radau_core_py.__code__, g, "_radau_core")
    if tag is not None:
        helper.__qualname__ = f"_jac_eval_{tag}"
        core.__qualname__ = f"_radau_core_{tag}"
    if jit:
        helper = njit(cache=True)(helper)
        core = njit(cache=True)(core)
    g["_jac_eval"] = helper
    return core


class CompiledSystem:
    """A right-hand side compiled together with the integrator loop.

    ``fun(t, y, args)``, ``jac(t, y, args)`` and ``event(t, y, args)`` must be
    numba-compiled module-level functions; ``args`` is a float array.
    """

    def __init__(self, fun, jac=None, event=None):
        for f in (fun, jac, event):
            if f is not None and not is_jitted(f):
                raise TypeError("CompiledSystem needs numba-compiled functions")
        src = "".join(inspect.getsource(f.py_func) for f in (fun, jac, event) if f is not None)
        tag = hashlib.sha1(src.encode()).hexdigest()[:12]
        self.fun, self.jac, self.event = fun, jac, event
        self.core = _build_core(fun, jac, event, jit=True, tag=tag)

    def __call__(self, t, y, args):
        return self.fun(t, y, args)


def integrate(spec: IvpSpec, raise_on_failure: bool = True) -> IvpResult:
    """Integrate an initial-value problem with the adaptive Radau IIA method.

    ``spec.fun`` is either a plain callable ``f(t, y)`` or a
    :class:`CompiledSystem` (whose own jac/event take precedence).
    """
    y0 = np.atleast_1d(np.asarray(spec.y0, dtype=float)).copy()
    if isinstance(spec.fun, CompiledSystem):
        system = spec.fun
        fun = system.fun
        has_event = system.event is not None
        use_fd = system.jac is None
        args = np.asarray(spec.args if spec.args is not None else np.zeros(0), dtype=float)
        core = system.core
    else:
        user_f, user_e, user_j = spec.fun, spec.event, spec.jac
        fun = lambda t, y, a: np.atleast_1d(np.asarray(user_f(t, y), dtype=float))
        event = (lambda t, y, a: float(user_e(t, y))) if user_e is not None else None
        jac = (lambda t, y, a: np.atleast_2d(np.asarray(user_j(t, y), dtype=float))) \
            if user_j is not None else None
        has_event = user_e is not None
        use_fd = user_j is None
        args = None
        core = _build_core(fun, jac, event, jit=False)
    f0 = fun(spec.t0, y0, args)
    if not np.all(np.isfinite(f0)):
        raise IntegrationError("right-hand side is not finite at the initial point", t=spec.t0)
    out = core(has_event, use_fd, args, float(spec.t0), y0, float(spec.t_end),
               float(spec.rtol), float(spec.atol), float(spec.first_step or 0.0), int(spec.max_steps),
               T_MAT, TI_MAT, TI_REAL, TI_COMPLEX, MU_REAL, MU_COMPLEX, C, E, P_MAT)
    st, t, y, ts, ys, Qs, n_steps, n_rej, n_fev, n_jev, n_lu, t_ev = out
    status = _STATUS[int(st)]
    messages = {
        "done": "reached the terminal value",
        "event": "terminated by event",
        "max_steps": f"maximum number of steps ({spec.max_steps}) exceeded",
        "step_size_underflow": "step size fell below the representable minimum",
        "non_finite": "right-hand side or state became non-finite",
    }
    res = IvpResult(t=float(t), y=np.asarray(y), status=status, message=messages[status],
                    trajectory=DenseTrajectory(ts, ys, Qs), n_steps=int(n_steps),
                    n_rejected=int(n_rej), n_fev=int(n_fev), n_jev=int(n_jev), n_lu=int(n_lu),
                    t_event=float(t_ev) if status == "event" else None)
    if raise_on_failure and not res.success:
        raise IntegrationError(res.message, t=res.t, context={"status": status})
    return res


def quad(f: Callable[[float], float], a: float, b: float, rtol: float = 1e-10,
         atol: float = 0.0, limit: int = 200, points=None) -> float:
    """Adaptive Gauss-Kronrod quadrature of a scalar function.

    Integrable endpoint singularities are handled by the adaptive subdivision;
    ``points`` marks interior breakpoints.
    """
    if a == b:
        return 0.0
    with np.errstate(all="ignore"):
        val, err, info = scipy.integrate.quad(f, a, b, epsabs=atol, epsrel=rtol, limit=limit,
                                              points=points, full_output=1)[:3]
    if not np.isfinite(val):
        raise ConvergenceError(f"quadrature on [{a}, {b}] returned a non-finite value")
    tol = max(atol, rtol * abs(val))
    if err > 10 * tol and err > 1e-14 * abs(val):
        raise ConvergenceError(
            f"quadrature on [{a}, {b}] did not converge: estimate {val:.16g}, error {err:.3g}")
    return float(val)


@dataclass
class RootResult:
    root: float
    f_root: float
    bracket: tuple
    iterations: int
    n_eval: int
    converged_by: str = "xtol"
    history: list = field(default_factory=list)


def find_root(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-14,
              ftol: float = 0.0, rtol: float = 4 * EPS, max_iter: int = 200,
              f_lo: float | None = None, f_hi: float | None = None) -> RootResult:
    """Brent's method on a sign-changing bracket [lo, hi].

    Stops when the bracket containing the root is narrower than
    ``xtol + rtol*|x|`` or ``|f(x)| <= ftol``.  f is never evaluated outside
    [lo, hi].
    """
    a, b = float(lo), float(hi)
    fa = f(a) if f_lo is None else f_lo
    fb = f(b) if f_hi is None else f_hi
    n_eval = (f_lo is None) + (f_hi is None)
    if not a < b:
        a, b, fa, fb = b, a, fb, fa
    if not (np.isfinite(fa) and np.isfinite(fb)):
        raise BracketError(f"non-finite function value at the bracket ends: f({a})={fa}, f({b})={fb}")
    if fa == 0.0:
        return RootResult(a, 0.0, (a, a), 0, n_eval, "exact")
    if fb == 0.0:
        return RootResult(b, 0.0, (b, b), 0, n_eval, "exact")
    if (fa > 0) == (fb > 0):
        raise BracketError(f"no sign change on [{a}, {b}]: f={fa:.6g}, {fb:.6g}")
    c, fc = a, fa
    d = e = b - a
    history = []
    for it in range(1, max_iter + 1):
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol = 0.5 * (xtol + rtol * abs(b))
        m = 0.5 * (c - b)
        if abs(fb) <= ftol:
            return RootResult(b, fb, (min(b, c), max(b, c)), it - 1, n_eval, "ftol", history)
        if abs(m) <= tol:
            return RootResult(b, fb, (min(b, c), max(b, c)), it - 1, n_eval, "xtol", history)
        if abs(e) >= tol and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p, q = 2 * m * s, 1 - s
            else:
                q, r = fa / fc, fb / fc
                p = s * (2 * m * q * (q - r) - (b - a) * (r - 1))
                q = (q - 1) * (r - 1) * (s - 1)
            if p > 0:
                q = -q
            p = abs(p)
            if 2 * p < min(3 * m * q - abs(tol * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m
        a, fa = b, fb
        b = b + d if abs(d) > tol else b + math.copysign(tol, m)
        # stay strictly inside the original bracket
        b = min(max(b, min(lo, hi)), max(lo, hi))
        fb = f(b)
        n_eval += 1
        history.append((b, fb))
        if not np.isfinite(fb):
            raise ConvergenceError(f"function became non-finite at x={b}")
        if fb == 0.0:
            return RootResult(b, 0.0, (b, b), it, n_eval, "exact", history)
    raise ConvergenceError(f"Brent iteration did not converge in {max_iter} iterations")
