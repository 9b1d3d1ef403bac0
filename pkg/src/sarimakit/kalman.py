"""Kalman filter for a zero-mean ARMA process in Harvey's state-space form.

The state has dimension ``r = max(p, q + 1)`` for the expanded (seasonal
factors multiplied out) lag polynomials::

    alpha[t+1] = T alpha[t] + R eps[t+1],   y[t] = alpha[t][0]

with ``T`` the companion matrix carrying the AR weights in its first column
and ``R = (1, theta_1, ..., theta_{r-1})``. Everything is computed with unit
innovation variance so that sigma^2 can be concentrated out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_discrete_lyapunov
from scipy.signal import lfilter

from .errors import ConditioningError

try:  # optional accelerator; the numpy path below is the reference
    import numba
except ImportError:  # pragma: no cover
    numba = None


@dataclass
class FilterResult:
    v: np.ndarray  # one-step prediction errors
    F: np.ndarray  # their variances (unit sigma^2)
    a_next: np.ndarray  # predicted state for the step after the sample
    P_next: np.ndarray
    steady_from: int | None  # first index handled by the steady-state recursion


def harvey_system(phi: np.ndarray, theta: np.ndarray):
    """``(T, R)`` for AR lag weights ``phi`` and MA lag weights ``theta``."""
    r = max(phi.size, theta.size + 1, 1)
    T = np.zeros((r, r))
    T[: phi.size, 0] = phi
    T[np.arange(r - 1), np.arange(1, r)] = 1.0
    R = np.zeros(r)
    R[0] = 1.0
    R[1: theta.size + 1] = theta
    return T, R


def stationary_covariance(T: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Solve ``P = T P T' + R R'`` (unconditional state covariance)."""
    RR = np.outer(R, R)
    if T.shape[0] == 1:
        denom = 1.0 - T[0, 0] ** 2
        if denom <= 1e-12:
            raise ConditioningError("AR root on or inside the unit circle")
        return RR / denom
    try:
        P = solve_discrete_lyapunov(T, RR)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConditioningError(f"Lyapunov solve failed: {exc}") from exc
    P = 0.5 * (P + P.T)
    if not np.all(np.isfinite(P)) or P[0, 0] <= 0:
        raise ConditioningError("stationary covariance is not finite/positive")
    resid = np.abs(T @ P @ T.T + RR - P).max()
    if resid > 1e-6 * max(1.0, np.abs(P).max()):
        raise ConditioningError(f"Lyapunov solution inaccurate (residual {resid:.2e})")
    return P


def kalman_filter(phi, theta, y, a0=None, P0=None, tol: float = 1e-11, steady: bool = True,
                  backend: str | None = None) -> FilterResult:
    """Run the filter over ``y``; ``P0`` defaults to the stationary covariance.

    Once the predicted covariance equals ``R R'`` to within ``tol`` the state
    is known up to the current shock, the gain is ``R`` and the remaining
    innovations follow ``ma(B) v = ar(B) y`` started from the current state.

    ``backend`` is ``"numba"`` (compiled loop, used when numba is importable)
    or ``"numpy"``; both produce the same numbers to rounding.
    """
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    T, R = harvey_system(phi, theta)
    r = T.shape[0]
    a = np.zeros(r) if a0 is None else np.array(a0, dtype=float)
    P = stationary_covariance(T, R) if P0 is None else np.array(P0, dtype=float)
    if backend is None:
        backend = "numba" if numba is not None else "numpy"
    if backend == "numba":
        if numba is None:
            raise RuntimeError("numba backend requested but numba is not installed")
        phi_r = np.zeros(r)
        phi_r[: phi.size] = phi
        v, F, a, P, k = _filter_compiled(phi_r, R, y, a, np.ascontiguousarray(P), tol, steady)
        if k == -2:
            raise ConditioningError("nonpositive prediction variance")
        return FilterResult(v, F, a, P, None if k < 0 else int(k))
    return _filter_numpy(phi, theta, T, R, y, a, P, tol, steady)


def _filter_numpy(phi, theta, T, R, y, a, P, tol, steady) -> FilterResult:
    r = T.shape[0]
    RR = np.outer(R, R)
    n = y.size
    v = np.empty(n)
    F = np.empty(n)
    phi_r = np.zeros(r)
    phi_r[: phi.size] = phi
    steady_from = None
    outer = np.outer
    for t in range(n):
        if steady and t >= r and t % 8 == 0 and np.abs(P - RR).max() < tol:
            steady_from = t
            break
        f = P[0, 0]
        if not f > 0:
            raise ConditioningError(f"nonpositive prediction variance at t={t}")
        e = y[t] - a[0]
        v[t] = e
        F[t] = f
        p0 = P[0]
        au = a + p0 * (e / f)
        Pu = P - outer(p0, p0 / f)
        a = phi_r * au[0]
        a[:-1] += au[1:]
        TP = outer(phi_r, Pu[0])
        TP[:-1] += Pu[1:]
        P = outer(TP[:, 0], phi_r)
        P[:, :-1] += TP[:, 1:]
        P += RR
    if steady_from is not None:
        b = np.zeros(r + 1)
        b[0] = 1.0
        b[1: phi.size + 1] = -phi
        den = np.zeros(r + 1)
        den[0] = 1.0
        den[1: theta.size + 1] = theta
        tail, zf = lfilter(b, den, y[steady_from:], zi=-a)
        v[steady_from:] = tail
        F[steady_from:] = 1.0
        a = -zf
        P = RR.copy()
    return FilterResult(v, F, a, P, steady_from)


def _filter_loop(phi_r, R, y, a, P, tol, steady):
    # scalar loops: compiled by numba, never run interpreted
    r = phi_r.size
    n = y.size
    v = np.empty(n)
    F = np.empty(n)
    a = a.copy()
    P = P.copy()
    au = np.empty(r)
    Pu = np.empty((r, r))
    TP = np.empty((r, r))
    steady_from = -1
    for t in range(n):
        if steady and t >= r:
            dev = 0.0
            for i in range(r):
                for j in range(r):
                    d = abs(P[i, j] - R[i] * R[j])
                    if d > dev:
                        dev = d
            if dev < tol:
                steady_from = t
                break
        f = P[0, 0]
        if not f > 0:
            return v, F, a, P, -2
        e = y[t] - a[0]
        v[t] = e
        F[t] = f
        for i in range(r):
            au[i] = a[i] + P[0, i] * e / f
        for i in range(r):
            for j in range(r):
                Pu[i, j] = P[i, j] - P[i, 0] * P[0, j] / f
        for i in range(r):
            a[i] = phi_r[i] * au[0] + (au[i + 1] if i + 1 < r else 0.0)
        for i in range(r):
            for j in range(r):
                TP[i, j] = phi_r[i] * Pu[0, j] + (Pu[i + 1, j] if i + 1 < r else 0.0)
        for i in range(r):
            for j in range(r):
                P[i, j] = TP[i, 0] * phi_r[j] + (TP[i, j + 1] if j + 1 < r else 0.0) + R[i] * R[j]
    if steady_from >= 0:
        for t in range(steady_from, n):
            e = y[t] - a[0]
            v[t] = e
            F[t] = 1.0
            a0 = a[0] + e
            for i in range(r):
                nxt = a[i + 1] + R[i + 1] * e if i + 1 < r else 0.0
                a[i] = phi_r[i] * a0 + nxt
        for i in range(r):
            for j in range(r):
                P[i, j] = R[i] * R[j]
    return v, F, a, P, steady_from


if numba is not None:
    _filter_compiled = numba.njit(cache=True)(_filter_loop)
else:  # pragma: no cover
    _filter_compiled = None


def forecast_states(phi, theta, a_next, P_next, h: int):
    """Means and variances (unit sigma^2) of the next ``h`` observations."""
    T, R = harvey_system(np.asarray(phi, float), np.asarray(theta, float))
    RR = np.outer(R, R)
    a = np.array(a_next, dtype=float)
    P = np.array(P_next, dtype=float)
    mean = np.empty(h)
    var = np.empty(h)
    for j in range(h):
        mean[j] = a[0]
        var[j] = P[0, 0]
        a = T @ a
        P = T @ P @ T.T + RR
    return mean, var
