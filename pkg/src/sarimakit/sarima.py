"""SARIMA model specification, lag polynomials, simulation and objectives.

Sign convention, used everywhere in the package::

    (1 - sum phi_i B^i)(1 - sum Phi_j B^{js}) w_t = (1 + sum theta_i B^i)(1 + sum Theta_j B^{js}) e_t

where ``w`` is the differenced series ``(1-B)^d (1-B^s)^D z``. A positive
``Theta_1`` therefore adds ``+Theta_1 e_{t-s}`` on the right-hand side.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import ArgumentError, ValidityError
from .kalman import kalman_filter
from .series import TimeSeries

_LOG2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, order=True)
class ModelSpec:
    p: int = 0
    d: int = 0
    q: int = 0
    P: int = 0
    D: int = 0
    Q: int = 0
    s: int = 1

    def __post_init__(self):
        for name in ("p", "d", "q", "P", "D", "Q"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ArgumentError(f"order {name} must be a nonnegative integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if int(self.s) != self.s or self.s < 1:
            raise ArgumentError(f"period s must be >= 1, got {self.s!r}")
        object.__setattr__(self, "s", int(self.s))
        if self.P + self.D + self.Q > 0 and self.s < 2:
            raise ArgumentError("seasonal orders need a period s >= 2")

    @classmethod
    def parse(cls, text: str) -> "ModelSpec":
        """``"p,d,q,P,D,Q,s"`` (the seasonal part may be omitted)."""
        parts = [x for x in re.split(r"[,\s]+", text.strip()) if x]
        if len(parts) not in (3, 7):
            raise ArgumentError(f"spec must be 'p,d,q' or 'p,d,q,P,D,Q,s', got {text!r}")
        try:
            nums = [int(x) for x in parts]
        except ValueError:
            raise ArgumentError(f"spec must contain integers, got {text!r}") from None
        return cls(*nums)

    @property
    def is_empty(self) -> bool:
        """No ARMA terms and no differencing: white noise around a fitted mean."""
        return self.n_arma == 0 and self.d + self.D == 0

    @property
    def n_arma(self) -> int:
        return self.p + self.q + self.P + self.Q

    @property
    def n_cond(self) -> int:
        """Observations consumed by differencing."""
        return self.d + self.D * self.s

    @property
    def names(self) -> list[str]:
        return ([f"ar{i}" for i in range(1, self.p + 1)] + [f"ma{i}" for i in range(1, self.q + 1)]
                + [f"sar{i}" for i in range(1, self.P + 1)] + [f"sma{i}" for i in range(1, self.Q + 1)])

    def __str__(self):
        if self.P + self.D + self.Q == 0:
            return f"ARIMA({self.p},{self.d},{self.q})"
        return f"SARIMA({self.p},{self.d},{self.q})x({self.P},{self.D},{self.Q})[{self.s}]"

    def to_list(self) -> list[int]:
        return [self.p, self.d, self.q, self.P, self.D, self.Q, self.s]


@dataclass(frozen=True)
class CoefficientSet:
    phi: tuple = ()
    theta: tuple = ()
    Phi: tuple = ()
    Theta: tuple = ()
    sigma2: float = 1.0

    def __post_init__(self):
        for name in ("phi", "theta", "Phi", "Theta"):
            object.__setattr__(self, name, tuple(float(x) for x in np.atleast_1d(getattr(self, name))))
        if not self.sigma2 > 0:
            raise ArgumentError(f"sigma2 must be positive, got {self.sigma2!r}")
        object.__setattr__(self, "sigma2", float(self.sigma2))

    def vector(self) -> np.ndarray:
        return np.array(self.phi + self.theta + self.Phi + self.Theta, dtype=float)

    @classmethod
    def from_vector(cls, spec: ModelSpec, x, sigma2: float = 1.0) -> "CoefficientSet":
        x = np.asarray(x, dtype=float)
        if x.size != spec.n_arma:
            raise ArgumentError(f"{spec} has {spec.n_arma} coefficients, got {x.size}")
        i = np.cumsum([0, spec.p, spec.q, spec.P, spec.Q])
        return cls(x[i[0]:i[1]], x[i[1]:i[2]], x[i[2]:i[3]], x[i[3]:i[4]], sigma2)

    def check(self, spec: ModelSpec) -> None:
        got = (len(self.phi), len(self.theta), len(self.Phi), len(self.Theta))
        want = (spec.p, spec.q, spec.P, spec.Q)
        if got != want:
            raise ArgumentError(f"coefficient dimensions {got} do not match {spec} orders {want}")

    def to_dict(self) -> dict:
        return {"phi": list(self.phi), "theta": list(self.theta), "Phi": list(self.Phi),
                "Theta": list(self.Theta), "sigma2": self.sigma2}

    @classmethod
    def from_dict(cls, d: dict) -> "CoefficientSet":
        return cls(d.get("phi", ()), d.get("theta", ()), d.get("Phi", ()), d.get("Theta", ()),
                   d.get("sigma2", 1.0))


# -- polynomials ---------------------------------------------------------------

def _seasonal(coefs, s, sign):
    out = np.zeros(len(coefs) * s + 1)
    out[0] = 1.0
    out[s::s] = sign * np.asarray(coefs, dtype=float)
    return out


def expand_polynomials(spec: ModelSpec, coeffs: CoefficientSet):
    """Multiplied-out AR and MA polynomials in B.

    ``ar[k]`` is the coefficient of ``B**k`` in
    ``(1 - sum phi_i B^i)(1 - sum Phi_j B^{js})``, so the autoregressive lag
    weights are ``-ar[1:]``; ``ma`` likewise with plus signs.
    """
    coeffs.check(spec)
    ar = np.convolve(_seasonal(coeffs.phi, 1, -1.0), _seasonal(coeffs.Phi, spec.s, -1.0))
    ma = np.convolve(_seasonal(coeffs.theta, 1, 1.0), _seasonal(coeffs.Theta, spec.s, 1.0))
    return ar, ma


def differencing_polynomial(spec: ModelSpec) -> np.ndarray:
    poly = np.array([1.0])
    for _ in range(spec.d):
        poly = np.convolve(poly, [1.0, -1.0])
    seas = np.zeros(spec.s + 1)
    seas[0], seas[-1] = 1.0, -1.0
    for _ in range(spec.D):
        poly = np.convolve(poly, seas)
    return poly


def roots_outside(poly, margin: float = 1e-8) -> bool:
    """True when every root of ``poly`` (coefficients in increasing powers) has modulus > 1 + margin."""
    c = np.asarray(poly, dtype=float)
    # negligible top coefficients only add roots near infinity
    k = c.size
    while k > 1 and abs(c[k - 1]) <= 1e-12 * abs(c[0]):
        k -= 1
    c = c[:k]
    if c.size <= 1:
        return True
    roots = np.roots(c[::-1])
    return bool(np.all(np.abs(roots) > 1.0 + margin))


def is_stationary(coeffs: CoefficientSet) -> bool:
    return (roots_outside(np.r_[1.0, -np.asarray(coeffs.phi)])
            and roots_outside(np.r_[1.0, -np.asarray(coeffs.Phi)]))


def is_invertible(coeffs: CoefficientSet) -> bool:
    return (roots_outside(np.r_[1.0, np.asarray(coeffs.theta)])
            and roots_outside(np.r_[1.0, np.asarray(coeffs.Theta)]))


def check_valid(coeffs: CoefficientSet) -> None:
    if not is_stationary(coeffs):
        raise ValidityError("AR polynomial has a root on or inside the unit circle")
    if not is_invertible(coeffs):
        raise ValidityError("MA polynomial has a root on or inside the unit circle")


def lag_weights(ar, ma):
    """AR and MA lag weights (phi, theta) of the expanded polynomials."""
    return -np.asarray(ar[1:], dtype=float), np.asarray(ma[1:], dtype=float)


# -- simulation ---------------------------------------------------------------

def simulate(spec: ModelSpec, coeffs: CoefficientSet, n: int, seed: int = 0,
             burn_in: int | None = None, start=(2000, 1)) -> TimeSeries:
    """Gaussian sample path: ARMA part with a burn-in, then integrated d and D times."""
    check_valid(coeffs)
    ar, ma = expand_polynomials(spec, coeffs)
    if burn_in is None:
        burn_in = 10 * max(ar.size - 1, ma.size - 1, 1)
    rng = np.random.default_rng(seed)
    e = rng.normal(0.0, math.sqrt(coeffs.sigma2), n + burn_in)
    w = lfilter(ma, ar, e)[burn_in:]
    for _ in range(spec.d):
        w = np.cumsum(w)
    for _ in range(spec.D):
        x = w.copy()
        for t in range(spec.s, n):
            x[t] += x[t - spec.s]
        w = x
    return TimeSeries(w, start, spec.s if spec.s > 1 else 12)


# -- objectives -------------------------------------------------------------------

def _values(series):
    return np.asarray(getattr(series, "values", series), dtype=float)


def css_residuals(ar, ma, w) -> np.ndarray:
    """Innovations with pre-sample values and innovations fixed at zero."""
    return lfilter(ar, ma, w)


def css_objective(spec: ModelSpec, coeffs: CoefficientSet, series) -> float:
    ar, ma = expand_polynomials(spec, coeffs)
    e = css_residuals(ar, ma, _values(series))
    return float(e @ e)


def filter_polys(ar, ma, w, **kw):
    phi, theta = lag_weights(ar, ma)
    return kalman_filter(phi, theta, w, **kw)


def exact_loglik(spec: ModelSpec, coeffs: CoefficientSet, series) -> float:
    """Exact Gaussian log-likelihood of the (already differenced) series."""
    check_valid(coeffs)
    ar, ma = expand_polynomials(spec, coeffs)
    res = filter_polys(ar, ma, _values(series))
    s2 = coeffs.sigma2
    return float(-0.5 * np.sum(_LOG2PI + np.log(s2 * res.F) + res.v ** 2 / (s2 * res.F)))


def concentrated_loglik(ar, ma, w) -> tuple[float, float]:
    """Log-likelihood with sigma^2 at its closed-form maximiser; returns ``(loglik, sigma2)``."""
    res = filter_polys(ar, ma, w)
    n = w.size
    s2 = float(np.sum(res.v ** 2 / res.F)) / n
    ll = -0.5 * (n * (_LOG2PI + math.log(s2) + 1.0) + float(np.sum(np.log(res.F))))
    return ll, s2
