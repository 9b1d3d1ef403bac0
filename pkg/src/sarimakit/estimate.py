"""Two-stage SARIMA estimation: conditional sum of squares, then exact ML.

Both stages run Nelder-Mead over unconstrained parameters. Each AR-type
factor (nonseasonal AR, seasonal AR) is reached through its partial
autocorrelations, ``pacf = tanh(u)``, so every trial point is stationary;
MA factors use the same map with the sign flipped so every trial point is
invertible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .errors import ConvergenceError, LengthError, NumericError
from .sarima import (CoefficientSet, ModelSpec, check_valid, concentrated_loglik,
                     css_residuals, expand_polynomials, filter_polys)
from .series import TimeSeries, TransformRecord, _lambda_value, box_cox
from .series import transform as apply_transform
from .special import normal_sf

_PACF_LIMIT = 1.0 - 1e-12
_BAD = 1e300


# -- reparameterisation -------------------------------------------------------

def pacf_to_ar(r) -> np.ndarray:
    """AR lag weights of the stationary process with partial autocorrelations ``r``."""
    phi = np.zeros(0)
    for rk in np.asarray(r, dtype=float):
        phi = np.concatenate([phi - rk * phi[::-1], [rk]])
    return phi


def ar_to_pacf(phi) -> np.ndarray:
    """Inverse of :func:`pacf_to_ar` (step-down recursion)."""
    phi = np.asarray(phi, dtype=float).copy()
    r = np.zeros(phi.size)
    for k in range(phi.size - 1, -1, -1):
        rk = phi[k]
        r[k] = rk
        if k == 0:
            break
        if abs(rk) >= 1.0:
            raise NumericError("coefficients outside the stationary region")
        phi = (phi[:k] + rk * phi[:k][::-1]) / (1.0 - rk * rk)
    return r


def constrain(spec: ModelSpec, u) -> np.ndarray:
    """Unconstrained vector -> coefficient vector (phi, theta, Phi, Theta)."""
    u = np.asarray(u, dtype=float)
    i = np.cumsum([0, spec.p, spec.q, spec.P, spec.Q])
    out = []
    for j, sign in enumerate((1.0, -1.0, 1.0, -1.0)):
        block = np.clip(np.tanh(u[i[j]:i[j + 1]]), -_PACF_LIMIT, _PACF_LIMIT)
        out.append(sign * pacf_to_ar(block))
    return np.concatenate(out) if out else np.zeros(0)


def unconstrain(spec: ModelSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    i = np.cumsum([0, spec.p, spec.q, spec.P, spec.Q])
    out = []
    for j, sign in enumerate((1.0, -1.0, 1.0, -1.0)):
        r = np.clip(ar_to_pacf(sign * x[i[j]:i[j + 1]]), -_PACF_LIMIT, _PACF_LIMIT)
        out.append(np.arctanh(r))
    return np.concatenate(out) if out else np.zeros(0)


# -- fitted model -------------------------------------------------------------

@dataclass
class FittedModel:
    spec: ModelSpec
    coeffs: CoefficientSet
    std_errors: tuple | None
    z_values: tuple | None
    p_values: tuple | None
    loglik: float
    aic: float
    bic: float
    residuals: np.ndarray
    transform: TransformRecord
    history: np.ndarray  # working-scale (Box-Cox, undifferenced) training values
    start: tuple
    period: int
    mean: float = 0.0
    converged: bool = True
    n_evals: int = 0
    notes: list = field(default_factory=list)

    @property
    def names(self) -> list[str]:
        return self.spec.names

    @property
    def n_obs(self) -> int:
        return int(self.history.size)

    @property
    def n_used(self) -> int:
        return self.n_obs - self.spec.n_cond

    @property
    def innovations(self) -> np.ndarray:
        """Residuals after the leading positions consumed by differencing."""
        return self.residuals[self.spec.n_cond:]

    @property
    def training(self) -> TimeSeries:
        return TimeSeries(self.history, self.start, self.period)

    @property
    def lam(self):
        return self.transform.lam

    def coef_rows(self) -> list[dict]:
        rows = []
        est = self.coeffs.vector()
        for j, name in enumerate(self.names):
            rows.append({
                "name": name,
                "estimate": float(est[j]),
                "std_error": None if self.std_errors is None else self.std_errors[j],
                "z_value": None if self.z_values is None else self.z_values[j],
                "p_value": None if self.p_values is None else self.p_values[j],
            })
        return rows

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_list(),
            "coefficients": self.coeffs.to_dict(),
            "names": self.names,
            "std_errors": None if self.std_errors is None else list(self.std_errors),
            "z_values": None if self.z_values is None else list(self.z_values),
            "p_values": None if self.p_values is None else list(self.p_values),
            "loglik": self.loglik,
            "aic": self.aic,
            "bic": self.bic,
            "sigma2": self.coeffs.sigma2,
            "mean": self.mean,
            "converged": self.converged,
            "n_evals": self.n_evals,
            "notes": list(self.notes),
            "transform": self.transform.to_dict(),
            "series": {"start": list(self.start), "period": self.period,
                       "values": [float(v) for v in self.history]},
            "residuals": [float(v) for v in self.residuals],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FittedModel":
        spec = ModelSpec(*d["spec"])
        opt = lambda k: None if d.get(k) is None else tuple(d[k])  # noqa: E731
        return cls(
            spec=spec,
            coeffs=CoefficientSet.from_dict(d["coefficients"]),
            std_errors=opt("std_errors"),
            z_values=opt("z_values"),
            p_values=opt("p_values"),
            loglik=d["loglik"],
            aic=d["aic"],
            bic=d["bic"],
            residuals=np.asarray(d["residuals"], dtype=float),
            transform=TransformRecord.from_dict(d["transform"]),
            history=np.asarray(d["series"]["values"], dtype=float),
            start=tuple(d["series"]["start"]),
            period=int(d["series"]["period"]),
            mean=d.get("mean", 0.0),
            converged=d.get("converged", True),
            n_evals=d.get("n_evals", 0),
            notes=list(d.get("notes", [])),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "FittedModel":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"model file not found: {path}")
        return cls.from_dict(json.loads(path.read_text()))


# -- fitting -----------------------------------------------------------------

def _nelder_mead(fun, x0, step, max_iter, xatol, fatol):
    x0 = np.asarray(x0, dtype=float)
    k = x0.size
    simplex = np.vstack([x0] + [x0 + step * np.eye(k)[i] for i in range(k)])
    return minimize(fun, x0, method="Nelder-Mead",
                    options={"initial_simplex": simplex, "maxiter": max_iter,
                             "xatol": xatol, "fatol": fatol})


def hessian(fun, x, step: float = 1e-4) -> np.ndarray:
    """Central finite-difference Hessian."""
    x = np.asarray(x, dtype=float)
    k = x.size
    H = np.zeros((k, k))
    f0 = fun(x)
    E = np.eye(k) * step
    for i in range(k):
        H[i, i] = (fun(x + E[i]) - 2.0 * f0 + fun(x - E[i])) / step ** 2
        for j in range(i):
            H[i, j] = H[j, i] = (fun(x + E[i] + E[j]) - fun(x + E[i] - E[j])
                                 - fun(x - E[i] + E[j]) + fun(x - E[i] - E[j])) / (4.0 * step ** 2)
    return H


def gradient(fun, x, step: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    E = np.eye(x.size) * step
    return np.array([(fun(x + E[i]) - fun(x - E[i])) / (2.0 * step) for i in range(x.size)])


def min_length(spec: ModelSpec) -> int:
    return 3 * (spec.p + spec.q + spec.P * spec.s + spec.Q * spec.s) + spec.n_cond + 1


def negloglik_fn(spec: ModelSpec, w: np.ndarray):
    """Negative concentrated log-likelihood as a function of the coefficient vector."""
    def f(x):
        try:
            c = CoefficientSet.from_vector(spec, x)
            check_valid(c)
            ar, ma = expand_polynomials(spec, c)
            return -concentrated_loglik(ar, ma, w)[0]
        except (NumericError, np.linalg.LinAlgError, FloatingPointError):
            return _BAD
    return f


def fit(series, spec: ModelSpec, transform=None, *, max_iter: int = 2000,
        tol: float = 1e-8) -> FittedModel:
    """Estimate ``spec`` on ``series`` (original units).

    ``transform`` is a Box-Cox exponent, ``"log"``, ``None`` (no transform)
    or a :class:`TransformRecord` whose ``lam`` is reused. The CSS minimum
    seeds an exact-likelihood Nelder-Mead search with sigma^2 concentrated
    out; standard errors come from a finite-difference Hessian of the
    negative log-likelihood in the original coefficients.
    """
    if not isinstance(series, TimeSeries):
        series = TimeSeries(series)
    lam = transform.lam if isinstance(transform, TransformRecord) else transform
    lam = None if lam is None else _lambda_value(lam)
    if len(series) < min_length(spec):
        raise LengthError(f"{spec} needs at least {min_length(spec)} observations, got {len(series)}")
    w_ts, record = apply_transform(series, lam, spec.d, spec.D, spec.s)
    history = series.values if lam is None else box_cox(series.values, lam)
    w = np.array(w_ts.values)
    mean = 0.0
    if spec.d + spec.D == 0:
        mean = float(w.mean())
        w = w - mean
    n = w.size
    k = spec.n_arma
    notes = []
    n_evals = 0
    converged = True

    if k == 0:
        x_hat = np.zeros(0)
    else:
        def css(u):
            c = constrain(spec, u)
            ar, ma = expand_polynomials(spec, CoefficientSet.from_vector(spec, c))
            e = css_residuals(ar, ma, w)
            return float(e @ e)

        res_css = _nelder_mead(css, np.zeros(k), 0.5, max_iter, 1e-4, 1e-10 * max(css(np.zeros(k)), 1e-300))
        n_evals += res_css.nfev

        def nll_u(u):
            try:
                c = CoefficientSet.from_vector(spec, constrain(spec, u))
                ar, ma = expand_polynomials(spec, c)
                return -concentrated_loglik(ar, ma, w)[0]
            except (NumericError, np.linalg.LinAlgError, FloatingPointError):
                return _BAD

        u0 = res_css.x
        if nll_u(u0) >= _BAD:
            notes.append("CSS start infeasible for exact likelihood; restarted from zero")
            u0 = np.zeros(k)
        best = None
        step = 0.1
        for _ in range(3):
            res = _nelder_mead(nll_u, u0, step, max_iter, 1e-7, tol)
            n_evals += res.nfev
            improved = best is None or res.fun < best.fun - tol
            if best is None or res.fun < best.fun:
                best = res
            converged = bool(res.success)
            if not improved:
                break
            u0, step = best.x, 0.02
        if not converged:
            x_best = constrain(spec, best.x)
            raise ConvergenceError(f"Nelder-Mead did not converge within {max_iter} iterations for {spec}",
                                   best=CoefficientSet.from_vector(spec, x_best))
        x_hat = constrain(spec, best.x)

    coeffs0 = CoefficientSet.from_vector(spec, x_hat)
    ar, ma = expand_polynomials(spec, coeffs0)
    filt = filter_polys(ar, ma, w)
    sigma2 = float(np.sum(filt.v ** 2 / filt.F)) / n
    loglik = -0.5 * (n * (math.log(2.0 * math.pi * sigma2) + 1.0) + float(np.sum(np.log(filt.F))))
    coeffs = CoefficientSet.from_vector(spec, x_hat, sigma2)

    std_errors = z_values = p_values = None
    if k:
        H = hessian(negloglik_fn(spec, w), x_hat)
        n_evals += 2 * k * k + 1
        try:
            if not np.all(np.isfinite(H)) or np.abs(H).max() >= _BAD / 10:
                raise np.linalg.LinAlgError("Hessian step left the admissible region")
            np.linalg.cholesky(H)
            cov = np.linalg.inv(H)
            se = np.sqrt(np.diag(cov))
            std_errors = tuple(float(v) for v in se)
            z_values = tuple(float(v) for v in x_hat / se)
            p_values = tuple(float(min(1.0, 2.0 * normal_sf(abs(z)))) for z in z_values)
        except np.linalg.LinAlgError:
            notes.append("Hessian not positive definite; standard errors unavailable")

    residuals = np.zeros(len(series))
    residuals[spec.n_cond:] = filt.v / np.sqrt(filt.F)
    n_par = k + 1
    return FittedModel(
        spec=spec,
        coeffs=coeffs,
        std_errors=std_errors,
        z_values=z_values,
        p_values=p_values,
        loglik=float(loglik),
        aic=float(-2.0 * loglik + 2.0 * n_par),
        bic=float(-2.0 * loglik + math.log(n) * n_par),
        residuals=residuals,
        transform=record,
        history=np.array(history, dtype=float),
        start=series.start,
        period=series.period,
        mean=mean,
        converged=converged,
        n_evals=int(n_evals),
        notes=notes,
    )
