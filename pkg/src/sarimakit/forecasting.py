"""Point forecasts with psi-weight intervals, one-step holdout ledger, MAPE."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import AlignmentError, ArgumentError, DomainError
from .estimate import FittedModel
from .kalman import forecast_states
from .sarima import differencing_polynomial, expand_polynomials, filter_polys, lag_weights
from .series import (TimeSeries, apply_differences, box_cox, format_label, integrate,
                     inv_box_cox)
from .special import normal_quantile


@dataclass
class ForecastSet:
    origin: tuple
    period: int
    level: float
    points: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    psi: np.ndarray  # psi_0..psi_{h-1}
    working_points: np.ndarray
    working_se: np.ndarray
    lam: float | None = None

    @property
    def horizon(self) -> int:
        return int(self.points.size)

    @property
    def labels(self) -> list[tuple]:
        ts = TimeSeries([0.0], self.origin, self.period)
        return [ts.label(j) for j in range(self.horizon)]

    def rows(self) -> list[dict]:
        return [{"date": format_label(lab, self.period), "year": lab[0], "month": lab[1],
                 "forecast": float(p), "lower": float(lo), "upper": float(hi)}
                for lab, p, lo, hi in zip(self.labels, self.points, self.lower, self.upper)]

    def to_dict(self) -> dict:
        return {"origin": list(self.origin), "period": self.period, "level": self.level,
                "lambda": self.lam, "rows": self.rows(), "psi": [float(x) for x in self.psi],
                "working_se": [float(x) for x in self.working_se]}


@dataclass
class HoldoutRow:
    label: tuple
    actual: float
    forecast: float
    error: float


@dataclass
class HoldoutLedger:
    rows: list = field(default_factory=list)
    period: int = 12

    @property
    def mape(self) -> float:
        return mape(self)

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error for r in self.rows])

    def to_dict(self) -> dict:
        return {
            "rows": [{"date": format_label(r.label, self.period), "year": r.label[0],
                      "month": r.label[1], "actual": r.actual, "forecast": r.forecast,
                      "error": r.error} for r in self.rows],
            "mape": self.mape,
        }


def ledger_from_columns(labels, actual, forecast, period: int = 12) -> HoldoutLedger:
    rows = [HoldoutRow(tuple(lab), float(a), float(f), float(a) - float(f))
            for lab, a, f in zip(labels, actual, forecast)]
    return HoldoutLedger(rows, period)


def mape(ledger) -> float:
    """Mean absolute percentage error, in percent, with actuals as denominators."""
    rows = ledger.rows if isinstance(ledger, HoldoutLedger) else ledger
    if not rows:
        raise ArgumentError("MAPE of an empty ledger")
    total = 0.0
    for i, r in enumerate(rows):
        if r.actual == 0:
            raise DomainError(f"MAPE undefined: actual value is zero at row {i + 1}", index=i)
        total += abs(r.error / r.actual)
    return 100.0 * total / len(rows)


# -- psi weights -------------------------------------------------------------

def full_ar_polynomial(model: FittedModel) -> np.ndarray:
    ar, _ = expand_polynomials(model.spec, model.coeffs)
    return np.convolve(ar, differencing_polynomial(model.spec))


def psi_weights(model: FittedModel, h: int) -> np.ndarray:
    """psi_0 .. psi_{h-1} of ma(B) / (ar(B) (1-B)^d (1-B^s)^D); psi_0 = 1."""
    if h < 1:
        raise ArgumentError(f"horizon must be >= 1, got {h}")
    _, ma = expand_polynomials(model.spec, model.coeffs)
    impulse = np.zeros(h)
    impulse[0] = 1.0
    return lfilter(ma, full_ar_polynomial(model), impulse)


# -- forecasting ---------------------------------------------------------------

def _working(model: FittedModel, values) -> np.ndarray:
    lam = model.transform.lam
    return np.asarray(values, float) if lam is None else box_cox(np.asarray(values, float), lam)


def _back(model: FittedModel, z) -> np.ndarray:
    lam = model.transform.lam
    return np.asarray(z, float) if lam is None else inv_box_cox(np.asarray(z, float), lam)


def _differenced(model: FittedModel, z):
    spec = model.spec
    w, record = apply_differences(z, [(1, spec.d), (spec.s, spec.D)])
    return np.asarray(w) - model.mean, record


def forecast(model: FittedModel, h: int, level: float = 0.95) -> ForecastSet:
    """h-step forecasts from the end of the training sample.

    Points iterate the model with future shocks at zero (Kalman predicted
    state, then undifferenced); the interval half-width at step j is
    ``z * sigma * sqrt(psi_0^2 + ... + psi_{j-1}^2)`` on the working scale,
    and points and endpoints are back-transformed one by one.
    """
    if int(h) != h or h < 1:
        raise ArgumentError(f"horizon must be a positive integer, got {h!r}")
    if not 0.0 < level < 1.0:
        raise ArgumentError(f"level must lie in (0, 1), got {level!r}")
    h = int(h)
    w, record = _differenced(model, model.history)
    ar, ma = expand_polynomials(model.spec, model.coeffs)
    res = filter_polys(ar, ma, w)
    phi, theta = lag_weights(ar, ma)
    w_hat, _ = forecast_states(phi, theta, res.a_next, res.P_next, h)
    if model.spec.n_cond:
        z_hat = integrate(np.concatenate([w, w_hat]) + model.mean, record)[-h:]
    else:
        z_hat = w_hat + model.mean
    psi = psi_weights(model, h)
    se = math.sqrt(model.coeffs.sigma2) * np.sqrt(np.cumsum(psi ** 2))
    zq = normal_quantile(0.5 * (1.0 + level))
    return ForecastSet(
        origin=model.training.next_label,
        period=model.period,
        level=level,
        points=_back(model, z_hat),
        lower=_back(model, z_hat - zq * se),
        upper=_back(model, z_hat + zq * se),
        psi=psi,
        working_points=z_hat,
        working_se=se,
        lam=model.transform.lam,
    )


def one_step_predictions(model: FittedModel, test: TimeSeries) -> np.ndarray:
    """One-step-ahead forecasts (original units) for each point of ``test``.

    Coefficients stay frozen; the filter state absorbs every actual before
    the next forecast is made.
    """
    train = model.training
    if test.period != train.period or test.start != train.next_label:
        raise AlignmentError(
            f"holdout starts {format_label(test.start, test.period)}, expected "
            f"{format_label(train.next_label, train.period)}")
    z_full = np.concatenate([model.history, _working(model, test.values)])
    w, _ = _differenced(model, z_full)
    ar, ma = expand_polynomials(model.spec, model.coeffs)
    res = filter_polys(ar, ma, w)
    m = len(test)
    z_hat = z_full[-m:] - res.v[-m:]
    return _back(model, z_hat)


def one_step_holdout(model: FittedModel, test: TimeSeries) -> HoldoutLedger:
    preds = one_step_predictions(model, test)
    return ledger_from_columns([test.label(i) for i in range(len(test))], test.values, preds,
                               test.period)
