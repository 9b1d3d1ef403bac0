"""Formal tests: augmented Dickey-Fuller, Ljung-Box (and McLeod-Li), Shapiro-Wilk."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .correlogram import autocorrelations
from .errors import (ArgumentError, DegenerateError, LengthError, RankError)
from .special import chi_sq_sf, normal_quantile, normal_sf


@dataclass(frozen=True)
class TestReport:
    name: str
    statistic: float
    p_value: float
    params: dict = field(default_factory=dict)
    alpha: float | None = None
    # "<" or ">" when the p-value was clamped to the end of a lookup table
    p_bound: str | None = None

    __test__ = False  # keep pytest from collecting this class

    @property
    def reject(self) -> bool | None:
        return None if self.alpha is None else self.p_value <= self.alpha

    def p_text(self, digits: int = 4) -> str:
        if self.p_bound:
            return f"{self.p_bound}{self.p_value:.2f}"
        if self.p_value < 0.01:
            return "<0.01"
        return f"{self.p_value:.{digits}f}"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "p_text": self.p_text(),
            "p_bound": self.p_bound,
            "params": dict(self.params),
            "alpha": self.alpha,
            "reject": self.reject,
        }


# -- augmented Dickey-Fuller -------------------------------------------------

# Percentiles of the Dickey-Fuller t-ratio (Fuller 1976, Table 8.5.2, the
# tabulation behind Dickey & Fuller 1979). Rows: sample sizes; columns: the
# cumulative probabilities in _DF_PROBS. Infinity is represented by 1e5.
_DF_SIZES = np.array([25.0, 50.0, 100.0, 250.0, 500.0, 1e5])
_DF_PROBS = np.array([0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99])
_DF_TABLES = {
    "none": np.array([
        [-2.66, -2.26, -1.95, -1.60, 0.92, 1.33, 1.70, 2.16],
        [-2.62, -2.25, -1.95, -1.61, 0.91, 1.31, 1.66, 2.08],
        [-2.60, -2.24, -1.95, -1.61, 0.90, 1.29, 1.64, 2.03],
        [-2.58, -2.23, -1.95, -1.62, 0.89, 1.29, 1.63, 2.01],
        [-2.58, -2.23, -1.95, -1.62, 0.89, 1.28, 1.62, 2.00],
        [-2.58, -2.23, -1.95, -1.62, 0.89, 1.28, 1.62, 2.00],
    ]),
    "drift": np.array([
        [-3.75, -3.33, -3.00, -2.62, -0.37, 0.00, 0.34, 0.72],
        [-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66],
        [-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63],
        [-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62],
        [-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61],
        [-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60],
    ]),
    "trend": np.array([
        [-4.38, -3.95, -3.60, -3.24, -1.14, -0.80, -0.50, -0.15],
        [-4.15, -3.80, -3.50, -3.18, -1.19, -0.87, -0.58, -0.24],
        [-4.04, -3.73, -3.45, -3.15, -1.22, -0.90, -0.62, -0.28],
        [-3.99, -3.69, -3.43, -3.13, -1.23, -0.92, -0.64, -0.31],
        [-3.98, -3.68, -3.42, -3.13, -1.24, -0.93, -0.65, -0.32],
        [-3.96, -3.66, -3.41, -3.12, -1.25, -0.94, -0.66, -0.33],
    ]),
}


def schwert_lag(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def df_critical_values(regression: str, n: float) -> np.ndarray:
    """Critical values at ``_DF_PROBS`` interpolated linearly in sample size."""
    table = _DF_TABLES[regression]
    return np.array([np.interp(n, _DF_SIZES, table[:, j]) for j in range(table.shape[1])])


def df_pvalue(stat: float, regression: str, n: float) -> tuple[float, str | None]:
    """Interpolated p-value and clamp marker (``"<"``, ``">"`` or ``None``)."""
    cv = df_critical_values(regression, n)
    if stat < cv[0]:
        return float(_DF_PROBS[0]), "<"
    if stat > cv[-1]:
        return float(_DF_PROBS[-1]), ">"
    return float(np.interp(stat, cv, _DF_PROBS)), None


def _adf_design(y: np.ndarray, k: int, regression: str, skip: int):
    """Regressors and response of the ADF regression with ``k`` lags, first ``skip`` rows dropped."""
    dy = np.diff(y)
    m = dy.size - skip
    cols = [y[skip:-1]]
    cols += [dy[skip - i:dy.size - i] for i in range(1, k + 1)]
    if regression in ("drift", "trend"):
        cols.append(np.ones(m))
    if regression == "trend":
        cols.append(np.arange(skip + 1, skip + 1 + m, dtype=float))
    return np.column_stack(cols), dy[skip:]


def _select_lag(y: np.ndarray, k_max: int, regression: str) -> int:
    """Lag in 0..k_max minimising AIC, all fits on the same k_max-trimmed sample."""
    best_k, best_aic = 0, math.inf
    for k in range(k_max + 1):
        X, Y = _adf_design(y, k, regression, k_max)
        beta, *_ = np.linalg.lstsq(X, Y, rcond=None)
        ssr = float(np.sum((Y - X @ beta) ** 2))
        if ssr <= 0.0:
            continue
        aic = Y.size * math.log(ssr / Y.size) + 2 * X.shape[1]
        if aic < best_aic - 1e-12:
            best_k, best_aic = k, aic
    return best_k


def adf_test(series, regression: str = "drift", max_lag="auto", alpha: float | None = 0.05,
             autolag: str | None = "default") -> TestReport:
    """Augmented Dickey-Fuller unit-root test.

    Regresses the first difference on the lagged level, lagged differences
    and the deterministic terms of ``regression`` (``none``, ``drift`` =
    intercept, ``trend`` = intercept + time). The statistic is the t-ratio of
    the lagged level; the p-value is interpolated in the Dickey-Fuller tables
    using the number of first differences as sample size.

    ``max_lag="auto"`` takes the Schwert ceiling floor(12 (n/100)^0.25) and
    picks the lag below it by AIC; an integer ``max_lag`` is used as the lag
    itself. Pass ``autolag="aic"`` or ``None`` to override either default.
    """
    if regression not in _DF_TABLES:
        raise ArgumentError(f"regression must be one of {sorted(_DF_TABLES)}, got {regression!r}")
    y = np.asarray(getattr(series, "values", series), dtype=float)
    n = y.size
    auto = max_lag in (None, "auto")
    k_max = schwert_lag(n) if auto else int(max_lag)
    if autolag == "default":
        autolag = "aic" if auto else None
    if autolag not in ("aic", None):
        raise ArgumentError(f"autolag must be 'aic' or None, got {autolag!r}")
    if k_max < 0:
        raise ArgumentError(f"max_lag must be nonnegative, got {k_max}")
    if n < k_max + 10:
        raise LengthError(f"ADF with {k_max} lags needs at least {k_max + 10} observations, got {n}")
    k = _select_lag(y, k_max, regression) if autolag == "aic" else k_max
    X, Y = _adf_design(y, k, regression, k)
    m = Y.size
    if m <= X.shape[1] or np.linalg.matrix_rank(X) < X.shape[1]:
        raise RankError("ADF regression matrix is rank deficient")
    beta, *_ = np.linalg.lstsq(X, Y, rcond=None)
    resid = Y - X @ beta
    s2 = float(resid @ resid) / (m - X.shape[1])
    xtx_inv = np.linalg.inv(X.T @ X)
    se = math.sqrt(s2 * xtx_inv[0, 0])
    if se == 0.0:
        raise DegenerateError("ADF regression fits exactly; t-ratio undefined")
    stat = float(beta[0] / se)
    table_n = n - 1
    p, bound = df_pvalue(stat, regression, table_n)
    return TestReport("ADF", stat, p, {"regression": regression, "lags": k, "max_lag": k_max,
                                       "autolag": autolag, "nobs": m, "table_n": table_n},
                      alpha, bound)


# -- portmanteau ---------------------------------------------------------------

def ljung_box(residuals, h: int, fitdf: int = 0, alpha: float | None = 0.05,
              name: str = "LjungBox") -> TestReport:
    """Ljung-Box Q* = n(n+2) sum r_k^2/(n-k), referred to chi-square(h - fitdf)."""
    x = np.asarray(residuals, dtype=float)
    n = x.size
    h, fitdf = int(h), int(fitdf)
    if h < 1 or fitdf < 0 or h <= fitdf:
        raise ArgumentError(f"Ljung-Box needs h > fitdf >= 0, got h={h}, fitdf={fitdf}")
    if n <= h:
        raise LengthError(f"Ljung-Box with h={h} needs more than {h} residuals, got {n}")
    r = autocorrelations(x, h)[1:]
    k = np.arange(1, h + 1)
    q = float(n * (n + 2) * np.sum(r * r / (n - k)))
    df = h - fitdf
    return TestReport(name, q, chi_sq_sf(q, df), {"h": h, "fitdf": fitdf, "df": df, "n": n}, alpha)


def mcleod_li(residuals, h: int, alpha: float | None = 0.05) -> TestReport:
    """Ljung-Box on squared residuals; small p indicates conditional heteroscedasticity."""
    x = np.asarray(residuals, dtype=float)
    return ljung_box(x * x, h, 0, alpha, name="McLeodLi")


# -- Shapiro-Wilk (Royston 1995, AS R94) --------------------------------------

_SW_C1 = (0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056)
_SW_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_SW_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_SW_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_SW_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_SW_C6 = (-0.4803, -0.082676, 0.0030302)
_SW_G = (-2.273, 0.459)


def _poly(c, x):
    # c[0] + c[1] x + c[2] x^2 + ...
    out = 0.0
    for coef in reversed(c):
        out = out * x + coef
    return out


def shapiro_wilk_weights(n: int) -> np.ndarray:
    """Antisymmetric coefficient vector a_1..a_n (sum of squares 1)."""
    if n < 3:
        raise ArgumentError(f"Shapiro-Wilk needs n >= 3, got {n}")
    half = n // 2
    a = np.zeros(half)
    if n == 3:
        a[0] = math.sqrt(0.5)
    else:
        an25 = n + 0.25
        m = np.array([normal_quantile((i - 0.375) / an25) for i in range(1, half + 1)])
        summ2 = 2.0 * float(m @ m)
        ssumm2 = math.sqrt(summ2)
        rsn = 1.0 / math.sqrt(n)
        a1 = _poly(_SW_C1, rsn) - m[0] / ssumm2
        if n > 5:
            i1 = 2
            a2 = -m[1] / ssumm2 + _poly(_SW_C2, rsn)
            fac = math.sqrt((summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2)
                            / (1.0 - 2.0 * a1 ** 2 - 2.0 * a2 ** 2))
            a[1] = a2
        else:
            i1 = 1
            fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1 ** 2))
        a[0] = a1
        a[i1:] = -m[i1:] / fac
    full = np.zeros(n)
    full[:half] = -a
    full[n - half:] = a[::-1]
    return full


def shapiro_wilk(x, alpha: float | None = 0.05) -> TestReport:
    """Shapiro-Wilk W with Royston's normalising approximation for the p-value."""
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    if not 3 <= n <= 5000:
        raise ArgumentError(f"Shapiro-Wilk is defined for 3 <= n <= 5000, got n={n}")
    rng = x[-1] - x[0]
    if not rng > 1e-19 * max(1.0, abs(x[0])):
        raise DegenerateError("Shapiro-Wilk needs a sample with nonzero range")
    xs = (x - x.mean()) / rng
    a = shapiro_wilk_weights(n)
    w = float((a @ xs) ** 2 / (xs @ xs))
    w = min(w, 1.0)
    if n == 3:
        pw = (6.0 / math.pi) * (math.asin(math.sqrt(max(w, 0.75))) - math.pi / 3.0)
        return TestReport("ShapiroWilk", w, min(max(pw, 0.0), 1.0), {"n": n}, alpha)
    w1 = math.log(1.0 - w) if w < 1.0 else -math.inf
    if n <= 11:
        gamma = _poly(_SW_G, n)
        if w1 >= gamma:
            return TestReport("ShapiroWilk", w, 1e-99, {"n": n}, alpha)
        y = -math.log(gamma - w1)
        mean = _poly(_SW_C3, n)
        sd = math.exp(_poly(_SW_C4, n))
    else:
        y = w1
        xx = math.log(n)
        mean = _poly(_SW_C5, xx)
        sd = math.exp(_poly(_SW_C6, xx))
    p = 1.0 if y == -math.inf else normal_sf((y - mean) / sd)
    return TestReport("ShapiroWilk", w, p, {"n": n}, alpha)
