"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line verdict (printed in the terminal summary by
conftest.py) before asserting, so a failing criterion still reports what it
measured.
"""

import math
import time
import timeit

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
import scripted
from conftest import record
from sarimakit.correlogram import pacf
from sarimakit.estimate import fit
from sarimakit.forecasting import forecast, ledger_from_columns
from sarimakit.report import aic_table, coefficient_table, forecast_table, holdout_table
from sarimakit.sarima import CoefficientSet, ModelSpec, exact_loglik, simulate
from sarimakit.selection import (REJECTED_AIC_RANK, REJECTED_DIAGNOSTICS, REJECTED_INSIGNIFICANT,
                                 apply_gates, rank_by_aic)
from sarimakit.series import TimeSeries, box_cox, difference, integrate, inv_box_cox
from sarimakit.special import chi_sq_sf
from sarimakit.stattests import adf_test, shapiro_wilk

REF_SPEC = ModelSpec(2, 1, 0, 0, 0, 2, 12)
TRUTH = np.array(oracles.TABLE4_ESTIMATES)
SIGMA2 = 0.0019  # log scale; see the criterion 5 entry in the decisions ledger
MONTHS = [(2017, k) for k in range(1, 13)]


def table6_ledger():
    return ledger_from_columns(MONTHS, [r[0] for r in oracles.TABLE6], [r[1] for r in oracles.TABLE6])


def test_criterion_01_shapiro_wilk_on_table6_errors():
    errors = [r[2] for r in oracles.TABLE6]
    rep = shapiro_wilk(errors)
    runtime = min(timeit.repeat(lambda: shapiro_wilk(errors), number=1, repeat=50))
    w_ref, p_ref = oracles.TABLE7
    ok = abs(rep.statistic - w_ref) <= 5e-4 and abs(rep.p_value - p_ref) <= 5e-3 and runtime < 1e-3
    record(1, ok, f"W={rep.statistic:.5f} (0.8723±0.0005), p={rep.p_value:.5f} (0.0699±0.005), "
                  f"runtime={runtime * 1e3:.3f} ms (<1 ms)")
    assert ok


def test_criterion_02_table6_arithmetic_and_mape():
    ledger = table6_ledger()
    exact = all(round(row.error, 3) == printed[2] and row.error == row.actual - row.forecast
                for row, printed in zip(ledger.rows, oracles.TABLE6))
    hand = oracles.hand_mape(oracles.TABLE6)
    # The printed "MAPE = 4.1%" does not follow from the printed rows; the
    # hand summation gives 4.4959%, and that is the value the toolkit must give.
    ok = exact and len(ledger.rows) == 12 and abs(ledger.mape - hand) <= 0.01
    record(2, ok, f"12/12 errors exact to 3 dp={exact}; MAPE={ledger.mape:.4f}% vs hand-sum "
                  f"{hand:.4f}% (printed {oracles.TABLE6_PRINTED_MAPE}% is inconsistent)")
    assert ok
    assert holdout_table(ledger).rstrip().endswith("MAPE = 4.50%")


def test_criterion_03_ljung_box_consistency():
    p = chi_sq_sf(22.443, 20)
    ok = 0.312 <= p <= 0.322
    record(3, ok, f"chi_sq_sf(22.443, 20)={p:.5f} in [0.312, 0.322] (printed 0.317; h=24, fitdf=4)")
    assert ok


def test_criterion_04_exact_likelihood_vs_dense_oracle():
    rng = np.random.default_rng(20240604)
    worst = 0.0
    for _ in range(20):
        phi, theta = rng.uniform(-0.95, 0.95, 2)
        s2 = float(rng.uniform(0.2, 3.0))
        n = int(rng.integers(1, 11))
        y = rng.normal(size=n) * math.sqrt(s2)
        ll = exact_loglik(ModelSpec(1, 0, 1), CoefficientSet([phi], [theta], sigma2=s2), y)
        worst = max(worst, abs(ll - oracles.arma11_loglik(phi, theta, s2, y)))
    ok = worst < 1e-8
    record(4, ok, f"max |loglik - dense oracle| over 20 ARMA(1,1) draws = {worst:.2e} (<1e-8)")
    assert ok


@pytest.mark.slow
def test_criterion_05_parameter_recovery():
    coeffs = CoefficientSet(TRUTH[:2], (), (), TRUTH[2:], SIGMA2)
    fit(simulate(REF_SPEC, coeffs, 120, seed=0), REF_SPEC)  # compile the fast path outside the clock
    t0 = time.perf_counter()
    hits = np.zeros(4)
    n_seeds = 50
    for seed in range(n_seeds):
        z = simulate(REF_SPEC, coeffs, 500, seed=5000 + seed)
        y = TimeSeries(np.exp(7.6 + z.values), (1980, 1))  # level about 2000, like the published series
        m = fit(y, REF_SPEC, "log")
        if m.std_errors is not None:
            hits += np.abs(m.coeffs.vector() - TRUTH) <= 3 * np.asarray(m.std_errors)
    elapsed = time.perf_counter() - t0
    rates = hits / n_seeds
    ok = bool(np.all(rates >= 0.9)) and elapsed < 300
    record(5, ok, "within 3 SE: " + ", ".join(f"{n}={r:.2f}" for n, r in zip(REF_SPEC.names, rates))
           + f" (each >=0.90); {elapsed:.0f} s for 50 fits at n=500 (<300 s)")
    assert ok


def _ar1(phi, n, seed, burn=200):
    e = np.random.default_rng(seed).normal(size=n + burn)
    y = np.zeros(n + burn)
    for t in range(1, n + burn):
        y[t] = phi * y[t - 1] + e[t]
    return y[burn:]


@pytest.mark.slow
def test_criterion_06_adf_size_and_power():
    t0 = time.perf_counter()
    size = sum(adf_test(np.cumsum(np.random.default_rng(7000 + s).normal(size=500))).p_value > 0.10
               for s in range(100))
    power = sum(adf_test(_ar1(0.5, 200, 8000 + s)).p_value < 0.05 for s in range(100))
    elapsed = time.perf_counter() - t0
    ok = size >= 90 and power >= 90 and elapsed < 60
    record(6, ok, f"random walk n=500 p>0.10 in {size}/100; AR(1) 0.5 n=200 p<0.05 in {power}/100 "
                  f"(each >=90); {elapsed:.1f} s (<60 s)")
    assert ok


def test_criterion_07_pacf_equals_regression():
    from test_correlogram import load_fixture

    y = load_fixture()
    diff = float(np.max(np.abs(pacf(y, 20).values - oracles.pacf_ols(y, 20))))
    ok = y.size == 200 and diff < 1e-6
    record(7, ok, f"max |Durbin-Levinson - least-squares PACF|, lags 1-20 = {diff:.2e} (<1e-6)")
    assert ok


_worst_8 = {"box_cox": 0.0, "diff": 0.0, "cases": 0}


@settings(max_examples=1000, deadline=None)
@given(st.lists(st.floats(1e-3, 1e4, allow_nan=False), min_size=30, max_size=60),
       st.floats(-2.0, 2.0, allow_nan=False),
       st.sampled_from([(1, 1), (1, 2), (12, 1), (4, 2)]))
def _roundtrips(y, lam, diff):
    # Box-Cox is checked where lam*ln(y) >= -8; below that float64 cannot
    # represent z finely enough for 1e-10 (see the decisions ledger).
    y = np.array(y)
    keep = y[lam * np.log(y) >= -8.0]
    if keep.size:
        back = inv_box_cox(box_cox(keep, lam), lam)
        _worst_8["box_cox"] = max(_worst_8["box_cox"], float(np.max(np.abs(back - keep) / keep)))
    # differencing is linear, so its error is measured relative to the series scale
    w, rec = difference(y, *diff)
    back = integrate(w, rec)
    _worst_8["diff"] = max(_worst_8["diff"], float(np.max(np.abs(back - y)) / np.max(np.abs(y))))
    _worst_8["cases"] += 1


def test_criterion_08_roundtrips():
    _roundtrips()
    ok = _worst_8["box_cox"] <= 1e-10 and _worst_8["diff"] <= 1e-10 and _worst_8["cases"] >= 1000
    record(8, ok, f"{_worst_8['cases']} cases; worst relative error Box-Cox={_worst_8['box_cox']:.1e}, "
                  f"differencing={_worst_8['diff']:.1e} (<=1e-10)")
    assert ok


def test_criterion_09_selection_cascade():
    ranked = rank_by_aic(scripted.cascade_candidates())
    chosen = apply_gates(ranked)
    verdicts = {r.spec: r for r in ranked}
    funnel = verdicts[scripted.FUNNEL_SPEC]
    weak = verdicts[scripted.INSIGNIFICANT_SPEC]
    ok = (chosen.spec == scripted.SELECTED_SPEC
          and [r.spec for r in ranked][:2] == [scripted.FUNNEL_SPEC, scripted.INSIGNIFICANT_SPEC]
          and funnel.verdict == REJECTED_DIAGNOSTICS and bool(funnel.reasons)
          and weak.verdict == REJECTED_INSIGNIFICANT and bool(weak.reasons)
          and ranked[-1].verdict == REJECTED_AIC_RANK)
    record(9, ok, f"selected {chosen.spec}; {funnel.spec} {funnel.verdict} ({funnel.reasons[0]}); "
                  f"{weak.spec} {weak.verdict} ({weak.reasons[0]})")
    assert ok


def test_criterion_10_non_reproducible_tables_are_format_replicated():
    # Tables 1-4 and 8 depend on the unpublished 96-point training series, so
    # only their layouts are reproduced here. Criterion 5 stands in for
    # Table 4's numbers and the interval-coverage property for Table 8's.
    cands = rank_by_aic(scripted.cascade_candidates())
    apply_gates(cands)
    t3 = aic_table(cands)
    printed_aics = all(f"{aic:.2f}" in t3 for aic in oracles.TABLE3.values())
    selected = next(r for r in cands if r.spec == scripted.SELECTED_SPEC).fit
    t4 = coefficient_table(selected).splitlines()
    t4_ok = t4[1].split()[1:] == ["AR1", "AR2", "SMA1", "SMA2"] and \
        [l.split()[0] for l in t4[3:]] == ["Estimate", "Standard", "z-value", "p-value"]
    fs = forecast(selected, 24)
    t8 = forecast_table(fs).splitlines()
    t8_ok = "Lower 95% Confidence Interval" in t8[1] and len(t8) == 3 + 24
    t1 = adf_test(np.log(np.array([r[0] for r in oracles.TABLE6] * 8)), "none")
    t1_ok = t1.name and "lags" in t1.params
    ok = bool(printed_aics and t4_ok and t8_ok and t1_ok)
    record(10, ok, "Tables 1-4, 8 declared non-reproducible; layouts replicated "
                   f"(Table 3 AICs={printed_aics}, Table 4 layout={t4_ok}, Table 8 layout={t8_ok}, "
                   f"ADF report fields={bool(t1_ok)})")
    assert ok
