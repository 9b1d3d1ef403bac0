"""Scripted replay of a four-candidate selection with injected gate inputs.

The original training data is unavailable, so each candidate is fitted on a
simulated series and then given the printed AIC, injected p-values and
injected residual diagnostics. The gates only read those fields.
"""

from __future__ import annotations

import dataclasses

import numpy as np

import oracles
from sarimakit.estimate import fit
from sarimakit.sarima import CoefficientSet, ModelSpec, simulate
from sarimakit.selection import CandidateResult, Diagnostics
from sarimakit.series import TimeSeries
from sarimakit.stattests import TestReport

SELECTED_SPEC = ModelSpec(2, 1, 0, 0, 0, 2, 12)
FUNNEL_SPEC = ModelSpec(2, 1, 0, 1, 0, 0, 12)        # AIC-best, heteroscedastic residuals
INSIGNIFICANT_SPEC = ModelSpec(1, 1, 1, 1, 0, 0, 12)  # runner-up, one coefficient not significant


def training_series(n: int = 120) -> TimeSeries:
    c = CoefficientSet(oracles.TABLE4_ESTIMATES[:2], (), (), oracles.TABLE4_ESTIMATES[2:], 0.0019)
    z = simulate(SELECTED_SPEC, c, n, seed=7, start=(2009, 1))
    return TimeSeries(np.exp(7.6 + z.values), z.start)


def clean_diagnostics(mcleod_p: float = 0.6) -> Diagnostics:
    return Diagnostics(
        ljung_box=TestReport("LjungBox", 18.0, 0.52, {"h": 24}, 0.05),
        mcleod_li=TestReport("McLeodLi", 9.0 if mcleod_p > 0.05 else 29.5, mcleod_p, {"h": 12}, 0.05),
        acf_spikes=[], pacf_spikes=[7], max_lag=24, allowed_spikes=2)


def cascade_candidates() -> list[CandidateResult]:
    y = training_series()
    out = []
    for spec_tuple, aic in oracles.TABLE3.items():
        spec = ModelSpec(*spec_tuple)
        m = fit(y, spec, "log")
        p_values = [0.001] * spec.n_arma
        if spec == INSIGNIFICANT_SPEC:
            p_values[spec.names.index("ma1")] = 0.41
        m = dataclasses.replace(m, aic=aic, p_values=tuple(p_values))
        diag = clean_diagnostics(0.003 if spec == FUNNEL_SPEC else 0.6)
        out.append(CandidateResult(spec, m, diagnostics=diag))
    return out
