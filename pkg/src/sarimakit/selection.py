"""Candidate enumeration, AIC ranking and the significance/diagnostic gates."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .correlogram import acf, default_max_lag, pacf
from .errors import ArgumentError, NoAdmissibleModel, SarimaError
from .estimate import FittedModel, fit
from .sarima import ModelSpec
from .stattests import TestReport, ljung_box, mcleod_li

SELECTED = "selected"
REJECTED_AIC_RANK = "rejected_aic_rank"
REJECTED_INSIGNIFICANT = "rejected_insignificant"
REJECTED_DIAGNOSTICS = "rejected_diagnostics"
FAILED = "failed"

MAX_CANDIDATES = 400


@dataclass
class Diagnostics:
    ljung_box: TestReport
    mcleod_li: TestReport
    acf_spikes: list
    pacf_spikes: list
    max_lag: int
    allowed_spikes: int

    def to_dict(self) -> dict:
        return {"ljung_box": self.ljung_box.to_dict(), "mcleod_li": self.mcleod_li.to_dict(),
                "acf_spikes": list(self.acf_spikes), "pacf_spikes": list(self.pacf_spikes),
                "max_lag": self.max_lag, "allowed_spikes": self.allowed_spikes}


@dataclass
class CandidateResult:
    spec: ModelSpec
    fit: FittedModel | None = None
    error: str | None = None
    diagnostics: Diagnostics | None = None
    verdict: str | None = None
    reasons: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.fit is not None

    @property
    def aic(self) -> float:
        return self.fit.aic if self.fit is not None else math.inf

    def to_dict(self) -> dict:
        d = {"spec": self.spec.to_list(), "label": str(self.spec), "verdict": self.verdict,
             "reasons": list(self.reasons), "error": self.error}
        if self.fit is not None:
            d.update({"aic": self.fit.aic, "bic": self.fit.bic, "loglik": self.fit.loglik,
                      "sigma2": self.fit.coeffs.sigma2, "coefficients": self.fit.coef_rows()})
        if self.diagnostics is not None:
            d["diagnostics"] = self.diagnostics.to_dict()
        return d


def enumerate_candidates(p_range, q_range, P_range, Q_range, d: int, D: int, s: int,
                         limit: int = MAX_CANDIDATES) -> list[ModelSpec]:
    """Cartesian product of the order ranges in lexicographic order, minus the empty model."""
    ranges = [sorted(set(int(x) for x in r)) for r in (p_range, q_range, P_range, Q_range)]
    if any(not r for r in ranges):
        raise ArgumentError("every order range must be nonempty")
    total = math.prod(len(r) for r in ranges)
    if total > limit:
        raise ArgumentError(f"candidate grid has {total} models, more than the limit of {limit}")
    out = []
    for p, q, P, Q in itertools.product(*ranges):
        spec = ModelSpec(p, d, q, P, D, Q, s)
        if spec.is_empty:
            continue
        out.append(spec)
    return out


def _fit_one(args) -> CandidateResult:
    series, spec, lam = args
    try:
        return CandidateResult(spec, fit(series, spec, lam))
    except SarimaError as exc:
        return CandidateResult(spec, error=f"{type(exc).__name__}: {exc}")


def fit_candidates(series, specs, lam=None, workers: int | None = 1) -> list[CandidateResult]:
    """Fit every spec; results come back in input order whatever the worker count."""
    jobs = [(series, spec, lam) for spec in specs]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(jobs) <= 1:
        return [_fit_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_fit_one, jobs))


def rank_by_aic(results) -> list[CandidateResult]:
    """Ascending AIC; failures last; ties go to fewer parameters, then the smaller spec."""
    results = list(results)
    if not any(r.ok for r in results):
        raise NoAdmissibleModel("every candidate failed to fit", results)
    return sorted(results, key=lambda r: (not r.ok, r.aic, r.spec.n_arma, r.spec.to_list()))


def default_lb_lag(period: int) -> int:
    return 2 * period if period > 1 else 10


def diagnose_fit(model: FittedModel, lb_h: int | None = None, level: float = 0.95,
                 max_lag: int | None = None, lb_alpha: float = 0.05,
                 mcleod_alpha: float = 0.05) -> Diagnostics:
    resid = model.innovations
    n = resid.size
    fitdf = model.spec.n_arma
    h = default_lb_lag(model.period) if lb_h is None else int(lb_h)
    h = min(max(h, fitdf + 1), n - 1)
    K = default_max_lag(n, model.period) if max_lag is None else int(max_lag)
    K = min(K, n - 1)
    ml_h = min(model.period if model.period > 1 else 10, n - 1)
    return Diagnostics(
        ljung_box=ljung_box(resid, h, fitdf, lb_alpha),
        mcleod_li=mcleod_li(resid, ml_h, mcleod_alpha),
        acf_spikes=acf(resid, K, level).spikes(),
        pacf_spikes=pacf(resid, K, level).spikes(),
        max_lag=K,
        allowed_spikes=int(math.ceil(0.05 * K)),
    )


def gate_reasons(result: CandidateResult, alpha_sig: float, lb_alpha: float,
                 mcleod_alpha: float = 0.05) -> tuple[str | None, list[str]]:
    """Verdict (None when the candidate passes) and the reasons behind it."""
    fit_ = result.fit
    sig, diag = [], []
    if fit_.spec.n_arma:
        if fit_.p_values is None:
            sig.append("standard errors unavailable (Hessian not positive definite)")
        else:
            for name, p in zip(fit_.names, fit_.p_values):
                if p >= alpha_sig:
                    sig.append(f"coefficient {name} not significant (p={p:.4f} >= {alpha_sig})")
    dg = result.diagnostics
    if dg is not None:
        if dg.ljung_box.p_value <= lb_alpha:
            diag.append(f"Ljung-Box lack of fit (Q={dg.ljung_box.statistic:.3f}, "
                        f"p={dg.ljung_box.p_value:.4f} <= {lb_alpha})")
        if dg.mcleod_li.p_value <= mcleod_alpha:
            diag.append(f"heteroscedastic residuals: McLeod-Li on squared residuals "
                        f"p={dg.mcleod_li.p_value:.4f} <= {mcleod_alpha}")
        for kind, spikes in (("ACF", dg.acf_spikes), ("PACF", dg.pacf_spikes)):
            if len(spikes) > dg.allowed_spikes:
                diag.append(f"residual {kind} has {len(spikes)} spikes outside the band "
                            f"(allowed {dg.allowed_spikes}) at lags {spikes}")
    if sig:
        return REJECTED_INSIGNIFICANT, sig + diag
    if diag:
        return REJECTED_DIAGNOSTICS, diag
    return None, []


def apply_gates(ranked, alpha_sig: float = 0.05, lb_h: int | None = None, lb_alpha: float = 0.05,
                mcleod_alpha: float = 0.05, level: float = 0.95,
                max_lag: int | None = None) -> CandidateResult:
    """Walk the AIC ranking and select the first candidate passing every gate.

    Diagnostics already attached to a candidate are used as they are;
    otherwise they are computed from its residuals. Verdicts and reasons are
    written onto every candidate.
    """
    selected = None
    for res in ranked:
        if selected is not None:
            res.verdict = REJECTED_AIC_RANK
            res.reasons = [f"AIC {res.aic:.2f} ranks below selected {selected.spec} "
                           f"(AIC {selected.aic:.2f})"]
            continue
        if not res.ok:
            res.verdict = FAILED
            res.reasons = [res.error or "fit failed"]
            continue
        if res.diagnostics is None:
            try:
                res.diagnostics = diagnose_fit(res.fit, lb_h, level, max_lag, lb_alpha, mcleod_alpha)
            except SarimaError as exc:
                res.verdict = REJECTED_DIAGNOSTICS
                res.reasons = [f"diagnostics could not be computed: {exc}"]
                continue
        verdict, reasons = gate_reasons(res, alpha_sig, lb_alpha, mcleod_alpha)
        if verdict is None:
            res.verdict = SELECTED
            res.reasons = ["lowest AIC among candidates passing all gates"]
            selected = res
        else:
            res.verdict, res.reasons = verdict, reasons
    if selected is None:
        raise NoAdmissibleModel("no candidate passed the significance and diagnostic gates",
                                list(ranked))
    return selected


@dataclass
class SelectionReport:
    ranked: list
    selected: CandidateResult

    def to_dict(self) -> dict:
        return {"selected": self.selected.to_dict()["label"],
                "candidates": [r.to_dict() for r in self.ranked]}


def select_model(series, specs, lam=None, workers: int | None = 1, **gates) -> SelectionReport:
    results = fit_candidates(series, specs, lam, workers)
    ranked = rank_by_aic(results)
    selected = apply_gates(ranked, **gates)
    return SelectionReport(ranked, selected)
