"""Plain-text tables laid out like the usual Box-Jenkins report tables."""

from __future__ import annotations

import calendar
import math

from .series import format_label

SIGN_CONVENTION = ("Sign convention: (1 - phi_1 B - ...)(1 - Phi_1 B^s - ...) w_t = "
                   "(1 + theta_1 B + ...)(1 + Theta_1 B^s + ...) e_t")


def fmt_p(p: float | None, bound: str | None = None) -> str:
    if p is None:
        return "NA"
    if bound:
        return f"{bound}{p:.2f}"
    if p < 0.01:
        return "<0.01"
    return f"{p:.4f}"


def fmt_num(x: float | None, digits: int) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "NA"
    return f"{x:.{digits}f}"


def render_table(headers, rows, title: str | None = None) -> str:
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[j]) for r in cells) for j in range(len(headers))]
    lines = []
    if title:
        lines.append(title)
    for i, row in enumerate(cells):
        lines.append("  ".join(c.rjust(w) if i and j else c.ljust(w)
                               for j, (c, w) in enumerate(zip(row, widths))).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def month_name(label, period: int = 12) -> str:
    return calendar.month_abbr[label[1]] if period == 12 else str(label[1])


def working_scale(lam) -> str:
    if lam is None:
        return "original units (no Box-Cox transform)"
    if lam == 0:
        return "natural-log scale (Box-Cox lambda = 0)"
    return f"Box-Cox scale (lambda = {lam:g})"


def stat_table(report, title: str, stat_label: str) -> str:
    return render_table([stat_label, "p-value"],
                        [[fmt_num(report.statistic, 4), fmt_p(report.p_value, report.p_bound)]], title)


def coefficient_table(model) -> str:
    names = [n.upper() for n in model.names]
    rows = [["Estimate"] + [fmt_num(r["estimate"], 4) for r in model.coef_rows()],
            ["Standard error"] + [fmt_num(r["std_error"], 4) for r in model.coef_rows()],
            ["z-value"] + [fmt_num(r["z_value"], 4) for r in model.coef_rows()],
            ["p-value"] + [fmt_p(r["p_value"]) for r in model.coef_rows()]]
    return render_table([str(model.spec)] + names, rows, "Model Estimates")


def model_summary(model) -> str:
    lines = [
        f"Model: {model.spec}",
        f"Working scale: {working_scale(model.transform.lam)}",
        SIGN_CONVENTION,
        f"Training sample: {format_label(model.start, model.period)} .. "
        f"{format_label(model.training.end, model.period)} (n={model.n_obs}, "
        f"used after differencing={model.n_used})",
        f"sigma^2 = {model.coeffs.sigma2:.6g}   log-likelihood = {model.loglik:.4f}   "
        f"AIC = {model.aic:.2f}   BIC = {model.bic:.2f}",
    ]
    if model.spec.d + model.spec.D == 0:
        lines.append(f"Mean (working scale) = {model.mean:.6g}")
    for note in model.notes:
        lines.append(f"Note: {note}")
    text = "\n".join(lines) + "\n\n"
    if model.spec.n_arma:
        text += coefficient_table(model)
    return text


def equation(model) -> str:
    """The fitted model written out as a difference equation in w_t."""
    c = model.coeffs
    s = model.spec.s
    terms = [f"{v:+.4f} w_(t-{i})" for i, v in enumerate(c.phi, 1)]
    terms += [f"{v:+.4f} w_(t-{i * s})" for i, v in enumerate(c.Phi, 1)]
    terms += [f"{v:+.4f} e_(t-{i})" for i, v in enumerate(c.theta, 1)]
    terms += [f"{v:+.4f} e_(t-{i * s})" for i, v in enumerate(c.Theta, 1)]
    if c.phi and c.Phi:
        terms.append("(+ AR cross terms)")
    if c.theta and c.Theta:
        terms.append("(+ MA cross terms)")
    return "w_t = " + " ".join(terms + ["+ e_t"])


def aic_table(ranked) -> str:
    rows = []
    for r in ranked:
        rows.append([str(r.spec), fmt_num(r.aic, 2) if r.ok else "failed",
                     fmt_num(r.fit.bic, 2) if r.ok else "", r.verdict or ""])
    return render_table(["Tentative Models", "AIC", "BIC", "Verdict"], rows,
                        "Tentative models ranked by AIC")


def holdout_table(ledger) -> str:
    rows = [[month_name(r.label, ledger.period), r.label[0], f"{r.actual:.3f}", f"{r.forecast:.3f}",
             f"{r.error:.3f}"] for r in ledger.rows]
    text = render_table(["Month", "Year", "Actual Value", "One Step Ahead Forecast", "Forecast Error"],
                        rows, "One Step Ahead Forecasts and Forecast Errors")
    return text + f"Note: MAPE = {ledger.mape:.2f}%\n"


def forecast_table(fs) -> str:
    pct = f"{100 * fs.level:g}%"
    rows = [[month_name(lab, fs.period), lab[0], f"{p:.3f}", f"{lo:.3f}", f"{hi:.3f}"]
            for lab, p, lo, hi in zip(fs.labels, fs.points, fs.lower, fs.upper)]
    return render_table(["Month", "Year", "Forecast Values", f"Lower {pct} Confidence Interval",
                         f"Upper {pct} Confidence Interval"], rows, "Forecasts")
