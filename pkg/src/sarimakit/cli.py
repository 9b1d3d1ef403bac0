"""Batch command-line front end.

    sarimakit identify --input data.csv --split 96 --lambda auto --out run/
    sarimakit fit      --input data.csv --split 96 --spec 2,1,0,0,0,2,12 --out run/
    sarimakit diagnose --out run/ [--input data.csv --split 96]
    sarimakit forecast --out run/ --h 24 --level 0.95
    sarimakit evaluate --out run/ --input actuals.csv
    sarimakit select   --input data.csv --split 96 --grid "p=1,2;q=0,1;P=0,1;Q=0,2;d=1;D=0;s=12"

Exit codes: 0 success, 2 usage, 3 data, 4 numeric, 5 no admissible model.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import report
from .config import RunConfig, parse_grid
from .correlogram import acf, default_max_lag, pacf, svg_line_plot, svg_stem_plot
from .errors import AlignmentError, ArgumentError, NoAdmissibleModel, SarimaError
from .estimate import FittedModel, fit
from .forecasting import forecast, one_step_holdout
from .selection import (apply_gates, default_lb_lag, diagnose_fit, enumerate_candidates,
                        fit_candidates, rank_by_aic)
from .series import TimeSeries, apply_differences, box_cox, estimate_lambda, read_csv
from .stattests import adf_test, shapiro_wilk

SUBCOMMANDS = ("identify", "fit", "diagnose", "forecast", "evaluate", "select")


class Artifacts:
    """Collects output files; everything is written in one pass at the end."""

    def __init__(self, out: Path):
        self.out = out
        self.files: dict[str, str] = {}

    def add(self, name: str, content: str) -> None:
        self.files[name] = content

    def add_json(self, name: str, obj) -> None:
        self.files[name] = json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"

    def write(self) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        for name, content in self.files.items():
            (self.out / name).write_text(content)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not serializable: {type(o)}")


def _csv(headers, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(headers)
    w.writerows(rows)
    return buf.getvalue()


# -- shared steps ---------------------------------------------------------------

def ingest(cfg: RunConfig) -> tuple[TimeSeries, dict]:
    if not cfg.input:
        raise ArgumentError("--input is required for this subcommand")
    series = read_csv(cfg.input, cfg.date_column, cfg.value_column)
    info = {"n": len(series), "start": list(series.start), "end": list(series.end),
            "min": float(series.values.min()), "max": float(series.values.max())}
    return series, info


def resolve_lambda(cfg: RunConfig, train: TimeSeries):
    lam = cfg.lam
    if lam == "auto":
        lo, hi, step = cfg.lambda_grid
        return estimate_lambda(train, lo, hi, step), "profile likelihood"
    return lam, "fixed" if lam is not None else "none"


def model_path(cfg: RunConfig) -> Path:
    return Path(cfg.model) if cfg.model else Path(cfg.out) / "model.json"


def load_model(cfg: RunConfig) -> FittedModel:
    path = model_path(cfg)
    if not path.exists():
        raise _ModelMissing(f"model file not found: {path}")
    return FittedModel.load(path)


class _ModelMissing(SarimaError):
    exit_code = 3


def _correlogram_artifacts(art: Artifacts, values, tag: str, title: str, max_lag: int, level: float):
    out = {}
    for fn in (acf, pacf):
        cg = fn(values, max_lag, level)
        name = f"{cg.kind.lower()}_{tag}"
        art.add(f"{name}.csv", cg.to_csv())
        art.add(f"{name}.svg", svg_stem_plot(cg, f"{cg.kind} of {title}"))
        out[cg.kind] = {"values": [float(v) for v in cg.values], "band": cg.band, "n": cg.n,
                        "spikes": cg.spikes()}
    return out


def _holdout_split(model: FittedModel, series: TimeSeries) -> TimeSeries:
    """The part of ``series`` that follows the model's training sample."""
    train = model.training
    if series.start == train.next_label:
        return series
    if series.start == train.start and len(series) > model.n_obs:
        return series.replace(series.values[model.n_obs:], model.n_obs)
    raise AlignmentError(f"input does not continue the training sample ending "
                         f"{report.format_label(train.end, train.period)}")


# -- subcommands ---------------------------------------------------------------

def cmd_identify(cfg: RunConfig, art: Artifacts) -> str:
    series, info = ingest(cfg)
    train, _ = cfg.split_series(series)
    lam, how = resolve_lambda(cfg, train)
    if cfg.spec:
        spec = cfg.model_spec()
        d, D, s = spec.d, spec.D, spec.s
    else:
        _, _, _, _, d, D, s = cfg.grid_ranges()
    z = train if lam is None else box_cox(train, lam)
    w, _ = apply_differences(z, [(1, d), (s, D)])
    adf_z = adf_test(z, cfg.adf_regression, cfg.adf_lags)
    adf_w = adf_test(w, cfg.adf_regression, cfg.adf_lags)
    K_z = cfg.max_lag or default_max_lag(len(z), z.period)
    K_w = cfg.max_lag or default_max_lag(len(w), w.period)
    art.add("series.svg", svg_line_plot(train.values, "Training series"))
    art.add("transformed.svg", svg_line_plot(z.values, "Transformed series"))
    art.add("differenced.svg", svg_line_plot(w.values, "Differenced transformed series"))
    cg_z = _correlogram_artifacts(art, z.values, "transformed", "transformed series", K_z, cfg.level)
    cg_w = _correlogram_artifacts(art, w.values, "differenced", "differenced series", K_w, cfg.level)
    text = "\n".join([
        f"Input: {cfg.input} (n={info['n']}, {report.format_label(series.start)} .. "
        f"{report.format_label(series.end)}, min={info['min']:.3f}, max={info['max']:.3f})",
        f"Training observations: {len(train)}",
        f"Box-Cox lambda: {'none' if lam is None else f'{lam:g}'} ({how}); "
        f"working scale: {report.working_scale(lam)}",
        f"Differencing: d={d}, D={D}, s={s}",
        f"Correlogram sample sizes: transformed n={len(z)}, differenced n={len(w)}",
        "",
        report.stat_table(adf_z, f"ADF test, transformed series ({cfg.adf_regression}, "
                                 f"{adf_z.params['lags']} lags)", "Dickey-Fuller Value"),
        report.stat_table(adf_w, f"ADF test, differenced series ({cfg.adf_regression}, "
                                 f"{adf_w.params['lags']} lags)", "Dickey-Fuller Value"),
        f"ACF spikes (differenced, band ±{cg_w['ACF']['band']:.4f}): {cg_w['ACF']['spikes']}",
        f"PACF spikes (differenced, band ±{cg_w['PACF']['band']:.4f}): {cg_w['PACF']['spikes']}",
    ]) + "\n"
    art.add("identify.txt", text)
    art.add_json("identify.json", {
        "config": cfg.to_dict(), "ingest": info, "lambda": lam, "lambda_method": how,
        "differencing": {"d": d, "D": D, "s": s},
        "n_transformed": len(z), "n_differenced": len(w),
        "adf_transformed": adf_z.to_dict(), "adf_differenced": adf_w.to_dict(),
        "correlogram_transformed": cg_z, "correlogram_differenced": cg_w,
    })
    return text


def cmd_fit(cfg: RunConfig, art: Artifacts) -> str:
    series, _ = ingest(cfg)
    train, _ = cfg.split_series(series)
    spec = cfg.model_spec()
    lam, how = resolve_lambda(cfg, train)
    model = fit(train, spec, lam)
    art.add("model.json", json.dumps(model.to_dict(), indent=2) + "\n")
    text = report.model_summary(model) + "\n" + report.equation(model) + "\n"
    text = f"Box-Cox lambda: {'none' if lam is None else f'{lam:g}'} ({how})\n" + text
    art.add("fit.txt", text)
    return text


def cmd_diagnose(cfg: RunConfig, art: Artifacts) -> str:
    model = load_model(cfg)
    diag = diagnose_fit(model, cfg.lb_h, cfg.level, cfg.max_lag, cfg.lb_alpha, cfg.mcleod_alpha)
    resid = model.innovations
    z = model.training
    w, _ = apply_differences(z, [(1, model.spec.d), (model.spec.s, model.spec.D)])
    sections = [report.model_summary(model)]
    result = {"model": str(model.spec), "ljung_box": diag.ljung_box.to_dict(),
              "mcleod_li": diag.mcleod_li.to_dict(), "acf_spikes": diag.acf_spikes,
              "pacf_spikes": diag.pacf_spikes, "allowed_spikes": diag.allowed_spikes}
    for tag, values in (("transformed", z), ("differenced", w)):
        try:
            r = adf_test(values, cfg.adf_regression, cfg.adf_lags)
        except SarimaError as exc:
            sections.append(f"ADF test, {tag} series: not computed ({exc})\n")
            continue
        sections.append(report.stat_table(r, f"ADF test, {tag} series ({cfg.adf_regression})",
                                          "Dickey-Fuller Value"))
        result[f"adf_{tag}"] = r.to_dict()
    sections.append(report.stat_table(
        diag.ljung_box, f"Ljung-Box test on residuals (h={diag.ljung_box.params['h']}, "
                        f"fitdf={diag.ljung_box.params['fitdf']})", "Ljung-Box Q* Test Statistic"))
    sections.append(report.stat_table(diag.mcleod_li, "McLeod-Li test on squared residuals",
                                      "Q* Statistic"))
    sections.append(f"Residual ACF spikes: {diag.acf_spikes}; PACF spikes: {diag.pacf_spikes} "
                    f"(allowed {diag.allowed_spikes} of {diag.max_lag} lags)\n")
    _correlogram_artifacts(art, resid, "residuals", "residuals", diag.max_lag, cfg.level)
    art.add("residuals.svg", svg_line_plot(resid, "Residuals"))
    errors, source = resid, "residuals"
    if cfg.input:
        series, _ = ingest(cfg)
        try:
            test = _holdout_split(model, series)
        except AlignmentError:
            test = None
        if test is not None:
            ledger = one_step_holdout(model, test)
            errors, source = ledger.errors, "one-step holdout forecast errors"
    sw = shapiro_wilk(errors[:5000])
    sections.append(report.stat_table(sw, f"Shapiro-Wilk normality test on {source}",
                                      "Shapiro-Wilk Test Statistics"))
    result["shapiro_wilk"] = dict(sw.to_dict(), source=source)
    text = "\n".join(sections)
    art.add("diagnose.txt", text)
    art.add_json("diagnose.json", result)
    return text


def cmd_forecast(cfg: RunConfig, art: Artifacts) -> str:
    model = load_model(cfg)
    fs = forecast(model, cfg.h, cfg.level)
    text = (f"Model: {model.spec}; working scale: {report.working_scale(model.transform.lam)}\n"
            f"Intervals: innovation variance only, endpoints back-transformed individually\n\n"
            + report.forecast_table(fs))
    art.add("forecast.txt", text)
    art.add("forecast.csv", _csv(["date", "forecast", "lower", "upper"],
                                 [[r["date"], repr(r["forecast"]), repr(r["lower"]), repr(r["upper"])]
                                  for r in fs.rows()]))
    art.add_json("forecast.json", dict(fs.to_dict(), model=str(model.spec)))
    return text


def cmd_evaluate(cfg: RunConfig, art: Artifacts) -> str:
    model = load_model(cfg)
    series, _ = ingest(cfg)
    test = _holdout_split(model, series)
    ledger = one_step_holdout(model, test)
    text = f"Model: {model.spec}\n\n" + report.holdout_table(ledger)
    result = dict(ledger.to_dict(), model=str(model.spec))
    if len(ledger.rows) >= 3:
        sw = shapiro_wilk(ledger.errors)
        text += "\n" + report.stat_table(sw, "Test for normality of forecast errors",
                                         "Shapiro-Wilk Test Statistics")
        result["shapiro_wilk"] = sw.to_dict()
    art.add("evaluate.txt", text)
    art.add("evaluate.csv", _csv(["date", "actual", "forecast", "error"],
                                 [[r["date"], repr(r["actual"]), repr(r["forecast"]), repr(r["error"])]
                                  for r in ledger.to_dict()["rows"]]))
    art.add_json("evaluate.json", result)
    return text


def cmd_select(cfg: RunConfig, art: Artifacts) -> str:
    series, _ = ingest(cfg)
    train, _ = cfg.split_series(series)
    lam, how = resolve_lambda(cfg, train)
    p, q, P, Q, d, D, s = cfg.grid_ranges()
    specs = enumerate_candidates(p, q, P, Q, d, D, s)
    ranked = rank_by_aic(fit_candidates(train, specs, lam, cfg.workers))
    gates = dict(alpha_sig=cfg.alpha_sig, lb_h=cfg.lb_h, lb_alpha=cfg.lb_alpha,
                 mcleod_alpha=cfg.mcleod_alpha, level=cfg.level, max_lag=cfg.max_lag)
    failure = None
    try:
        selected = apply_gates(ranked, **gates)
    except NoAdmissibleModel as exc:
        selected, failure = None, exc
    lines = [f"Box-Cox lambda: {'none' if lam is None else f'{lam:g}'} ({how}); "
             f"{len(specs)} candidates", "", report.aic_table(ranked), "Verdict audit:"]
    for r in ranked:
        lines.append(f"  {r.spec}: {r.verdict}")
        lines.extend(f"    - {reason}" for reason in r.reasons)
    lines.append("")
    if selected is not None:
        lines.append(f"Selected model: {selected.spec}")
        art.add("model.json", json.dumps(selected.fit.to_dict(), indent=2) + "\n")
    else:
        lines.append("No admissible model.")
    text = "\n".join(lines) + "\n"
    art.add("select.txt", text)
    art.add_json("select.json", {"lambda": lam, "gates": gates,
                                 "lb_h_default": default_lb_lag(s),
                                 "selected": None if selected is None else str(selected.spec),
                                 "candidates": [r.to_dict() for r in ranked]})
    if failure is not None:
        art.write()
        raise failure
    return text


COMMANDS = {"identify": cmd_identify, "fit": cmd_fit, "diagnose": cmd_diagnose,
            "forecast": cmd_forecast, "evaluate": cmd_evaluate, "select": cmd_select}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sarimakit", description="Seasonal ARIMA toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="CSV with date,value columns (YYYY-MM dates)")
    common.add_argument("--config", help="JSON run configuration; flags override it")
    common.add_argument("--out", help="output directory (default: out)")
    common.add_argument("--seed", type=int, help="recorded in the run configuration")
    common.add_argument("--split", help="training length or last training month YYYY-MM")
    common.add_argument("--lambda", dest="transform", help="auto, log, none or a Box-Cox exponent")
    common.add_argument("--spec", help="model orders p,d,q,P,D,Q,s")
    common.add_argument("--level", type=float, help="interval / band level (default 0.95)")
    common.add_argument("--h", type=int, help="forecast horizon (default 24)")
    common.add_argument("--model", help="model JSON (default: <out>/model.json)")
    common.add_argument("--grid", help="candidate grid, e.g. 'p=1,2;q=0,1;P=0,1;Q=0,2;d=1;D=0;s=12'")
    common.add_argument("--adf-regression", dest="adf_regression", choices=["none", "drift", "trend"])
    common.add_argument("--lb-h", dest="lb_h", type=int, help="Ljung-Box lag (default 2 x period)")
    common.add_argument("--workers", type=int, help="parallel candidate fits in select")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    base = RunConfig.load(args.config).to_dict() if args.config else {}
    for key in ("input", "out", "seed", "transform", "spec", "level", "h", "model",
                "adf_regression", "lb_h", "workers"):
        val = getattr(args, key)
        if val is not None:
            base[key] = val
    if args.split is not None:
        base["split"] = int(args.split) if args.split.lstrip("-").isdigit() else args.split
    if args.grid is not None:
        base["grid"] = parse_grid(args.grid)
    return RunConfig.from_dict(base)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        art = Artifacts(Path(cfg.out))
        text = COMMANDS[args.command](cfg, art)
        art.write()
    except SarimaError as exc:
        print(f"sarimakit {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"sarimakit {args.command}: {exc}", file=sys.stderr)
        return 3
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
