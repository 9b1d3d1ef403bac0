"""Time series container, Box-Cox and differencing transforms, CSV ingestion."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (AlignmentError, ArgumentError, DomainError, IngestError,
                     LengthError, ShapeError)

_DATE_RE = re.compile(r"^(\d{4})-(\d{2})$")


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float).ravel()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Equally spaced observations tagged with a calendar start.

    ``start`` is ``(year, season)`` with ``season`` running from 1 to
    ``period``; for monthly data that is the calendar month.
    """

    values: np.ndarray
    start: tuple[int, int] = (1, 1)
    period: int = 12

    def __post_init__(self):
        values = _frozen(self.values)
        if values.size == 0:
            raise LengthError("time series must contain at least one value")
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise DomainError(f"non-finite value at index {bad[0]}", index=int(bad[0]))
        if int(self.period) < 1:
            raise ArgumentError(f"period must be >= 1, got {self.period}")
        year, season = (int(v) for v in self.start)
        if not 1 <= season <= int(self.period):
            raise ArgumentError(f"start season {season} outside 1..{self.period}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "start", (year, season))
        object.__setattr__(self, "period", int(self.period))

    def __len__(self):
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (self.start == other.start and self.period == other.period
                and np.array_equal(self.values, other.values))

    def label(self, i: int) -> tuple[int, int]:
        """Calendar ``(year, season)`` of observation ``i``."""
        k = self.start[1] - 1 + i
        return self.start[0] + k // self.period, k % self.period + 1

    @property
    def end(self) -> tuple[int, int]:
        return self.label(len(self) - 1)

    @property
    def next_label(self) -> tuple[int, int]:
        return self.label(len(self))

    def index_of(self, label: tuple[int, int]) -> int:
        """Offset of ``label`` relative to ``start`` (may be negative or past the end)."""
        return (label[0] - self.start[0]) * self.period + (label[1] - self.start[1])

    def replace(self, values, offset: int = 0) -> "TimeSeries":
        """New series with the same period, starting ``offset`` steps after this one."""
        return TimeSeries(values, self.label(offset), self.period)

    def split(self, n_train: int) -> tuple["TimeSeries", "TimeSeries"]:
        if not 0 < n_train < len(self):
            raise ArgumentError(f"split point {n_train} must lie strictly inside 1..{len(self) - 1}")
        return self.replace(self.values[:n_train]), self.replace(self.values[n_train:], n_train)

    def append(self, other: "TimeSeries") -> "TimeSeries":
        if other.period != self.period or other.start != self.next_label:
            raise AlignmentError(
                f"series starting {format_label(other.start, other.period)} does not follow "
                f"{format_label(self.end, self.period)}")
        return self.replace(np.concatenate([self.values, other.values]))


def format_label(label, period=12) -> str:
    if period == 12:
        return f"{label[0]:04d}-{label[1]:02d}"
    return f"{label[0]}:{label[1]}"


def _as_values(series):
    return series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)


def _rewrap(series, values, offset=0):
    if isinstance(series, TimeSeries):
        return series.replace(values, offset)
    return np.asarray(values)


# -- Box-Cox ---------------------------------------------------------------

_TINY_LAMBDA = 1e-8


def _lambda_value(lam) -> float:
    if isinstance(lam, str):
        if lam.lower() == "log":
            return 0.0
        raise ArgumentError(f"unknown Box-Cox lambda {lam!r}")
    lam = float(lam)
    if not math.isfinite(lam):
        raise ArgumentError("Box-Cox lambda must be finite")
    return lam


def box_cox(series, lam):
    """``(y**lam - 1) / lam``, or ``log(y)`` when ``lam`` is 0 (or ``"log"``)."""
    lam = _lambda_value(lam)
    y = _as_values(series)
    bad = np.flatnonzero(~(y > 0))
    if bad.size:
        raise DomainError(f"Box-Cox needs positive values; index {bad[0]} is {y[bad[0]]!r}",
                          index=int(bad[0]))
    logy = np.log(y)
    if lam == 0.0:
        out = logy
    elif abs(lam) < _TINY_LAMBDA:
        # lam * logy may be subnormal; the series is exact to rounding here
        out = logy * (1.0 + lam * logy / 2.0 + (lam * logy) ** 2 / 6.0)
    else:
        out = np.expm1(lam * logy) / lam
    return _rewrap(series, out)


def inv_box_cox(series, lam):
    lam = _lambda_value(lam)
    z = _as_values(series)
    if lam == 0.0:
        return _rewrap(series, np.exp(z))
    if abs(lam) < _TINY_LAMBDA:
        return _rewrap(series, np.exp(z * (1.0 - lam * z / 2.0 + (lam * z) ** 2 / 3.0)))
    base = lam * z
    bad = np.flatnonzero(~(base > -1.0))
    if bad.size:
        raise DomainError(f"inverse Box-Cox undefined at index {bad[0]} (lambda*z + 1 <= 0)",
                          index=int(bad[0]))
    return _rewrap(series, np.exp(np.log1p(base) / lam))


def lambda_grid(lo: float, hi: float, step: float) -> np.ndarray:
    if not (step > 0 and lo < hi):
        raise ArgumentError(f"empty lambda grid [{lo}, {hi}] step {step}")
    k = int(math.floor((hi - lo) / step + 1e-9))
    return np.round(lo + step * np.arange(k + 1), 12)


def box_cox_profile(series, lambdas) -> np.ndarray:
    """Gaussian profile log-likelihood of the Box-Cox exponent (constants dropped)."""
    y = _as_values(series)
    if np.any(y <= 0):
        idx = int(np.flatnonzero(y <= 0)[0])
        raise DomainError(f"Box-Cox needs positive values; index {idx} is {y[idx]!r}", index=idx)
    n = y.size
    slog = float(np.log(y).sum())
    out = np.empty(len(lambdas))
    for i, lam in enumerate(lambdas):
        z = box_cox(y, lam)
        var = z.var()
        out[i] = -np.inf if var <= 0 else -0.5 * n * math.log(var) + (lam - 1.0) * slog
    return out


def estimate_lambda(series, grid_lo: float = -2.0, grid_hi: float = 2.0, step: float = 0.01) -> float:
    """Grid maximiser of the Box-Cox profile log-likelihood."""
    grid = lambda_grid(grid_lo, grid_hi, step)
    prof = box_cox_profile(series, grid)
    return float(grid[int(np.argmax(prof))])


# -- differencing ----------------------------------------------------------

@dataclass(frozen=True)
class TransformRecord:
    """Everything needed to undo a Box-Cox + differencing pipeline.

    ``initial_values`` holds, for each elementary ``(1 - B**lag)`` step in
    application order, the ``lag`` leading values that step consumed.
    """

    lam: float | None = None
    diffs: tuple[tuple[int, int], ...] = ()
    initial_values: tuple[tuple[float, ...], ...] = ()
    start: tuple[int, int] | None = None
    period: int | None = None

    @property
    def steps(self) -> list[int]:
        return [lag for lag, order in self.diffs for _ in range(order)]

    @property
    def consumed(self) -> int:
        return sum(self.steps)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "diffs": [list(d) for d in self.diffs],
            "initial_values": [list(v) for v in self.initial_values],
            "start": list(self.start) if self.start else None,
            "period": self.period,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TransformRecord":
        return cls(
            lam=d.get("lambda"),
            diffs=tuple((int(a), int(b)) for a, b in d.get("diffs", [])),
            initial_values=tuple(tuple(float(x) for x in v) for v in d.get("initial_values", [])),
            start=tuple(d["start"]) if d.get("start") else None,
            period=d.get("period"),
        )


def _diff_once(x: np.ndarray, lag: int) -> np.ndarray:
    return x[lag:] - x[:-lag]


def _undiff_once(w: np.ndarray, init: np.ndarray) -> np.ndarray:
    lag = init.size
    x = np.empty(w.size + lag)
    x[:lag] = init
    for r in range(lag):
        x[lag + r::lag] = init[r] + np.cumsum(w[r::lag])
    return x


def apply_differences(series, diffs, lam=None):
    """Apply ``(1 - B**lag)**order`` for each ``(lag, order)`` in ``diffs``."""
    x = _as_values(series).astype(float)
    steps = [(int(lag), int(order)) for lag, order in diffs if int(order) > 0]
    for lag, order in steps:
        if lag < 1:
            raise ArgumentError(f"differencing lag must be positive, got {lag}")
    need = sum(lag * order for lag, order in steps)
    if x.size <= need:
        raise LengthError(f"series of length {x.size} too short for differencing consuming {need} values")
    inits = []
    for lag, order in steps:
        for _ in range(order):
            inits.append(tuple(float(v) for v in x[:lag]))
            x = _diff_once(x, lag)
    ts = isinstance(series, TimeSeries)
    record = TransformRecord(
        lam=lam,
        diffs=tuple(steps),
        initial_values=tuple(inits),
        start=series.start if ts else None,
        period=series.period if ts else None,
    )
    return _rewrap(series, x, need), record


def difference(series, lag: int, order: int = 1):
    """``(1 - B**lag)**order`` applied to ``series``; returns ``(differenced, record)``."""
    if lag < 1 or order < 1:
        raise ArgumentError(f"lag and order must be positive, got lag={lag} order={order}")
    return apply_differences(series, [(lag, order)])


def integrate(series, record: TransformRecord):
    """Undo the differencing described by ``record`` (Box-Cox is left alone).

    ``series`` may be longer than the differenced output that produced the
    record: extra values extend the levels, which is how forecasts on the
    differenced scale are carried back.
    """
    w = _as_values(series).astype(float)
    steps = record.steps
    if len(steps) != len(record.initial_values):
        raise ShapeError("transform record has inconsistent differencing metadata")
    for lag, init in zip(steps, record.initial_values):
        if len(init) != lag:
            raise ShapeError(f"record stores {len(init)} initial values for lag {lag}")
    if isinstance(series, TimeSeries) and record.start is not None:
        expected = TimeSeries([0.0], record.start, record.period).label(record.consumed)
        if series.start != expected or series.period != record.period:
            raise ShapeError(
                f"series starts at {series.start}, record expects {expected} (period {record.period})")
    for lag, init in reversed(list(zip(steps, record.initial_values))):
        w = _undiff_once(w, np.asarray(init, dtype=float))
    if isinstance(series, TimeSeries):
        start = record.start if record.start is not None else series.start
        return TimeSeries(w, start, series.period)
    return w


def transform(series: TimeSeries, lam, d: int = 0, D: int = 0, s: int = 1):
    """Box-Cox (if ``lam`` is not None) then ``(1-B)**d (1-B**s)**D``."""
    z = series if lam is None else box_cox(series, lam)
    diffs = [(1, d), (s, D)]
    w, record = apply_differences(z, diffs, lam=None if lam is None else _lambda_value(lam))
    return w, record


def restore(w, record: TransformRecord):
    """Inverse of :func:`transform`."""
    z = integrate(w, record)
    return z if record.lam is None else inv_box_cox(z, record.lam)


# -- CSV ---------------------------------------------------------------

def read_csv(path, date_column: str = "date", value_column: str = "value") -> TimeSeries:
    """Read a monthly ``date,value`` CSV with ``YYYY-MM`` dates.

    Rows must be consecutive months; gaps, duplicates and unparseable
    values are reported with their 1-based data-row number.
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"input file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise IngestError("no data rows")
        missing = {date_column, value_column} - set(f.strip() for f in reader.fieldnames)
        if missing:
            raise IngestError(f"missing column(s): {', '.join(sorted(missing))}")
        labels, values = [], []
        for row_no, row in enumerate(reader, start=1):
            row = {k.strip(): (v or "").strip() for k, v in row.items() if k is not None}
            m = _DATE_RE.match(row[date_column])
            if not m or not 1 <= int(m.group(2)) <= 12:
                raise IngestError(f"bad date {row[date_column]!r} (expected YYYY-MM)", row=row_no)
            try:
                value = float(row[value_column])
            except ValueError:
                raise IngestError(f"unparseable value {row[value_column]!r}", row=row_no) from None
            if not math.isfinite(value):
                raise IngestError(f"missing or non-finite value {row[value_column]!r}", row=row_no)
            label = (int(m.group(1)), int(m.group(2)))
            if labels:
                prev = labels[-1]
                step = (label[0] - prev[0]) * 12 + label[1] - prev[1]
                if step == 0:
                    raise IngestError(f"duplicate month {row[date_column]}", row=row_no)
                if step != 1:
                    raise IngestError(
                        f"month {row[date_column]} does not follow {format_label(prev)}", row=row_no)
            labels.append(label)
            values.append(value)
    if not values:
        raise IngestError("no data rows")
    return TimeSeries(values, labels[0], 12)


def write_csv(series: TimeSeries, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "value"])
        for i, v in enumerate(series.values):
            w.writerow([format_label(series.label(i), series.period), repr(float(v))])
