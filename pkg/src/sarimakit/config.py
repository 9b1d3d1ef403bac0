"""Run configuration: a strict JSON file, overridden by command-line flags."""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ArgumentError
from .sarima import ModelSpec
from .series import TimeSeries

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


@dataclass
class RunConfig:
    input: str | None = None
    date_column: str = "date"
    value_column: str = "value"
    split: int | str | None = None  # training length, or last training month "YYYY-MM"
    transform: str | float = "auto"  # "auto", "log", "none" or a fixed lambda
    lambda_grid: list = field(default_factory=lambda: [-2.0, 2.0, 0.01])
    spec: str | None = None
    grid: dict = field(default_factory=lambda: {"p": [0, 1, 2], "q": [0, 1, 2], "P": [0, 1],
                                                "Q": [0, 1, 2], "d": 1, "D": 0, "s": 12})
    adf_regression: str = "drift"
    adf_lags: int | str = "auto"
    lb_h: int | None = None
    max_lag: int | None = None
    level: float = 0.95
    alpha_sig: float = 0.05
    lb_alpha: float = 0.05
    mcleod_alpha: float = 0.05
    h: int = 24
    out: str = "out"
    model: str | None = None
    seed: int = 0
    workers: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ArgumentError(f"unknown configuration key(s): {', '.join(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise ArgumentError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ArgumentError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ArgumentError("config file must hold a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        if not 0.0 < float(self.level) < 1.0:
            raise ArgumentError(f"level must lie in (0, 1), got {self.level}")
        if int(self.h) < 1:
            raise ArgumentError(f"h must be >= 1, got {self.h}")
        if self.adf_regression not in ("none", "drift", "trend"):
            raise ArgumentError(f"adf_regression must be none, drift or trend, got {self.adf_regression!r}")
        self.lam  # noqa: B018 - parses the transform setting
        if self.spec is not None:
            ModelSpec.parse(self.spec)
        extra = set(self.grid) - {"p", "q", "P", "Q", "d", "D", "s"}
        if extra:
            raise ArgumentError(f"unknown grid key(s): {', '.join(sorted(extra))}")
        if len(self.lambda_grid) != 3:
            raise ArgumentError("lambda_grid must be [lo, hi, step]")

    @property
    def lam(self):
        """``"auto"``, ``None`` (no transform) or a float exponent."""
        t = self.transform
        if isinstance(t, str):
            key = t.strip().lower()
            if key == "auto":
                return "auto"
            if key == "none":
                return None
            if key == "log":
                return 0.0
            try:
                return float(key)
            except ValueError:
                raise ArgumentError(f"transform must be auto, log, none or a number, got {t!r}") from None
        return float(t)

    def model_spec(self) -> ModelSpec:
        if self.spec is None:
            raise ArgumentError("a model spec is required (--spec p,d,q,P,D,Q,s)")
        return ModelSpec.parse(self.spec)

    def split_series(self, series: TimeSeries):
        """``(train, test)``; ``test`` is None when no split is configured."""
        s = self.split
        if s is None:
            return series, None
        if isinstance(s, str) and not s.lstrip("-").isdigit():
            m = _MONTH_RE.match(s)
            if not m:
                raise ArgumentError(f"split must be a count or YYYY-MM, got {s!r}")
            n_train = series.index_of((int(m.group(1)), int(m.group(2)))) + 1
        else:
            n_train = int(s)
            if n_train < 0:
                n_train = len(series) + n_train
        if n_train == len(series):
            return series, None
        return series.split(n_train)

    def grid_ranges(self):
        g = dict(RunConfig().grid)
        g.update(self.grid)
        return ([int(x) for x in g["p"]], [int(x) for x in g["q"]], [int(x) for x in g["P"]],
                [int(x) for x in g["Q"]], int(g["d"]), int(g["D"]), int(g["s"]))


def parse_grid(text: str) -> dict:
    """``"p=1,2;q=0,1;P=0,1;Q=0,2;d=1;D=0;s=12"`` -> grid dict."""
    grid = {}
    for part in filter(None, (x.strip() for x in text.split(";"))):
        if "=" not in part:
            raise ArgumentError(f"grid entry {part!r} must look like key=values")
        key, vals = (x.strip() for x in part.split("=", 1))
        try:
            nums = [int(v) for v in vals.split(",") if v.strip()]
        except ValueError:
            raise ArgumentError(f"grid entry {part!r} must hold integers") from None
        if key in ("d", "D", "s"):
            if len(nums) != 1:
                raise ArgumentError(f"grid key {key} takes a single value")
            grid[key] = nums[0]
        else:
            grid[key] = nums
    return grid
