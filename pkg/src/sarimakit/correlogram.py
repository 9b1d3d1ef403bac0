"""Sample ACF / PACF with white-noise bands, plus CSV and SVG renderings."""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DegenerateError, LengthError
from .special import normal_quantile


@dataclass(frozen=True)
class Correlogram:
    kind: str  # "ACF" or "PACF"
    values: np.ndarray  # lags 1..K
    band: float
    n: int
    level: float = 0.95
    clipped: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def lags(self) -> np.ndarray:
        return np.arange(1, self.values.size + 1)

    @property
    def max_lag(self) -> int:
        return int(self.values.size)

    def spikes(self) -> list[int]:
        """Lags whose value lies strictly outside the band."""
        return [int(k) for k in self.lags[np.abs(self.values) > self.band]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("lag,value,band\n")
        for k, v in zip(self.lags, self.values):
            buf.write(f"{int(k)},{float(v)!r},{float(self.band)!r}\n")
        return buf.getvalue()


def default_max_lag(n: int, period: int = 1) -> int:
    """``floor(10 log10 n)`` capped at ``n - 1``; at least two seasons for seasonal data."""
    k = int(math.floor(min(10.0 * math.log10(n), n - 1)))
    if period > 1:
        k = max(k, 2 * period)
    return max(1, min(k, n - 1))


def band(n: int, level: float = 0.95) -> float:
    if n < 2:
        raise ArgumentError(f"band needs n >= 2, got {n}")
    if not 0.0 <= level < 1.0:
        raise ArgumentError(f"level must lie in (0, 1), got {level}")
    if level == 0.0:
        return 0.0
    return normal_quantile(0.5 * (1.0 + level)) / math.sqrt(n)


def _values(series):
    return np.asarray(getattr(series, "values", series), dtype=float)


def autocorrelations(y, max_lag: int) -> np.ndarray:
    """r_0..r_max_lag with the biased (divide-by-n) autocovariance."""
    y = _values(y)
    n = y.size
    if not 0 < max_lag < n:
        raise LengthError(f"max_lag must satisfy 0 < max_lag < n = {n}, got {max_lag}")
    x = y - y.mean()
    denom = float(x @ x)
    if denom <= n * (1e-13 * float(np.abs(y).max())) ** 2:
        raise DegenerateError("series has zero variance; autocorrelation undefined")
    r = np.empty(max_lag + 1)
    r[0] = 1.0
    for k in range(1, max_lag + 1):
        r[k] = float(x[k:] @ x[:-k]) / denom
    return r


def acf(series, max_lag: int, level: float = 0.95) -> Correlogram:
    r = autocorrelations(series, max_lag)
    n = _values(series).size
    return Correlogram("ACF", r[1:], band(n, level), n, level)


def durbin_levinson(r: np.ndarray) -> tuple[np.ndarray, bool]:
    """Partial autocorrelations from autocorrelations ``r[0..K]``.

    Returns ``(pacf[1..K], clipped)``; ``clipped`` flags a recursion step
    where rounding pushed ``|phi_kk|`` to 1 or beyond.
    """
    K = r.size - 1
    out = np.empty(K)
    phi = np.zeros(0)
    v = r[0]
    clipped = False
    for k in range(1, K + 1):
        num = r[k] - (phi @ r[k - 1:0:-1] if k > 1 else 0.0)
        a = num / v
        if not abs(a) < 1.0:
            a = math.copysign(1.0 - 1e-12, a)
            clipped = True
        phi = np.concatenate([phi - a * phi[::-1], [a]])
        v *= 1.0 - a * a
        out[k - 1] = a
    return out, clipped


def pacf(series, max_lag: int, level: float = 0.95) -> Correlogram:
    r = autocorrelations(series, max_lag)
    values, clipped = durbin_levinson(r)
    if clipped:
        warnings.warn("Durbin-Levinson recursion reached |phi_kk| >= 1; value clipped",
                      RuntimeWarning, stacklevel=2)
    n = _values(series).size
    return Correlogram("PACF", values, band(n, level), n, level, clipped=clipped)


def svg_stem_plot(cg: Correlogram, title: str = "", width: int = 640, height: int = 240) -> str:
    """Self-contained SVG stem plot: one <line> per lag plus the band lines."""
    left, right, top, bottom = 40, 10, 24, 24
    pw, ph = width - left - right, height - top - bottom
    K = cg.max_lag

    def xpos(k):
        return left + pw * k / (K + 1)

    def ypos(v):
        return top + ph * (1.0 - v) / 2.0

    y0 = ypos(0.0)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="16" font-family="sans-serif" font-size="12">'
        f'{_escape(title or cg.kind)} (n={cg.n}, band=±{cg.band:.4f})</text>',
        f'<line class="axis" x1="{left}" y1="{y0:.2f}" x2="{left + pw}" y2="{y0:.2f}" stroke="black"/>',
    ]
    for b in (cg.band, -cg.band):
        yb = ypos(b)
        parts.append(f'<line class="band" x1="{left}" y1="{yb:.2f}" x2="{left + pw}" y2="{yb:.2f}" '
                     f'stroke="blue" stroke-dasharray="4,3"/>')
    for k, v in zip(cg.lags, cg.values):
        color = "red" if abs(v) > cg.band else "black"
        parts.append(f'<line class="stem" data-lag="{k}" x1="{xpos(k):.2f}" y1="{y0:.2f}" '
                     f'x2="{xpos(k):.2f}" y2="{ypos(v):.2f}" stroke="{color}" stroke-width="2"/>')
    for k in range(0, K + 1, max(1, K // 8)):
        parts.append(f'<text x="{xpos(k):.2f}" y="{height - 8}" font-family="sans-serif" '
                     f'font-size="10" text-anchor="middle">{k}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def svg_line_plot(values, title: str = "", width: int = 640, height: int = 240) -> str:
    y = np.asarray(values, dtype=float)
    left, right, top, bottom = 40, 10, 24, 16
    pw, ph = width - left - right, height - top - bottom
    lo, hi = float(y.min()), float(y.max())
    span = hi - lo if hi > lo else 1.0
    n = max(y.size - 1, 1)
    pts = " ".join(f"{left + pw * i / n:.2f},{top + ph * (1 - (v - lo) / span):.2f}"
                   for i, v in enumerate(y))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>\n'
        f'<text x="{left}" y="16" font-family="sans-serif" font-size="12">{_escape(title)}</text>\n'
        f'<polyline fill="none" stroke="black" points="{pts}"/>\n</svg>\n'
    )


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
