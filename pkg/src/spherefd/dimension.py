"""Box-counting dimension from (box length, box count) series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import NumericError

# r2 must improve by more than this for a point to be dropped
R2_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BoxCountSeries:
    """Box lengths (strictly descending, angstrom) and the boxes they need."""

    lengths: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        lengths = np.asarray(self.lengths, dtype=float).reshape(-1)
        counts = np.asarray(self.counts).reshape(-1)
        if len(lengths) != len(counts):
            raise ValueError("lengths and counts differ in length")
        if len(lengths) < 2:
            raise ValueError("a box-count series needs at least two points")
        if not np.all(lengths > 0):
            raise ValueError("box lengths must be positive")
        if not np.all(np.diff(lengths) < 0):
            raise ValueError("box lengths must be strictly descending")
        if not np.all(counts > 0):
            raise ValueError("box counts must be positive")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "counts", counts.astype(np.int64))

    def __len__(self):
        return len(self.lengths)

    @property
    def log_inv_lengths(self) -> np.ndarray:
        return -np.log10(self.lengths)

    @property
    def log_counts(self) -> np.ndarray:
        return np.log10(self.counts.astype(float))

    def window(self, start: int, stop: int) -> "BoxCountSeries":
        return BoxCountSeries(self.lengths[start:stop], self.counts[start:stop])


@dataclass(frozen=True)
class OlsFit:
    slope: float
    intercept: float
    r2: float
    ci: tuple[float, float]
    stderr: float
    n: int


def ols_fit(x, y, conf_lvl: float = 95.0) -> OlsFit:
    """Least-squares line through (x, y) with a Student-t slope interval."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n < 2:
        raise NumericError("need at least two points to fit a line")
    if not 0 < conf_lvl < 100:
        raise ValueError(f"confidence level must be in (0, 100), got {conf_lvl}")
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise NumericError("all box lengths are equal; slope undefined")
    slope = float(dx @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    # round-off sized residuals count as an exact fit
    if ss_res <= n * (1e-12 * max(1.0, float(np.abs(y).max()))) ** 2:
        ss_res = 0.0
    dy = y - y.mean()
    ss_tot = float(dy @ dy)
    r2 = 1.0 if ss_tot == 0.0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    if n == 2:
        return OlsFit(slope, intercept, r2, (-np.inf, np.inf), np.nan, n)
    stderr = np.sqrt(ss_res / (n - 2) / sxx)
    half = float(stats.t.ppf(1.0 - (1.0 - conf_lvl / 100.0) / 2.0, n - 2)) * stderr
    return OlsFit(slope, intercept, r2, (slope - half, slope + half), float(stderr), n)


def ols_log_log(series: BoxCountSeries, conf_lvl: float = 95.0) -> OlsFit:
    """Regress log N against log(1/length); the slope is the dimension."""
    return ols_fit(series.log_inv_lengths, series.log_counts, conf_lvl)


@dataclass(frozen=True)
class FitResult:
    d_box: float
    ci: tuple[float, float]
    r2: float
    l_min: float
    l_max: float
    points_used: int
    intercept: float
    start: int
    stop: int

    @property
    def in_window(self):
        return slice(self.start, self.stop)


def trim_extremes(series: BoxCountSeries, min_sample: int) -> tuple[int, int]:
    """Window left after dropping extreme-size boxes.

    Leading (largest) lengths are dropped while their count equals the next
    one, trailing (smallest) lengths while the local log-log slope to the
    previous point is below 1, i.e. the counts have saturated. The window
    never shrinks below `min_sample` points.
    """
    x, y = series.log_inv_lengths, series.log_counts
    c = series.counts
    lo, hi = 0, len(series)
    while hi - lo > min_sample and c[lo] == c[lo + 1]:
        lo += 1
    while hi - lo > min_sample and (y[hi - 1] - y[hi - 2]) < (x[hi - 1] - x[hi - 2]):
        hi -= 1
    return lo, hi


def fit_slope(series: BoxCountSeries, min_sample: int = 6, conf_lvl: float = 95.0,
              trim_len: bool = True) -> FitResult:
    """Fit the dimension over an automatically chosen range of box lengths.

    Points are removed from the small-box end while that raises r2, then
    from the large-box end while that raises r2. Ties stop the removal, so
    an exact power law keeps its full window.
    """
    n = len(series)
    if min_sample < 2:
        raise ValueError("min_sample must be >= 2")
    if n < min_sample:
        raise NumericError(f"series has {n} points, fewer than min_sample={min_sample}")
    x, y = series.log_inv_lengths, series.log_counts
    lo, hi = trim_extremes(series, min_sample) if trim_len else (0, n)

    cur = ols_fit(x[lo:hi], y[lo:hi], conf_lvl)
    while hi - lo > min_sample:
        cand = ols_fit(x[lo:hi - 1], y[lo:hi - 1], conf_lvl)
        if not cand.r2 > cur.r2 + R2_TOL:
            break
        hi, cur = hi - 1, cand
    while hi - lo > min_sample:
        cand = ols_fit(x[lo + 1:hi], y[lo + 1:hi], conf_lvl)
        if not cand.r2 > cur.r2 + R2_TOL:
            break
        lo, cur = lo + 1, cand

    return FitResult(cur.slope, cur.ci, cur.r2, float(series.lengths[hi - 1]),
                     float(series.lengths[lo]), hi - lo, cur.intercept, lo, hi)


def dimension_from_counts(series: BoxCountSeries, min_sample: int = 6,
                          conf_lvl: float = 95.0, trim_len: bool = True) -> FitResult:
    return fit_slope(series, min_sample, conf_lvl, trim_len)
