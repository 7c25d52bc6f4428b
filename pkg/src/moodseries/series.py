"""Daily mood series: aggregation, sliding-window statistics, normalization.

Aggregation is exact with respect to input order. Each day keeps a histogram
of the unit vectors seen (integer counts keyed by the vector), histograms
merge by integer addition, and the daily mean is computed with ``math.fsum``,
which is correctly rounded. Any partition, shuffle or worker count therefore
yields bit-identical series.
"""

from __future__ import annotations

import csv
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Iterable, Optional

import numpy as np

from .errors import DataError, RangeError
from .lexicon import DIMENSIONS

__all__ = [
    "RAW",
    "ZSCORE",
    "VARIANCE",
    "DailySlice",
    "MoodSeries",
    "WindowStats",
    "DailyAccumulator",
    "aggregate_daily",
    "window_stats",
    "zscore_normalize",
    "variance_normalize",
    "write_series_csv",
    "read_series_csv",
    "DEFAULT_WINDOW",
]

log = logging.getLogger(__name__)

RAW = "raw"
ZSCORE = "zscore"
VARIANCE = "variance"
KINDS = (RAW, ZSCORE, VARIANCE)
DEFAULT_WINDOW = 30
NDIM = len(DIMENSIONS)


@dataclass(frozen=True)
class DailySlice:
    date: date
    message_count: int
    vector: Optional[tuple]  # None when the day is empty
    degenerate: tuple = (False,) * NDIM

    @property
    def empty(self) -> bool:
        return self.vector is None


def _frozen(arr):
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


class MoodSeries:
    """Contiguous per-day six-dimensional series.

    ``values`` is an ``(n_days, 6)`` float array with NaN rows for empty
    days; ``degenerate`` is an ``(n_days, 6)`` boolean mask set where the
    normalizing window had no usable spread. Arrays are read-only.
    """

    def __init__(self, start, counts, values, kind=RAW, k=None, degenerate=None):
        counts = np.asarray(counts, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64).reshape(len(counts), NDIM)
        if kind not in KINDS:
            raise ValueError(f"unknown series kind {kind!r}")
        if kind != RAW and (k is None or k < 1):
            raise ValueError("normalized series need a window half-width k >= 1")
        if np.any(counts < 0):
            raise ValueError("negative message count")
        if np.any(np.isnan(values[counts > 0])):
            raise ValueError("non-empty day with undefined value")
        if degenerate is None:
            degenerate = np.zeros((len(counts), NDIM), dtype=bool)
        self.start = start
        self.counts = _frozen(counts)
        self.values = _frozen(np.where((counts > 0)[:, None], values, np.nan))
        self.kind = kind
        self.k = None if kind == RAW else int(k)
        self.degenerate = _frozen(np.asarray(degenerate, dtype=bool))

    def __len__(self):
        return len(self.counts)

    def __repr__(self):
        return f"MoodSeries({self.kind}, {self.start}..{self.end}, k={self.k})"

    def __eq__(self, other):
        if not isinstance(other, MoodSeries):
            return NotImplemented
        return (
            self.start == other.start
            and self.kind == other.kind
            and self.k == other.k
            and np.array_equal(self.counts, other.counts)
            and np.array_equal(self.values, other.values, equal_nan=True)
            and np.array_equal(self.degenerate, other.degenerate)
        )

    @property
    def end(self) -> Optional[date]:
        if not len(self):
            return None
        return self.start + timedelta(days=len(self) - 1)

    @property
    def dates(self) -> list:
        return [self.start + timedelta(days=i) for i in range(len(self))]

    @property
    def nonempty(self) -> np.ndarray:
        return self.counts > 0

    def index_of(self, day: date) -> int:
        i = (day - self.start).days
        if not 0 <= i < len(self):
            raise RangeError(f"{day} outside series range {self.start}..{self.end}")
        return i

    def __contains__(self, day):
        return 0 <= (day - self.start).days < len(self)

    def column(self, dim) -> np.ndarray:
        """Values of one dimension (position or MoodDimension)."""
        pos = dim.position if hasattr(dim, "position") else int(dim)
        return self.values[:, pos]

    def slices(self):
        for i, d in enumerate(self.dates):
            vec = None if self.counts[i] == 0 else tuple(float(v) for v in self.values[i])
            yield DailySlice(d, int(self.counts[i]), vec, tuple(bool(b) for b in self.degenerate[i]))

    def between(self, start: date, end: date) -> "np.ndarray":
        """Rows of the non-empty days in [start, end], inclusive."""
        lo, hi = self.index_of(start), self.index_of(end)
        rows = self.values[lo : hi + 1]
        return rows[self.counts[lo : hi + 1] > 0]


class DailyAccumulator:
    """Mergeable per-day histogram of unit vectors.

    ``merge`` is commutative and associative (integer addition), so partial
    accumulators from any number of workers combine to the same state.
    """

    def __init__(self):
        self.days = defaultdict(Counter)

    def add(self, day: date, vector: tuple, n: int = 1):
        self.days[day][tuple(vector)] += n

    def merge(self, other: "DailyAccumulator") -> "DailyAccumulator":
        for day, hist in other.days.items():
            self.days[day].update(hist)
        return self

    def total(self) -> int:
        return sum(sum(h.values()) for h in self.days.values())

    def day_counts(self) -> dict:
        return {d: sum(h.values()) for d, h in sorted(self.days.items())}

    def span(self):
        if not self.days:
            return None
        return min(self.days), max(self.days)

    def finalize(self, start: Optional[date] = None, end: Optional[date] = None):
        """Build the raw series over [start, end]; returns (series, skipped).

        Missing bounds default to the observed span. ``skipped`` counts
        messages outside the range.
        """
        span = self.span()
        if start is None or end is None:
            if span is None:
                return MoodSeries(start, [], np.empty((0, NDIM))), 0
            start = start or span[0]
            end = end or span[1]
        if end < start:
            raise RangeError(f"reversed date range {start}..{end}")
        n = (end - start).days + 1
        counts = np.zeros(n, dtype=np.int64)
        values = np.full((n, NDIM), np.nan)
        skipped = 0
        for day, hist in self.days.items():
            total = sum(hist.values())
            i = (day - start).days
            if not 0 <= i < n:
                skipped += total
                continue
            counts[i] = total
            items = list(hist.items())
            for d in range(NDIM):
                values[i, d] = math.fsum(vec[d] * c for vec, c in items) / total
        if skipped:
            log.warning("%d scored messages outside %s..%s skipped", skipped, start, end)
        return MoodSeries(start, counts, values), skipped


def aggregate_daily(scored: Iterable, start: Optional[date] = None, end: Optional[date] = None) -> MoodSeries:
    """Average the unit vectors of each UTC day.

    ``scored`` yields objects with ``day`` and ``vector`` attributes
    (``ScoredMessage``) or ``(date, vector)`` pairs. Out-of-range messages
    are skipped and tallied in ``series.skipped``.
    """
    if start is not None and end is not None and end < start:
        raise RangeError(f"reversed date range {start}..{end}")
    acc = DailyAccumulator()
    for item in scored:
        if isinstance(item, tuple):
            day, vec = item
        else:
            day, vec = item.day, item.vector
        acc.add(day, tuple(vec))
    series, skipped = acc.finalize(start, end)
    series.skipped = skipped
    return series


@dataclass(frozen=True)
class WindowStats:
    center: date
    k: int
    mean: np.ndarray
    std: np.ndarray  # NaN when degenerate
    n: int  # non-empty days in the window

    @property
    def degenerate(self) -> bool:
        return self.n < 2


def _window(values, mask, i, k):
    lo = max(0, i - k)
    hi = min(len(mask), i + k + 1)
    rows = values[lo:hi][mask[lo:hi]]
    n = len(rows)
    if n == 0:
        return np.full(NDIM, np.nan), np.full(NDIM, np.nan), 0
    mean = rows.mean(axis=0)
    if n < 2:
        return mean, np.full(NDIM, np.nan), n
    std = rows.std(axis=0, ddof=1)
    # identical values: exact zero regardless of rounding in the mean
    std[np.ptp(rows, axis=0) == 0] = 0.0
    return mean, std, n


def window_stats(series: MoodSeries, day: date, k: int = DEFAULT_WINDOW) -> WindowStats:
    """Mean and sample std over the non-empty days in [day-k, day+k].

    The window is truncated at the series edges.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    i = series.index_of(day)
    mean, std, n = _window(series.values, series.nonempty, i, k)
    return WindowStats(day, k, mean, std, n)


def _normalize(series, k, subtract_mean, kind):
    if series.kind != RAW:
        raise ValueError(f"expected a raw series, got {series.kind}")
    if k < 1:
        raise ValueError("k must be >= 1")
    values = series.values
    mask = series.nonempty
    out = np.full_like(values, np.nan)
    degenerate = np.zeros(values.shape, dtype=bool)
    for i in np.flatnonzero(mask):
        mean, std, _ = _window(values, mask, i, k)
        bad = ~(std > 0)  # also catches NaN from windows with one day
        num = values[i] - mean if subtract_mean else values[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            out[i] = np.where(bad, 0.0, num / std)
        degenerate[i] = bad
    return MoodSeries(series.start, series.counts, out, kind=kind, k=k, degenerate=degenerate)


def zscore_normalize(series: MoodSeries, k: int = DEFAULT_WINDOW) -> MoodSeries:
    """Per-day z-scores against the local +-k day window.

    Days whose window has zero spread (or fewer than two days) get 0 and a
    degenerate flag.
    """
    return _normalize(series, k, True, ZSCORE)


def variance_normalize(series: MoodSeries, k: int = DEFAULT_WINDOW) -> MoodSeries:
    """Divide each day by the local window's std, keeping the level."""
    return _normalize(series, k, False, VARIANCE)


SERIES_COLUMNS = ["date", "message_count"] + [d.label for d in DIMENSIONS] + ["kind", "k", "degenerate"]


def _fmt(v, decimals):
    if math.isnan(v):
        return ""
    if decimals is None:
        return repr(float(v))
    return f"{v:.{decimals}f}"


def write_series_csv(series: MoodSeries, fh, decimals: Optional[int] = None) -> None:
    """Write a series as CSV.

    With the default ``decimals=None`` values are written in shortest
    round-trip form, so reading the file back gives an identical series.
    """
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SERIES_COLUMNS)
    k = "" if series.k is None else series.k
    for i, d in enumerate(series.dates):
        mask = "".join("1" if b else "0" for b in series.degenerate[i])
        writer.writerow(
            [d.isoformat(), int(series.counts[i])]
            + [_fmt(v, decimals) for v in series.values[i]]
            + [series.kind, k, mask]
        )


def read_series_csv(fh) -> MoodSeries:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header != SERIES_COLUMNS:
        raise DataError(f"unexpected series header {header}")
    dates, counts, values, degenerate = [], [], [], []
    kind, k = None, None
    for lineno, row in enumerate(reader, 2):
        if len(row) != len(SERIES_COLUMNS):
            raise DataError(f"series line {lineno}: expected {len(SERIES_COLUMNS)} fields")
        try:
            dates.append(date.fromisoformat(row[0]))
            counts.append(int(row[1]))
            values.append([float(v) if v else math.nan for v in row[2 : 2 + NDIM]])
            kind = row[2 + NDIM]
            k = int(row[3 + NDIM]) if row[3 + NDIM] else None
            degenerate.append([c == "1" for c in row[4 + NDIM]])
        except ValueError as exc:
            raise DataError(f"series line {lineno}: {exc}") from None
    if not dates:
        raise DataError("series file has no rows")
    for a, b in zip(dates, dates[1:]):
        if (b - a).days != 1:
            raise DataError(f"series dates not contiguous at {b}")
    return MoodSeries(dates[0], counts, values, kind=kind, k=k, degenerate=degenerate)
