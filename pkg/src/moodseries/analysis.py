"""Period definitions, event windows and alignment with external index series."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DataError, RangeError
from .lexicon import DIMENSIONS

__all__ = [
    "Period",
    "builtin_periods",
    "load_periods",
    "EventWindow",
    "extract_event_window",
    "write_event_window_csv",
    "IndexSeries",
    "load_index",
    "AlignedRow",
    "align_with_index",
    "write_aligned_csv",
    "Annotation",
    "load_annotations",
    "builtin_annotations",
]


@dataclass(frozen=True)
class Period:
    """Named inclusive date interval."""

    name: str
    start: date
    end: date

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"period {self.name}: end {self.end} before start {self.start}")

    def __contains__(self, day):
        return self.start <= day <= self.end

    @property
    def days(self) -> int:
        return (self.end - self.start).days + 1


def _p(name, m1, d1, m2, d2, year=2008):
    return Period(name, date(year, m1, d1), date(year, m2, d2))


# DJIA-II nominally ends on Oct 9, the day DJIA-III starts; Oct 9 goes to
# DJIA-III so the periods stay disjoint. WTI-II's "September 31" is read as
# September 30.
_BUILTIN = {
    "DJIA": (
        _p("DJIA-I", 8, 1, 8, 24),
        _p("DJIA-II", 9, 15, 10, 8),
        _p("DJIA-III", 10, 9, 10, 25),
        _p("DJIA-IV", 12, 1, 12, 20),
    ),
    "WTI": (
        _p("WTI-I", 8, 1, 8, 22),
        _p("WTI-II", 9, 15, 9, 30),
        _p("WTI-III", 10, 1, 11, 21),
        _p("WTI-IV", 11, 22, 12, 16),
    ),
}


def builtin_periods(kind: str) -> list:
    """The four 2008 comparison periods for "DJIA" or "WTI"."""
    try:
        return list(_BUILTIN[kind.upper()])
    except KeyError:
        raise ValueError(f"unknown period set {kind!r}; expected DJIA or WTI") from None


def load_periods(path) -> list:
    """Read ``name,start,end`` rows (ISO dates, header optional)."""
    periods = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].startswith("#"):
                continue
            if lineno == 1 and row[0].strip().lower() == "name":
                continue
            if len(row) != 3:
                raise DataError(f"{path}:{lineno}: expected name,start,end")
            try:
                periods.append(
                    Period(row[0].strip(), date.fromisoformat(row[1].strip()), date.fromisoformat(row[2].strip()))
                )
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    names = [p.name for p in periods]
    if len(set(names)) != len(names):
        raise DataError(f"{path}: duplicate period names")
    return periods


@dataclass(frozen=True)
class EventWindow:
    """Values around an event date, one row per day offset present.

    ``values`` has shape ``(len(offsets), 6)``; offsets that fall outside the
    series are dropped and listed in ``clipped``.
    """

    event: date
    h: int
    offsets: tuple
    values: np.ndarray
    clipped: tuple = field(default=())

    @property
    def is_clipped(self) -> bool:
        return bool(self.clipped)

    def dimension(self, dim) -> np.ndarray:
        return self.values[:, dim.position if hasattr(dim, "position") else dim]


def extract_event_window(series, event: date, h: int = 15) -> EventWindow:
    """Copy ``series`` values at offsets ``-h..+h`` around ``event``.

    Callers normally pass the z-score series.
    """
    if h < 0:
        raise ValueError("h must be >= 0")
    centre = series.index_of(event)
    offsets, clipped = [], []
    for off in range(-h, h + 1):
        if 0 <= centre + off < len(series):
            offsets.append(off)
        else:
            clipped.append(off)
    rows = np.array([series.values[centre + off] for off in offsets])
    rows.flags.writeable = False
    return EventWindow(event, h, tuple(offsets), rows, tuple(clipped))


def write_event_window_csv(window: EventWindow, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["offset"] + [d.label for d in DIMENSIONS])
    for off, row in zip(window.offsets, window.values):
        writer.writerow([off] + ["" if math.isnan(v) else repr(float(v)) for v in row])


@dataclass(frozen=True)
class IndexSeries:
    name: str
    dates: tuple
    values: tuple  # Decimal, kept as read
    units: str = ""

    def __post_init__(self):
        if len(self.dates) != len(self.values):
            raise ValueError("dates and values differ in length")
        for a, b in zip(self.dates, self.dates[1:]):
            if not a < b:
                raise DataError(f"index {self.name}: dates not strictly increasing at {b}")

    def __len__(self):
        return len(self.dates)

    def as_dict(self) -> dict:
        return dict(zip(self.dates, self.values))


def load_index(path, name: Optional[str] = None, units: str = "") -> IndexSeries:
    """Read an index CSV with ``date,value`` columns."""
    path = Path(path)
    dates, values = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].startswith("#"):
                continue
            if lineno == 1 and row[0].strip().lower() == "date":
                continue
            if len(row) < 2:
                raise DataError(f"{path}:{lineno}: expected date,value")
            try:
                dates.append(date.fromisoformat(row[0].strip()))
                values.append(Decimal(row[1].strip()))
            except (ValueError, InvalidOperation):
                raise DataError(f"{path}:{lineno}: bad row {row}") from None
    return IndexSeries(name or path.stem, tuple(dates), tuple(values), units)


@dataclass(frozen=True)
class AlignedRow:
    date: date
    mood: tuple  # six floats, NaN on empty days
    index: Optional[Decimal]


def align_with_index(series, index: IndexSeries, how: str = "inner") -> list:
    """Join mood days with index values.

    ``inner`` keeps days present in both; ``outer`` keeps every series day
    and leaves the index cell empty where the index has no value. Values are
    never interpolated.
    """
    if how not in ("inner", "outer"):
        raise ValueError(f"unknown join {how!r}")
    if not len(series) or not len(index) or index.dates[-1] < series.start or index.dates[0] > series.end:
        raise RangeError(f"index {index.name} does not overlap the series range")
    lookup = index.as_dict()
    rows = []
    for i, d in enumerate(series.dates):
        value = lookup.get(d)
        if value is None and how == "inner":
            continue
        rows.append(AlignedRow(d, tuple(float(v) for v in series.values[i]), value))
    return rows


def write_aligned_csv(rows, fh, index_name: str = "index") -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["date"] + [d.label for d in DIMENSIONS] + [index_name])
    for r in rows:
        writer.writerow(
            [r.date.isoformat()]
            + ["" if math.isnan(v) else repr(v) for v in r.mood]
            + ["" if r.index is None else str(r.index)]
        )


@dataclass(frozen=True)
class Annotation:
    start: date
    end: date
    label: str


def _parse_annotations(text, source):
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise DataError(f"{source}:{lineno}: expected start<TAB>end<TAB>label")
        try:
            start = date.fromisoformat(parts[0].strip())
            end = date.fromisoformat(parts[1].strip()) if parts[1].strip() else start
        except ValueError as exc:
            raise DataError(f"{source}:{lineno}: {exc}") from None
        out.append(Annotation(start, end, parts[2].strip()))
    return out


def load_annotations(path) -> list:
    return _parse_annotations(Path(path).read_text(encoding="utf-8"), str(path))


def builtin_annotations() -> list:
    """The 2008 event timeline, for labelling reports."""
    text = resources.files("moodseries").joinpath("data/timeline_2008.tsv").read_text("utf-8")
    return _parse_annotations(text, "timeline_2008.tsv")


def annotations_between(annotations, start: date, end: date) -> list:
    return [a for a in annotations if a.end >= start and a.start <= end]


def daterange(start: date, end: date):
    d = start
    while d <= end:
        yield d
        d += timedelta(days=1)
