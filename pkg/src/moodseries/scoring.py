"""Lexicon scoring of term sets into six-dimensional mood vectors."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime
from functools import lru_cache
from typing import Iterable, Optional

from .lexicon import DIMENSIONS, Lexicon
from .textnorm import (
    DEFAULT_FILTER,
    CandidateFilter,
    RawMessage,
    StopwordList,
    extract_terms,
)

__all__ = [
    "MoodVector",
    "ScoredMessage",
    "score",
    "score_counts",
    "occurrence_counts",
    "unit_normalize",
    "score_message",
    "write_scored_csv",
    "SCORED_COLUMNS",
]

COUNTS = "counts"
UNIT = "unit"


@dataclass(frozen=True)
class MoodVector:
    """Six components in dimension order; ``kind`` is "counts" or "unit"."""

    values: tuple
    kind: str = COUNTS

    def __post_init__(self):
        if len(self.values) != len(DIMENSIONS):
            raise ValueError(f"mood vector needs {len(DIMENSIONS)} components")

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __len__(self):
        return len(self.values)

    @property
    def norm(self) -> float:
        return math.sqrt(math.fsum(v * v for v in self.values))

    def is_zero(self) -> bool:
        return not any(self.values)


@dataclass(frozen=True)
class ScoredMessage:
    timestamp: datetime
    vector: MoodVector  # unit
    match_count: int
    counts: Optional[tuple] = None

    @property
    def day(self):
        return self.timestamp.date()


def score_counts(terms: Iterable[str], stems: tuple) -> tuple:
    """Raw counts as a plain tuple; ``stems`` is ``Lexicon.stems``."""
    distinct = set(terms)
    return tuple(len(distinct & p) for p in stems)


def score(terms: Iterable[str], lexicon: Lexicon) -> MoodVector:
    """Count distinct stems of ``terms`` falling in each dimension's set.

    A stem repeated within one message counts once; a stem shared by two
    dimensions counts in both.
    """
    return MoodVector(score_counts(terms, lexicon.stems), COUNTS)


def occurrence_counts(terms: Iterable[str], lexicon: Lexicon) -> tuple:
    """Diagnostic per-dimension counts without de-duplication."""
    terms = list(terms)
    return tuple(sum(1 for t in terms if t in p) for p in lexicon.stems)


@lru_cache(maxsize=4096)
def _unit_from_counts(counts):
    norm = math.sqrt(sum(c * c for c in counts))
    return tuple(c / norm for c in counts)


def unit_normalize(m: MoodVector) -> Optional[MoodVector]:
    """``m / ||m||``, or None for the zero vector (no mood signal)."""
    if m.is_zero():
        return None
    if all(isinstance(v, int) for v in m.values):
        return MoodVector(_unit_from_counts(tuple(m.values)), UNIT)
    norm = m.norm
    return MoodVector(tuple(v / norm for v in m.values), UNIT)


def score_message(
    msg: RawMessage,
    stopwords: StopwordList | None,
    lexicon: Lexicon,
    candidate_filter: CandidateFilter = DEFAULT_FILTER,
) -> Optional[ScoredMessage]:
    """Filter, tokenize and score one message.

    Returns None when the text is not a mood candidate or matches nothing.
    """
    if not candidate_filter(msg.text):
        return None
    counts = score_counts(extract_terms(msg.text, stopwords), lexicon.stems)
    if not any(counts):
        return None
    return ScoredMessage(msg.timestamp, MoodVector(_unit_from_counts(counts), UNIT), sum(counts), counts)


SCORED_COLUMNS = ["datetime"] + [d.label for d in DIMENSIONS] + ["match_count"]


def format_timestamp(ts: datetime) -> str:
    return ts.strftime("%Y-%m-%dT%H:%M:%S") + (f".{ts.microsecond:06d}" if ts.microsecond else "") + "Z"


def write_scored_csv(messages: Iterable[ScoredMessage], fh) -> int:
    """Write the scored-message dump; returns the number of rows."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SCORED_COLUMNS)
    n = 0
    for m in messages:
        writer.writerow(
            [format_timestamp(m.timestamp)] + [f"{v:.9f}" for v in m.vector] + [m.match_count]
        )
        n += 1
    return n
