"""Message normalization: term extraction and the mood-candidate filter.

A message is split on whitespace, stripped of every character that is not an
ASCII letter or digit, lowercased, filtered against a stopword list and
Porter-stemmed, in that order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, TimestampError
from .porter import stem as porter_stem

__all__ = [
    "RawMessage",
    "parse_timestamp",
    "StopwordList",
    "TermSet",
    "CandidateFilter",
    "DEFAULT_FILTER",
    "load_stopwords",
    "default_stopwords",
    "tokenize",
    "extract_terms",
    "is_mood_candidate",
    "porter_stem",
]

# \s and str.split() agree on every code point, so stripping the whole text at
# once is equivalent to stripping token by token after the split.
_NON_ALNUM = re.compile(r"[^A-Za-z0-9\s]+")
_EDGE_PUNCT = re.compile(r"^[\W_]+|[\W_]+$")
_APOSTROPHES = str.maketrans("", "", "'’‘`")
_VALID_TERM = re.compile(r"[a-z0-9]+")


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime.

    Naive timestamps are taken to be UTC already; a trailing ``Z`` is accepted.
    """
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError:
        raise TimestampError(f"unparseable timestamp {value!r}") from None
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


@dataclass(frozen=True)
class RawMessage:
    timestamp: datetime
    text: str

    @classmethod
    def parse(cls, timestamp: str, text: str) -> "RawMessage":
        return cls(parse_timestamp(timestamp), text)

    @property
    def day(self):
        """UTC calendar day of the message."""
        return self.timestamp.date()


@dataclass(frozen=True)
class StopwordList:
    entries: frozenset
    source_id: str = "custom"

    def __len__(self):
        return len(self.entries)

    def __contains__(self, word):
        return word in self.entries


@dataclass(frozen=True)
class TermSet:
    """Ordered stems of one message; duplicates are kept."""

    terms: tuple
    source_token_count: int = 0

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def distinct(self) -> frozenset:
        return frozenset(self.terms)


def load_stopwords(path: str | Path) -> StopwordList:
    """Read a stopword file: one lowercase word per line, ``#`` comments."""
    text = Path(path).read_text(encoding="utf-8")
    return _parse_stopwords(text, source_id=str(path))


def _parse_stopwords(text, source_id):
    entries = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        word = raw.split("#", 1)[0].strip()
        if not word:
            continue
        if not _VALID_TERM.fullmatch(word):
            raise ConfigError(
                f"{source_id}:{lineno}: stopword {word!r} is not lowercase alphanumeric"
            )
        entries.add(word)
    if not entries:
        raise ConfigError(f"{source_id}: stopword list is empty")
    return StopwordList(frozenset(entries), source_id)


_DEFAULT_STOPWORDS = None


def default_stopwords() -> StopwordList:
    """The shipped 214-entry English list."""
    global _DEFAULT_STOPWORDS
    if _DEFAULT_STOPWORDS is None:
        text = resources.files("moodseries").joinpath("data/stopwords.txt").read_text("utf-8")
        _DEFAULT_STOPWORDS = _parse_stopwords(text, source_id="moodseries:default-214")
    return _DEFAULT_STOPWORDS


def extract_terms(text: str, stopwords: StopwordList | frozenset | None = None) -> list:
    """Fast path of :func:`tokenize` returning a plain list of stems."""
    entries = _entries(stopwords)
    words = _NON_ALNUM.sub("", text).lower().split()
    return [porter_stem(w) for w in words if w not in entries]


def tokenize(text: str, stopwords: StopwordList | frozenset | None = None) -> TermSet:
    """Convert raw message text to a :class:`TermSet`.

    Tokens that end up empty after stripping are dropped; stopwords are
    compared on the stripped, lowercased form before stemming.

    >>> tokenize("Feeling too lazy to go to the shops and get something to eat").terms
    ('feel', 'lazi', 'shop', 'someth', 'eat')
    """
    return TermSet(tuple(extract_terms(text, stopwords)), len(text.split()))


def _entries(stopwords):
    if stopwords is None:
        return default_stopwords().entries
    if isinstance(stopwords, StopwordList):
        return stopwords.entries
    return stopwords


def _match_form(token):
    return _EDGE_PUNCT.sub("", token).translate(_APOSTROPHES)


@dataclass(frozen=True)
class CandidateFilter:
    """Retention patterns plus exclusion substrings.

    ``substring`` patterns match anywhere in the lowercased text; ``token``
    patterns must equal a whole whitespace-delimited token once edge
    punctuation and apostrophes are removed (so "I'm" and "Im" both read as
    "im"). Exclusions are case-insensitive substrings.
    """

    substrings: tuple = ("feel",)
    tokens: frozenset = frozenset({"im", "am", "being", "be"})
    exclude: tuple = ("http:", "www.")

    @classmethod
    def from_patterns(cls, patterns: Iterable[dict], exclude: Sequence[str] = ("http:", "www.")):
        """Build from ``[{"pattern": ..., "mode": "substring" | "token"}, ...]``."""
        subs, toks = [], set()
        for entry in patterns:
            pattern = str(entry["pattern"]).lower()
            mode = entry.get("mode", "token")
            if mode == "substring":
                if pattern not in subs:
                    subs.append(pattern)
            elif mode == "token":
                toks.add(_match_form(pattern))
            else:
                raise ConfigError(f"unknown pattern mode {mode!r}")
        if not subs and not toks:
            raise ConfigError("candidate filter has no retention patterns")
        return cls(tuple(subs), frozenset(toks), tuple(e.lower() for e in exclude))

    def __call__(self, text: str) -> bool:
        if not text:
            return False
        lowered = text.lower()
        for bad in self.exclude:
            if bad in lowered:
                return False
        for sub in self.substrings:
            if sub in lowered:
                return True
        if self.tokens:
            for tok in lowered.split():
                if _match_form(tok) in self.tokens:
                    return True
        return False


DEFAULT_FILTER = CandidateFilter()


def is_mood_candidate(text: str, candidate_filter: CandidateFilter = DEFAULT_FILTER) -> bool:
    """True if the text looks like a first-person mood statement and is not a link."""
    return candidate_filter(text)
