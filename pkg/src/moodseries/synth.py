"""Deterministic synthetic corpora with known funnel counts.

Each day emits ``per_day`` lines: a fixed share of malformed lines,
non-candidates (plain chatter or links), candidates that match no lexicon
term, and scored candidates carrying exactly one lexicon adjective. The
dimension of each scored message is drawn from weights that follow a weekly
cycle, alternating phase between dimensions, so all cycles cross their mean on
days a multiple of seven days away from ``cycle_origin`` (default: ``start``).

Injections append an extra adjective of one dimension to a fraction of one
day's scored messages.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from typing import Optional

from .lexicon import DIMENSIONS, Lexicon, MoodDimension, demo_lexicon
from .porter import stem
from .textnorm import default_stopwords

__all__ = ["Injection", "SynthCounts", "generate_corpus"]

_FILLERS = ["today", "tonight", "again", "right", "now", "lol", "ugh", "really", "kinda", "honestly"]
_NEUTRAL = ["at", "home", "work", "here", "lunch", "the", "office", "bus", "school", "gym"]
_CHATTER = [
    "watching the game with friends",
    "new blog post is up",
    "coffee and a bagel for breakfast",
    "traffic on the bridge again",
    "reading a book about ships",
]
_SCORED = [
    "I am feeling {w} {f}",
    "feeling so {w} {f}",
    "Im {w} {f}",
    "I'm {w} and {f} {f2}",
]
_ZERO = ["I am at {n} {f}", "I'm at the {n}", "being at {n} {f}"]
_MALFORMED = ['{"ts": "yesterday", "text": "x"}', "no tab here", '{"text": "missing ts"}', "[1, 2]"]


@dataclass(frozen=True)
class Injection:
    day: date
    dimension: MoodDimension
    fraction: float = 0.5


@dataclass
class SynthCounts:
    lines: int = 0
    malformed: int = 0
    noncandidate: int = 0
    zero_vector: int = 0
    scored: int = 0
    scored_per_day: dict = field(default_factory=dict)


def _words(lexicon):
    """Raw forms per dimension whose stem is unique to that dimension."""
    index = lexicon.stem_index()
    out = []
    for pos, forms in enumerate(lexicon.raw_forms):
        words = sorted(raw for s, raws in forms.items() if len(index[s]) == 1 for raw in raws)
        if not words:
            raise ValueError(f"dimension {DIMENSIONS[pos].label} has no unshared terms")
        out.append(words)
    return out


def _check_fillers(lexicon):
    stems = set().union(*lexicon.stems)
    stop = default_stopwords().entries
    for w in _FILLERS + _NEUTRAL + " ".join(_CHATTER).split():
        if w not in stop and stem(w) in stems:
            raise ValueError(f"filler word {w!r} collides with the lexicon")


def generate_corpus(
    fh,
    start: date = date(2008, 8, 1),
    days: int = 153,
    per_day: int = 400,
    seed: int = 0,
    lexicon: Optional[Lexicon] = None,
    amplitude: float = 0.5,
    malformed_rate: float = 0.01,
    noncandidate_rate: float = 0.3,
    zero_rate: float = 0.1,
    injections=(),
    cycle_origin: Optional[date] = None,
) -> SynthCounts:
    """Write a JSON Lines corpus to ``fh`` and return its exact counts."""
    lexicon = lexicon or demo_lexicon()
    _check_fillers(lexicon)
    words = _words(lexicon)
    rng = random.Random(seed)
    counts = SynthCounts()
    phases = [0.0 if d.position % 2 == 0 else math.pi for d in DIMENSIONS]
    shift = ((cycle_origin or start) - start).days
    inject = {}
    for inj in injections:
        inject.setdefault(inj.day, []).append(inj)

    n_malformed = round(per_day * malformed_rate)
    n_noncand = round(per_day * noncandidate_rate)
    n_zero = round(per_day * zero_rate)
    n_scored = per_day - n_malformed - n_noncand - n_zero
    if n_scored < 0:
        raise ValueError("rates add up to more than one")
    dims = list(range(len(DIMENSIONS)))
    write = fh.write

    for i in range(days):
        day = start + timedelta(days=i)
        base = datetime(day.year, day.month, day.day, tzinfo=timezone.utc)
        weights = [1 + amplitude * math.sin(2 * math.pi * (i - shift) / 7 + ph) for ph in phases]
        todays = inject.get(day, ())

        def ts():
            t = base + timedelta(seconds=rng.randrange(86400))
            return t.strftime("%Y-%m-%dT%H:%M:%SZ")

        for _ in range(n_malformed):
            write(rng.choice(_MALFORMED) + "\n")
        for _ in range(n_noncand):
            if rng.random() < 0.3:
                text = f"I am reading www.example.com/{rng.randrange(1000)} feeling {rng.choice(words[0])}"
            else:
                text = rng.choice(_CHATTER)
            write(f'{{"ts": "{ts()}", "text": "{text}"}}\n')
        for _ in range(n_zero):
            text = rng.choice(_ZERO).format(n=rng.choice(_NEUTRAL), f=rng.choice(_FILLERS))
            write(f'{{"ts": "{ts()}", "text": "{text}"}}\n')
        for j in range(n_scored):
            d = rng.choices(dims, weights)[0]
            text = rng.choice(_SCORED).format(
                w=rng.choice(words[d]), f=rng.choice(_FILLERS), f2=rng.choice(_FILLERS)
            )
            for inj in todays:
                if j < inj.fraction * n_scored:
                    text += " and " + rng.choice(words[inj.dimension.position])
            write(f"{ts()}\t{text}\n")

        counts.lines += per_day
        counts.malformed += n_malformed
        counts.noncandidate += n_noncand
        counts.zero_vector += n_zero
        counts.scored += n_scored
        if n_scored:
            counts.scored_per_day[day] = n_scored
    return counts
