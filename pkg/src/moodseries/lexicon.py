"""Six-dimension mood lexicon: loading, validation, canonical save, overlaps.

Source files are UTF-8 text organised in sections::

    # comment
    [tension]
    tense
    anxious
    [depression]
    sad

Inline form ``tension: tense, anxious`` is also accepted. Raw adjectives are
normalized like message tokens (non-alphanumerics stripped, lowercased) and
then Porter-stemmed, so lookups are stem-to-stem.

The canonical save format starts with ``#% format: stemmed`` and lists one
stem per line followed by its raw forms as a trailing comment; loading it
takes stems verbatim (Porter is not idempotent, so they are never
re-stemmed).
"""

from __future__ import annotations

import enum
import re
from collections import defaultdict
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import LexiconError
from .porter import stem as porter_stem

__all__ = [
    "MoodDimension",
    "DIMENSIONS",
    "Lexicon",
    "load_lexicon",
    "loads_lexicon",
    "save_lexicon",
    "dumps_lexicon",
    "overlap_report",
    "demo_lexicon",
]


class MoodDimension(enum.IntEnum):
    TENSION = 1
    DEPRESSION = 2
    ANGER = 3
    VIGOUR = 4
    FATIGUE = 5
    CONFUSION = 6

    @property
    def label(self) -> str:
        return self.name.lower()

    @property
    def position(self) -> int:
        """Zero-based column in vectors and tables."""
        return self.value - 1

    @classmethod
    def parse(cls, label: str) -> "MoodDimension":
        key = label.strip().lower()
        key = _ALIASES.get(key, key)
        for dim in cls:
            if dim.label == key:
                return dim
        raise ValueError(f"unknown dimension {label!r}")


_ALIASES = {"vigor": "vigour"}

DIMENSIONS = tuple(MoodDimension)

_NON_ALNUM = re.compile(r"[^A-Za-z0-9]+")
_SECTION = re.compile(r"^\[\s*([^\]]+?)\s*\]$")
_DIRECTIVE = re.compile(r"^#%\s*(\w+)\s*:\s*(.*?)\s*$")
_STEM = re.compile(r"^[a-z0-9]+$")


@dataclass(frozen=True)
class Lexicon:
    """Immutable per-dimension stem sets.

    ``raw_forms[i]`` maps every stem of dimension ``i`` (zero-based) to the
    sorted tuple of raw adjectives it came from.
    """

    stems: tuple  # six frozensets
    raw_forms: tuple  # six dicts stem -> tuple(raw)
    name: str = "unnamed"
    version: str = "0"

    @property
    def raw_term_count(self) -> int:
        return sum(len(raws) for forms in self.raw_forms for raws in forms.values())

    def __getitem__(self, dim) -> frozenset:
        return self.stems[MoodDimension(dim).position]

    def __eq__(self, other):
        if not isinstance(other, Lexicon):
            return NotImplemented
        return (self.stems, self.raw_forms, self.name, self.version) == (
            other.stems,
            other.raw_forms,
            other.name,
            other.version,
        )

    def __hash__(self):
        return hash((self.stems, self.name, self.version))

    def stem_index(self) -> dict:
        """stem -> tuple of zero-based dimension positions containing it."""
        index = defaultdict(list)
        for pos, stems in enumerate(self.stems):
            for s in stems:
                index[s].append(pos)
        return {s: tuple(p) for s, p in index.items()}


def _normalize_raw(raw):
    return _NON_ALNUM.sub("", raw).lower()


def loads_lexicon(text: str, source: str = "<string>") -> Lexicon:
    meta = {"name": Path(source).stem if source != "<string>" else "unnamed", "version": "0"}
    stemmed = False
    current = None
    forms = [defaultdict(set) for _ in DIMENSIONS]

    def add(dim, word, lineno, raws=None):
        if stemmed:
            if not _STEM.match(word):
                raise LexiconError(f"invalid stem {word!r}", lineno)
            forms[dim.position][word].update(raws or ())
            return
        norm = _normalize_raw(word)
        if not norm:
            raise LexiconError(f"entry {word!r} has no alphanumeric characters", lineno)
        forms[dim.position][porter_stem(norm)].add(norm)

    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        directive = _DIRECTIVE.match(stripped)
        if directive:
            key, value = directive.group(1).lower(), directive.group(2)
            if key == "format":
                stemmed = value.lower() == "stemmed"
            elif key in ("name", "version"):
                meta[key] = value
            continue
        if stemmed and "#" in stripped:
            content, comment = stripped.split("#", 1)
            raws = comment.split()
        else:
            content, raws = stripped.split("#", 1)[0], ()
        content = content.strip()
        if not content:
            continue
        section = _SECTION.match(content)
        if section:
            current = _dimension(section.group(1), lineno)
            continue
        if ":" in content:
            label, _, rest = content.partition(":")
            dim = _dimension(label, lineno)
            for word in rest.split(","):
                word = word.strip()
                if word:
                    add(dim, word, lineno)
            continue
        if current is None:
            raise LexiconError(f"entry {content!r} outside any [dimension] section", lineno)
        if len(content.split()) != 1:
            raise LexiconError(f"malformed entry {content!r}: one term per line", lineno)
        add(current, content, lineno, raws)

    for dim in DIMENSIONS:
        if not forms[dim.position]:
            raise LexiconError(f"empty dimension: {dim.label}")
    return Lexicon(
        stems=tuple(frozenset(f) for f in forms),
        raw_forms=tuple({s: tuple(sorted(r)) for s, r in sorted(f.items())} for f in forms),
        name=meta["name"],
        version=meta["version"],
    )


def _dimension(label, lineno):
    try:
        return MoodDimension.parse(label)
    except ValueError:
        raise LexiconError(f"unknown dimension {label.strip()!r}", lineno) from None


def load_lexicon(path: str | Path) -> Lexicon:
    """Load and stem a lexicon file; raises :class:`LexiconError` with line numbers."""
    path = Path(path)
    return loads_lexicon(path.read_text(encoding="utf-8"), source=str(path))


def dumps_lexicon(lexicon: Lexicon) -> str:
    lines = [
        "#% format: stemmed",
        f"#% name: {lexicon.name}",
        f"#% version: {lexicon.version}",
    ]
    for dim in DIMENSIONS:
        lines.append(f"[{dim.label}]")
        forms = lexicon.raw_forms[dim.position]
        for s in sorted(lexicon.stems[dim.position]):
            raws = forms.get(s, ())
            lines.append(f"{s}  # {' '.join(raws)}" if raws else s)
    return "\n".join(lines) + "\n"


def save_lexicon(lexicon: Lexicon, path: str | Path) -> None:
    Path(path).write_text(dumps_lexicon(lexicon), encoding="utf-8")


def overlap_report(lexicon: Lexicon) -> list:
    """Stems present in two or more dimensions, sorted by stem.

    Each row is ``(stem, (MoodDimension, ...))``.
    """
    rows = []
    for s, positions in sorted(lexicon.stem_index().items()):
        if len(positions) > 1:
            rows.append((s, tuple(DIMENSIONS[p] for p in positions)))
    return rows


def demo_lexicon() -> Lexicon:
    """Small non-canonical lexicon built from the public POMS base adjectives."""
    text = resources.files("moodseries").joinpath("data/poms_demo.lex").read_text("utf-8")
    return loads_lexicon(text, source="poms_demo.lex")
