"""Corpus ingestion, run configuration and end-to-end orchestration."""

from __future__ import annotations

import csv
import json
import logging
import multiprocessing as mp
import os
import shutil
import tempfile
from collections import Counter, defaultdict
from dataclasses import dataclass, field, fields
from datetime import date
from pathlib import Path
from typing import Iterator, Optional

from . import analysis, series as ser, stats
from .errors import ConfigError, DataError, StageError, TimestampError
from .lexicon import Lexicon, demo_lexicon, load_lexicon
from .scoring import (
    SCORED_COLUMNS,
    MoodVector,
    ScoredMessage,
    _unit_from_counts,
    format_timestamp,
    score_counts,
)
from .textnorm import (
    DEFAULT_FILTER,
    CandidateFilter,
    RawMessage,
    StopwordList,
    default_stopwords,
    extract_terms,
    load_stopwords,
    parse_timestamp,
)

log = logging.getLogger(__name__)

__all__ = [
    "CorpusRecord",
    "Ingest",
    "ingest",
    "parse_record",
    "RunConfig",
    "load_config",
    "RunDiagnostics",
    "CorpusResult",
    "process_corpus",
    "RunResult",
    "run_pipeline",
]

CHUNK_LINES = 20_000


class MalformedRecord(ValueError):
    pass


@dataclass(frozen=True)
class CorpusRecord:
    source: str
    line: int
    message: RawMessage


def _split_line(line: str):
    """Return ``(timestamp, text)`` strings or raise MalformedRecord."""
    line = line.rstrip("\r\n")
    if not line.strip():
        raise MalformedRecord("blank line")
    if line.lstrip().startswith("{"):
        try:
            obj = json.loads(line)
        except ValueError as exc:
            raise MalformedRecord(f"invalid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise MalformedRecord("JSON record is not an object")
        ts, text = obj.get("ts"), obj.get("text")
        if not isinstance(ts, str) or not isinstance(text, str):
            raise MalformedRecord("record needs string fields 'ts' and 'text'")
        return ts, text
    ts, sep, text = line.partition("\t")
    if not sep:
        raise MalformedRecord("expected JSON object or ts<TAB>text")
    return ts, text


def parse_record(line: str) -> RawMessage:
    """Parse one corpus line (JSON Lines or TSV fallback)."""
    ts, text = _split_line(line)
    try:
        return RawMessage(parse_timestamp(ts), text)
    except TimestampError as exc:
        raise MalformedRecord(str(exc)) from None


class Ingest:
    """Stream records from corpus files in order, tallying malformed lines.

    Iterate once; ``lines`` and ``malformed`` are final after exhaustion.
    """

    def __init__(self, paths):
        if isinstance(paths, (str, os.PathLike)):
            paths = [paths]
        self.paths = [Path(p) for p in paths]
        self.lines = 0
        self.malformed = 0
        self.errors = []  # first few (source, line, reason)

    def __iter__(self) -> Iterator[CorpusRecord]:
        for path in self.paths:
            with open(path, encoding="utf-8", errors="replace") as fh:
                for lineno, line in enumerate(fh, 1):
                    self.lines += 1
                    try:
                        msg = parse_record(line)
                    except MalformedRecord as exc:
                        self.malformed += 1
                        if len(self.errors) < 20:
                            self.errors.append((str(path), lineno, str(exc)))
                        continue
                    yield CorpusRecord(str(path), lineno, msg)

    @property
    def records(self) -> int:
        return self.lines - self.malformed


def ingest(paths) -> Ingest:
    """Open corpus file(s) for streaming; unreadable paths fail immediately."""
    ing = Ingest(paths)
    for p in ing.paths:
        if not p.is_file():
            raise DataError(f"corpus file not found: {p}")
        if not os.access(p, os.R_OK):
            raise DataError(f"corpus file not readable: {p}")
    return ing


# ---------------------------------------------------------------------------
# configuration


def _split_list(value):
    if isinstance(value, (list, tuple)):
        return list(value)
    return [v.strip() for v in str(value).split(",") if v.strip()]


def _opt_date(value):
    if value in (None, ""):
        return None
    if isinstance(value, date):
        return value
    try:
        return date.fromisoformat(str(value))
    except ValueError:
        raise ConfigError(f"bad date {value!r}") from None


def _bool(value):
    if isinstance(value, bool):
        return value
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"bad boolean {value!r}")


@dataclass
class RunConfig:
    corpus: list = field(default_factory=list)
    lexicon: Optional[Path] = None  # None -> shipped demo lexicon
    stopwords: Optional[Path] = None  # None -> shipped 214-word list
    start: Optional[date] = None
    end: Optional[date] = None
    k: int = ser.DEFAULT_WINDOW
    threshold: float = 0.05
    compare_kind: str = ser.VARIANCE
    correlate_kind: str = ser.ZSCORE
    event_kind: str = ser.ZSCORE
    periods: list = field(default_factory=lambda: ["auto"])
    events: list = field(default_factory=list)
    event_h: int = 15
    index: list = field(default_factory=list)
    join: str = "inner"
    out: Path = Path("out")
    workers: int = 1
    seed: int = 0
    dump_scored: bool = False
    patterns: Optional[Path] = None

    _CONVERT = {
        "corpus": lambda v: [Path(p) for p in _split_list(v)],
        "lexicon": lambda v: Path(v) if v else None,
        "stopwords": lambda v: Path(v) if v else None,
        "patterns": lambda v: Path(v) if v else None,
        "start": _opt_date,
        "end": _opt_date,
        "k": int,
        "threshold": float,
        "periods": _split_list,
        "events": lambda v: [_opt_date(d) for d in _split_list(v)],
        "event_h": int,
        "index": lambda v: [Path(p) for p in _split_list(v)],
        "out": Path,
        "workers": int,
        "seed": int,
        "dump_scored": _bool,
    }

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RunConfig":
        cfg = cls()
        cfg.update(mapping)
        return cfg

    def update(self, mapping: dict) -> "RunConfig":
        known = set(self.keys())
        for raw_key, value in mapping.items():
            key = raw_key.replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key {raw_key!r}")
            conv = self._CONVERT.get(key)
            try:
                setattr(self, key, conv(value) if conv else value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {raw_key}: {value!r} ({exc})") from None
        return self

    def validate(self) -> "RunConfig":
        if not self.corpus:
            raise ConfigError("no corpus given")
        for p in [*self.corpus, self.lexicon, self.stopwords, self.patterns, *self.index]:
            if p is not None and not Path(p).is_file():
                raise DataError(f"file not found: {p}")
        for p in self.periods:
            if p.lower() not in ("auto", "none", "djia", "wti") and not Path(p).is_file():
                raise DataError(f"periods entry {p!r} is neither a built-in set nor a file")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if not 0 < self.threshold < 1:
            raise ConfigError("threshold must be in (0, 1)")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.event_h < 0:
            raise ConfigError("event_h must be >= 0")
        if self.start and self.end and self.end < self.start:
            raise ConfigError("end before start")
        for kind in (self.compare_kind, self.correlate_kind, self.event_kind):
            if kind not in ser.KINDS:
                raise ConfigError(f"unknown series kind {kind!r}")
        if self.join not in ("inner", "outer"):
            raise ConfigError("join must be inner or outer")
        return self


def load_config(path) -> dict:
    """Read a flat ``key = value`` file ('#' comments) into a dict."""
    out = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        out[key.strip()] = value.strip()
    return out


def load_patterns(path) -> CandidateFilter:
    """Pattern file: ``mode pattern`` per line (mode substring|token|exclude)."""
    retain, exclude = [], []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        mode, _, pattern = line.partition(" ")
        if not pattern.strip():
            raise ConfigError(f"{path}:{lineno}: expected '<mode> <pattern>'")
        if mode == "exclude":
            exclude.append(pattern.strip())
        else:
            retain.append({"pattern": pattern.strip(), "mode": mode})
    return CandidateFilter.from_patterns(retain, exclude)


# ---------------------------------------------------------------------------
# corpus processing


@dataclass
class RunDiagnostics:
    total: int = 0
    malformed: int = 0
    out_of_range: int = 0
    candidate_rejected: int = 0
    zero_vector_dropped: int = 0
    scored_retained: int = 0
    records_per_day: dict = field(default_factory=dict)
    scored_per_day: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def records(self) -> int:
        return self.total - self.malformed

    @property
    def candidate_retained(self) -> int:
        return self.scored_retained + self.zero_vector_dropped

    def conserved(self) -> bool:
        return self.total == (
            self.scored_retained
            + self.candidate_rejected
            + self.zero_vector_dropped
            + self.malformed
            + self.out_of_range
        ) and sum(self.scored_per_day.values()) == self.scored_retained

    def funnel_rows(self):
        return [
            ("total", self.total),
            ("malformed", self.malformed),
            ("out_of_range", self.out_of_range),
            ("candidate_rejected", self.candidate_rejected),
            ("candidate_retained", self.candidate_retained),
            ("zero_vector_dropped", self.zero_vector_dropped),
            ("scored_retained", self.scored_retained),
        ]


_CTX = None


def _init_worker(ctx):
    global _CTX
    _CTX = ctx


def _process_chunk(lines):
    stems, stop, filt, start, end, dump = _CTX
    hist = defaultdict(Counter)
    records = Counter()
    rows = [] if dump else None
    malformed = oor = rejected = zero = 0
    for line in lines:
        try:
            ts_text, text = _split_line(line)
            ts = parse_timestamp(ts_text)
        except (MalformedRecord, TimestampError):
            malformed += 1
            continue
        day = ts.date()
        if (start is not None and day < start) or (end is not None and day > end):
            oor += 1
            continue
        records[day] += 1
        if not filt(text):
            rejected += 1
            continue
        counts = score_counts(extract_terms(text, stop), stems)
        if not any(counts):
            zero += 1
            continue
        hist[day][counts] += 1
        if dump:
            rows.append((ts, counts))
    return len(lines), malformed, oor, rejected, zero, dict(hist), records, rows


def _chunks(paths, size):
    buf = []
    for path in paths:
        with open(path, encoding="utf-8", errors="replace") as fh:
            for line in fh:
                buf.append(line)
                if len(buf) >= size:
                    yield buf
                    buf = []
    if buf:
        yield buf


@dataclass
class CorpusResult:
    accumulator: ser.DailyAccumulator
    diagnostics: RunDiagnostics


def process_corpus(
    paths,
    lexicon: Lexicon,
    stopwords: StopwordList | None = None,
    candidate_filter: CandidateFilter = DEFAULT_FILTER,
    start: Optional[date] = None,
    end: Optional[date] = None,
    workers: int = 1,
    on_scored=None,
    chunk_lines: int = CHUNK_LINES,
) -> CorpusResult:
    """Stream corpus files through filter -> score -> daily accumulation.

    Files are read sequentially and cut into line chunks that are scored by
    ``workers`` processes. ``on_scored`` (optional) receives every
    :class:`ScoredMessage` in corpus order. Memory is bounded by the number
    of distinct (day, count-vector) pairs, not by corpus length.
    """
    ing = ingest(paths)  # existence checks
    stop = (stopwords or default_stopwords()).entries
    ctx = (lexicon.stems, stop, candidate_filter, start, end, on_scored is not None)
    acc = ser.DailyAccumulator()
    diag = RunDiagnostics()
    records = Counter()
    chunks = _chunks(ing.paths, chunk_lines)
    if workers > 1:
        pool = mp.get_context("fork").Pool(workers, initializer=_init_worker, initargs=(ctx,))
        results = pool.imap(_process_chunk, chunks)
    else:
        pool = None
        _init_worker(ctx)
        results = map(_process_chunk, chunks)
    try:
        for n, malformed, oor, rejected, zero, hist, recs, rows in results:
            diag.total += n
            diag.malformed += malformed
            diag.out_of_range += oor
            diag.candidate_rejected += rejected
            diag.zero_vector_dropped += zero
            records.update(recs)
            for day, by_counts in hist.items():
                for counts, c in by_counts.items():
                    acc.add(day, _unit_from_counts(counts), c)
            if rows:
                for ts, counts in rows:
                    unit = MoodVector(_unit_from_counts(counts), "unit")
                    on_scored(ScoredMessage(ts, unit, sum(counts), counts))
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    diag.records_per_day = dict(sorted(records.items()))
    diag.scored_per_day = acc.day_counts()
    diag.scored_retained = sum(diag.scored_per_day.values())
    return CorpusResult(acc, diag)


# ---------------------------------------------------------------------------
# end-to-end run


@dataclass
class RunResult:
    raw: ser.MoodSeries
    zscore: ser.MoodSeries
    variance: ser.MoodSeries
    diagnostics: RunDiagnostics
    correlation: Optional[stats.CorrelationMatrix] = None
    comparisons: dict = field(default_factory=dict)  # period-set name -> ComparisonReport
    event_windows: dict = field(default_factory=dict)  # date -> EventWindow
    aligned: dict = field(default_factory=dict)  # index name -> rows
    files: list = field(default_factory=list)

    def series(self, kind: str) -> ser.MoodSeries:
        return {ser.RAW: self.raw, ser.ZSCORE: self.zscore, ser.VARIANCE: self.variance}[kind]


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except (DataError, ValueError, OSError) as exc:
        raise StageError(name, exc) from exc


def _resolve_periods(entries, series):
    """Turn the ``periods`` config into ``{set_name: [Period, ...]}``."""
    out = {}
    for entry in entries:
        key = entry.lower()
        if key == "none":
            continue
        if key == "auto":
            for name in ("DJIA", "WTI"):
                periods = analysis.builtin_periods(name)
                if len(series) and all(p.start in series and p.end in series for p in periods):
                    out[name.lower()] = periods
            continue
        if key in ("djia", "wti"):
            out[key] = analysis.builtin_periods(key)
        else:
            out[Path(entry).stem] = analysis.load_periods(entry)
    return out


def _load_inputs(config):
    lexicon = load_lexicon(config.lexicon) if config.lexicon else demo_lexicon()
    stop = load_stopwords(config.stopwords) if config.stopwords else default_stopwords()
    filt = load_patterns(config.patterns) if config.patterns else DEFAULT_FILTER
    return lexicon, stop, filt


def run_pipeline(config: RunConfig, write: bool = True) -> RunResult:
    """Execute filter -> score -> aggregate -> normalize -> statistics.

    Outputs are staged in a temporary directory and moved into
    ``config.out`` only when every stage succeeded, so a failed run leaves
    no partial files. Re-running with the same inputs rewrites identical
    bytes.
    """
    config.validate()
    staging = None
    if write:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
    try:
        result = _run(config, staging)
        if staging is not None:
            result.files = _stage("write", _write_outputs, config, result, staging)
        return result
    finally:
        if staging is not None:
            shutil.rmtree(staging, ignore_errors=True)


def _scored_writer(fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SCORED_COLUMNS)

    def emit(m):
        writer.writerow([format_timestamp(m.timestamp)] + [f"{v:.9f}" for v in m.vector] + [m.match_count])

    return emit


def _run(config, staging):
    lexicon, stop, filt = _stage("load", _load_inputs, config)

    dump_fh = on_scored = None
    if staging is not None and config.dump_scored:
        dump_fh = open(staging / "scored.csv", "w", newline="", encoding="utf-8")
        on_scored = _scored_writer(dump_fh)

    try:
        corpus = _stage(
            "ingest",
            process_corpus,
            config.corpus,
            lexicon,
            stop,
            filt,
            config.start,
            config.end,
            config.workers,
            on_scored,
        )
    finally:
        if dump_fh is not None:
            dump_fh.close()
    diag = corpus.diagnostics
    raw, _ = _stage("aggregate", corpus.accumulator.finalize, config.start, config.end)
    z = _stage("normalize", ser.zscore_normalize, raw, config.k)
    v = _stage("normalize", ser.variance_normalize, raw, config.k)
    result = RunResult(raw, z, v, diag)

    if int(raw.nonempty.sum()) >= 3:
        result.correlation = _stage("correlate", stats.correlation_matrix, result.series(config.correlate_kind))
    else:
        diag.notes.append("correlation skipped: fewer than 3 non-empty days")

    period_sets = _stage("compare", _resolve_periods, config.periods, raw)
    for name, periods in period_sets.items():
        result.comparisons[name] = _stage(
            "compare", stats.compare_periods, result.series(config.compare_kind), periods, config.threshold
        )
    if "auto" in [p.lower() for p in config.periods] and not period_sets:
        diag.notes.append("built-in periods skipped: series does not cover them")

    for event in config.events:
        result.event_windows[event] = _stage(
            "event-window", analysis.extract_event_window, result.series(config.event_kind), event, config.event_h
        )
    for path in config.index:
        idx = _stage("align", analysis.load_index, path)
        result.aligned[idx.name] = _stage("align", analysis.align_with_index, z, idx, config.join)
    return result


def _write_outputs(config, result, staging):
    out = Path(config.out)
    written = ["scored.csv"] if config.dump_scored else []

    def emit(name, writer, *args):
        with open(staging / name, "w", newline="", encoding="utf-8") as fh:
            writer(*args, fh)
        written.append(name)

    for kind in ser.KINDS:
        emit(f"series_{kind}.csv", ser.write_series_csv, result.series(kind))
    if result.correlation is not None:
        emit("correlation.csv", stats.write_matrix_csv, result.correlation.rho)
        emit("correlation_pvalues.csv", stats.write_matrix_csv, result.correlation.pvalues)
    for name, report in result.comparisons.items():
        emit(f"comparisons_{name}.csv", stats.write_comparisons_csv, report.results)
        emit(f"comparisons_{name}_significant.csv", stats.write_comparisons_csv, report.significant())
    for event, window in result.event_windows.items():
        emit(f"event_window_{event.isoformat()}.csv", analysis.write_event_window_csv, window)
    for name, rows in result.aligned.items():
        emit(f"aligned_{name}.csv", lambda r, fh, n=name: analysis.write_aligned_csv(r, fh, n), rows)
    emit("funnel.csv", write_funnel_csv, result.diagnostics)
    emit("daily_counts.csv", write_daily_counts_csv, result.diagnostics)
    for name in written:
        os.replace(staging / name, out / name)
    return [out / name for name in written]


def write_funnel_csv(diag: RunDiagnostics, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["stage", "count"])
    for name, value in diag.funnel_rows():
        writer.writerow([name, value])
    for note in diag.notes:
        writer.writerow(["note", note])


def write_daily_counts_csv(diag: RunDiagnostics, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["date", "records", "scored"])
    days = sorted(set(diag.records_per_day) | set(diag.scored_per_day))
    for d in days:
        writer.writerow([d.isoformat(), diag.records_per_day.get(d, 0), diag.scored_per_day.get(d, 0)])


def score_corpus(paths, lexicon, stopwords=None, candidate_filter=DEFAULT_FILTER, workers=1) -> tuple:
    """All scored messages of a corpus, in corpus order, plus diagnostics."""
    rows = []
    result = process_corpus(paths, lexicon, stopwords, candidate_filter, workers=workers, on_scored=rows.append)
    return rows, result.diagnostics
