"""Command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from contextlib import contextmanager
from datetime import date
from pathlib import Path

from . import analysis, series as ser, stats
from .errors import ConfigError, DataError
from .lexicon import DIMENSIONS, MoodDimension
from .pipeline import (
    RunConfig,
    load_config,
    process_corpus,
    run_pipeline,
    write_daily_counts_csv,
    write_funnel_csv,
    _load_inputs,
    _scored_writer,
)
from .scoring import SCORED_COLUMNS
from .textnorm import parse_timestamp

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("moodseries")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@contextmanager
def _output(path):
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _read_series(path) -> ser.MoodSeries:
    with open(path, newline="", encoding="utf-8") as fh:
        return ser.read_series_csv(fh)


def _date(value):
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO date: {value!r}") from None


# ---------------------------------------------------------------------------
# run-config backed commands (run, score, diag)

# flags that map onto RunConfig keys; parsed with default None so that only
# explicitly given flags override the config file
_CONFIG_FLAGS = {
    "corpus": dict(nargs="+", metavar="FILE"),
    "lexicon": dict(metavar="FILE", help="lexicon file (default: shipped demo lexicon)"),
    "stopwords": dict(metavar="FILE", help="stopword file (default: shipped 214-word list)"),
    "patterns": dict(metavar="FILE", help="candidate pattern file"),
    "start": dict(metavar="DATE"),
    "end": dict(metavar="DATE"),
    "k": dict(type=int, help="window half-width in days (default 30)"),
    "threshold": dict(type=float, help="significance threshold (default 0.05)"),
    "compare-kind": dict(choices=ser.KINDS),
    "correlate-kind": dict(choices=ser.KINDS),
    "event-kind": dict(choices=ser.KINDS),
    "periods": dict(nargs="+", metavar="SET", help="auto, none, DJIA, WTI or a period CSV"),
    "events": dict(nargs="+", metavar="DATE"),
    "event-h": dict(type=int),
    "index": dict(nargs="+", metavar="FILE"),
    "join": dict(choices=("inner", "outer")),
    "out": dict(metavar="DIR"),
    "workers": dict(type=int),
    "dump-scored": dict(metavar="BOOL"),
}

_SCORE_KEYS = ("corpus", "lexicon", "stopwords", "patterns", "start", "end", "workers")


def _add_config_flags(p, keys):
    p.add_argument("--config", metavar="FILE", help="flat key = value file; flags override it")
    for key in keys:
        p.add_argument(f"--{key}", default=None, **_CONFIG_FLAGS[key])


def _config(args, keys) -> RunConfig:
    values = load_config(args.config) if args.config else {}
    for key in keys:
        v = getattr(args, key.replace("-", "_"))
        if v is not None:
            values[key] = v
    if args.seed is not None:
        values["seed"] = args.seed
    return RunConfig.from_mapping(values)


def cmd_run(args):
    cfg = _config(args, list(_CONFIG_FLAGS))
    result = run_pipeline(cfg)
    d = result.diagnostics
    log.info("scored %d of %d records", d.scored_retained, d.total)
    for path in result.files:
        print(path)


def cmd_score(args):
    cfg = _config(args, _SCORE_KEYS)
    if not cfg.corpus:
        raise ConfigError("no corpus given")
    cfg.validate()
    lexicon, stop, filt = _load_inputs(cfg)
    with _output(args.output) as fh:
        emit = _scored_writer(fh)
        process_corpus(cfg.corpus, lexicon, stop, filt, cfg.start, cfg.end, cfg.workers, on_scored=emit)


def cmd_diag(args):
    cfg = _config(args, _SCORE_KEYS)
    cfg.validate()
    lexicon, stop, filt = _load_inputs(cfg)
    diag = process_corpus(cfg.corpus, lexicon, stop, filt, cfg.start, cfg.end, cfg.workers).diagnostics
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with _output(out / "funnel.csv") as fh:
            write_funnel_csv(diag, fh)
        with _output(out / "daily_counts.csv") as fh:
            write_daily_counts_csv(diag, fh)
    else:
        write_funnel_csv(diag, sys.stdout)
        sys.stdout.write("\n")
        write_daily_counts_csv(diag, sys.stdout)


# ---------------------------------------------------------------------------
# file-to-file commands


def _read_scored(path):
    """Yield ``(day, unit vector)`` from a scored dump."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SCORED_COLUMNS:
            raise DataError(f"{path}: unexpected scored header {header}")
        for lineno, row in enumerate(reader, 2):
            try:
                ts = parse_timestamp(row[0])
                vec = tuple(float(v) for v in row[1 : 1 + len(DIMENSIONS)])
            except (ValueError, IndexError, DataError) as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            yield ts.date(), vec


def cmd_aggregate(args):
    series = ser.aggregate_daily(_read_scored(args.scored), args.start, args.end)
    with _output(args.output) as fh:
        ser.write_series_csv(series, fh, args.decimals)


def cmd_normalize(args):
    raw = _read_series(args.series)
    fn = ser.zscore_normalize if args.kind == ser.ZSCORE else ser.variance_normalize
    with _output(args.output) as fh:
        ser.write_series_csv(fn(raw, args.k), fh, args.decimals)


def cmd_correlate(args):
    m = stats.correlation_matrix(_read_series(args.series))
    with _output(args.output) as fh:
        stats.write_matrix_csv(m.rho, fh)
    if args.pvalues:
        with _output(args.pvalues) as fh:
            stats.write_matrix_csv(m.pvalues, fh)


def cmd_compare(args):
    series = _read_series(args.series)
    if args.periods.upper() in ("DJIA", "WTI"):
        periods = analysis.builtin_periods(args.periods)
    else:
        periods = analysis.load_periods(args.periods)
    report = stats.compare_periods(series, periods, args.threshold, args.method)
    rows = report.significant() if args.significant_only else report.results
    with _output(args.output) as fh:
        stats.write_comparisons_csv(rows, fh)


def cmd_event_window(args):
    window = analysis.extract_event_window(_read_series(args.series), args.event, args.h)
    if window.clipped:
        log.warning("window clipped at offsets %s", ",".join(map(str, window.clipped)))
    with _output(args.output) as fh:
        analysis.write_event_window_csv(window, fh)


def cmd_align(args):
    index = analysis.load_index(args.index, args.name)
    rows = analysis.align_with_index(_read_series(args.series), index, args.join)
    with _output(args.output) as fh:
        analysis.write_aligned_csv(rows, fh, index.name)


def cmd_synth(args):
    from .synth import Injection, generate_corpus

    injections = []
    for item in args.inject or []:
        try:
            day, dim, *frac = item.split(":")
            injections.append(Injection(date.fromisoformat(day), MoodDimension.parse(dim), *map(float, frac)))
        except (ValueError, KeyError) as exc:
            raise UsageError(f"bad --inject {item!r}: expected DATE:DIMENSION[:FRACTION] ({exc})") from None
    with _output(args.output) as fh:
        counts = generate_corpus(
            fh,
            start=args.start,
            days=args.days,
            per_day=args.per_day,
            seed=args.seed or 0,
            injections=injections,
            cycle_origin=args.cycle_origin,
        )
    log.info(
        "wrote %d lines: %d malformed, %d non-candidate, %d zero-vector, %d scored",
        counts.lines,
        counts.malformed,
        counts.noncandidate,
        counts.zero_vector,
        counts.scored,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="moodseries", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--seed", type=int, default=None, help="pin randomized steps")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="end-to-end: corpus to series, statistics and reports")
    _add_config_flags(p, list(_CONFIG_FLAGS))
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("score", help="corpus to per-message scored CSV")
    _add_config_flags(p, _SCORE_KEYS)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("diag", help="funnel and daily record counts")
    _add_config_flags(p, _SCORE_KEYS)
    p.add_argument("--out-dir", help="write funnel.csv and daily_counts.csv here instead of stdout")
    p.set_defaults(func=cmd_diag)

    p = sub.add_parser("aggregate", help="scored CSV to raw daily series")
    p.add_argument("scored")
    p.add_argument("--start", type=_date)
    p.add_argument("--end", type=_date)
    p.add_argument("--decimals", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("normalize", help="raw series to z-score or variance series")
    p.add_argument("series")
    p.add_argument("--kind", choices=(ser.ZSCORE, ser.VARIANCE), default=ser.ZSCORE)
    p.add_argument("--k", type=int, default=ser.DEFAULT_WINDOW)
    p.add_argument("--decimals", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("correlate", help="6x6 Spearman matrix of a series")
    p.add_argument("series")
    p.add_argument("--pvalues", metavar="FILE")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("compare-periods", help="Mann-Whitney tests between periods")
    p.add_argument("series")
    p.add_argument("--periods", default="DJIA", help="DJIA, WTI or a name,start,end CSV")
    p.add_argument("--threshold", type=float, default=0.05)
    p.add_argument("--method", choices=("auto", "exact", "normal"), default="auto")
    p.add_argument("--significant-only", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("event-window", help="values at -h..+h days around an event")
    p.add_argument("series")
    p.add_argument("--event", type=_date, required=True)
    p.add_argument("--h", type=int, default=15)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_event_window)

    p = sub.add_parser("align-index", help="join a series with a date,value index CSV")
    p.add_argument("series")
    p.add_argument("--index", required=True)
    p.add_argument("--name")
    p.add_argument("--join", choices=("inner", "outer"), default="inner")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("synth", help="write a deterministic synthetic corpus")
    p.add_argument("--start", type=_date, default=date(2008, 8, 1))
    p.add_argument("--days", type=int, default=153)
    p.add_argument("--per-day", type=int, default=400)
    p.add_argument("--inject", action="append", metavar="DATE:DIM[:FRAC]")
    p.add_argument("--cycle-origin", type=_date)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"moodseries: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"moodseries: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"moodseries: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
