"""Six-dimension mood time series from timestamped short texts."""

from .analysis import (
    Period,
    align_with_index,
    builtin_periods,
    extract_event_window,
    load_index,
    load_periods,
)
from .errors import ConfigError, DataError, LexiconError, RangeError, StageError, TimestampError
from .lexicon import DIMENSIONS, Lexicon, MoodDimension, demo_lexicon, load_lexicon
from .pipeline import RunConfig, RunDiagnostics, ingest, process_corpus, run_pipeline
from .porter import stem
from .scoring import MoodVector, ScoredMessage, score, score_message, unit_normalize
from .series import (
    MoodSeries,
    aggregate_daily,
    variance_normalize,
    window_stats,
    zscore_normalize,
)
from .stats import compare_periods, correlation_matrix, mann_whitney, spearman_rho
from .textnorm import (
    RawMessage,
    default_stopwords,
    is_mood_candidate,
    load_stopwords,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "DIMENSIONS",
    "Lexicon",
    "LexiconError",
    "MoodDimension",
    "MoodSeries",
    "MoodVector",
    "Period",
    "RangeError",
    "RawMessage",
    "RunConfig",
    "RunDiagnostics",
    "ScoredMessage",
    "StageError",
    "TimestampError",
    "aggregate_daily",
    "align_with_index",
    "builtin_periods",
    "compare_periods",
    "correlation_matrix",
    "default_stopwords",
    "demo_lexicon",
    "extract_event_window",
    "ingest",
    "is_mood_candidate",
    "load_index",
    "load_lexicon",
    "load_periods",
    "load_stopwords",
    "mann_whitney",
    "process_corpus",
    "run_pipeline",
    "score",
    "score_message",
    "spearman_rho",
    "stem",
    "tokenize",
    "unit_normalize",
    "variance_normalize",
    "window_stats",
    "zscore_normalize",
]
