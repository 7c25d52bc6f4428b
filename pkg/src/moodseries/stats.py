"""Rank statistics: Spearman correlation and Mann-Whitney period comparisons."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .errors import DataError, RangeError
from .lexicon import DIMENSIONS

__all__ = [
    "rankdata",
    "spearman_rho",
    "spearman_test",
    "CorrelationMatrix",
    "correlation_matrix",
    "MannWhitneyResult",
    "mann_whitney",
    "PeriodComparison",
    "ComparisonReport",
    "compare_periods",
    "write_comparisons_csv",
    "write_matrix_csv",
    "EXACT_LIMIT",
]

# pooled sizes up to this use the exact null distribution under method="auto"
EXACT_LIMIT = 16


def rankdata(values: Sequence[float]) -> list:
    """1-based ranks; tied values share the average of their positions."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for idx in order[i : j + 1]:
            ranks[idx] = avg
        i = j + 1
    return ranks


def _pearson(x, y):
    mx = math.fsum(x) / len(x)
    my = math.fsum(y) / len(y)
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxx = math.fsum(v * v for v in dx)
    syy = math.fsum(v * v for v in dy)
    if sxx == 0 or syy == 0:
        return math.nan
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman's rho with average ranks for ties.

    Returns NaN when either input has no rank variance (all values equal).
    """
    x, y = list(x), list(y)
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 3:
        raise ValueError("spearman_rho needs at least 3 observations")
    return _pearson(rankdata(x), rankdata(y))


def spearman_test(x: Sequence[float], y: Sequence[float]) -> tuple:
    """``(rho, p)``; p is the approximate two-sided t-test with n-2 dof."""
    rho = spearman_rho(x, y)
    n = len(x)
    return rho, _rho_pvalue(rho, n)


def _rho_pvalue(rho, n):
    if math.isnan(rho):
        return math.nan
    if abs(rho) >= 1.0:
        return 0.0
    t = rho * math.sqrt((n - 2) / (1 - rho * rho))
    return float(2 * sps.t.sf(abs(t), n - 2))


@dataclass(frozen=True)
class CorrelationMatrix:
    rho: np.ndarray  # 6x6, dimension order
    pvalues: np.ndarray  # approximate, see spearman_test
    n: int

    def __getitem__(self, key):
        a, b = key
        pa = a.position if hasattr(a, "position") else a
        pb = b.position if hasattr(b, "position") else b
        return float(self.rho[pa, pb])


def correlation_matrix(series) -> CorrelationMatrix:
    """Pairwise Spearman correlations between the six dimensions by day."""
    values = series.values
    ndim = values.shape[1]
    rho = np.full((ndim, ndim), np.nan)
    pvals = np.full((ndim, ndim), np.nan)
    n_used = 0
    for i in range(ndim):
        for j in range(i, ndim):
            ok = ~np.isnan(values[:, i]) & ~np.isnan(values[:, j])
            n = int(ok.sum())
            if n < 3:
                raise DataError(f"correlation needs >= 3 non-empty days, got {n}")
            n_used = max(n_used, n)
            if i == j:
                r = 1.0 if np.ptp(values[ok, i]) > 0 else math.nan
                p = 0.0 if r == 1.0 else math.nan
            else:
                r = spearman_rho(values[ok, i].tolist(), values[ok, j].tolist())
                p = _rho_pvalue(r, n)
            rho[i, j] = rho[j, i] = r
            pvals[i, j] = pvals[j, i] = p
    return CorrelationMatrix(rho, pvals, n_used)


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float  # min(U1, U2)
    p: float  # two-sided
    u1: float  # U of the first sample
    method: str  # "exact" or "normal"


def _doubled_ranks(pooled):
    return [int(round(2 * r)) for r in rankdata(pooled)]


def _exact_pvalue(ranks2, n1, u1_doubled):
    """Two-sided exact p from the permutation distribution of U.

    ``ranks2`` are doubled average ranks (integers, ties allowed). Counts the
    size-``n1`` subsets by doubled rank sum with a subset-sum table.
    """
    n = len(ranks2)
    n2 = n - n1
    table = [dict() for _ in range(n1 + 1)]
    table[0][0] = 1
    for r in ranks2:
        for size in range(min(n1, n) - 1, -1, -1):
            row = table[size]
            if not row:
                continue
            nxt = table[size + 1]
            for s, c in row.items():
                nxt[s + r] = nxt.get(s + r, 0) + c
    offset = n1 * (n1 + 1)  # doubled n1(n1+1)/2
    centre = n1 * n2  # doubled mean of U
    observed = abs(u1_doubled - centre)
    extreme = sum(c for s, c in table[n1].items() if abs(s - offset - centre) >= observed)
    return float(Fraction(extreme, math.comb(n, n1)))


def _normal_pvalue(ranks, n1, n2, u1):
    n = n1 + n2
    ties = itertools.groupby(sorted(ranks))
    tie_term = sum(t**3 - t for t in (len(list(g)) for _, g in ties))
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1))) if n > 1 else 0.0
    if var <= 0:
        return 1.0
    z = max(abs(u1 - n1 * n2 / 2.0) - 0.5, 0.0) / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2.0)))


def mann_whitney(a: Sequence[float], b: Sequence[float], method: str = "auto") -> MannWhitneyResult:
    """Two-sided Mann-Whitney U test.

    ``method`` is "exact" (permutation distribution over all labelings,
    ties allowed), "normal" (tie-corrected variance with continuity
    correction) or "auto" (exact when n1 + n2 <= EXACT_LIMIT).
    """
    a, b = list(map(float, a)), list(map(float, b))
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise ValueError("mann_whitney needs two non-empty samples")
    if method == "auto":
        method = "exact" if n1 + n2 <= EXACT_LIMIT else "normal"
    pooled = a + b
    ranks2 = _doubled_ranks(pooled)
    r1_doubled = sum(ranks2[:n1])
    u1_doubled = r1_doubled - n1 * (n1 + 1)
    u1 = u1_doubled / 2
    u = min(u1, n1 * n2 - u1)
    if method == "exact":
        p = _exact_pvalue(ranks2, n1, u1_doubled)
    elif method == "normal":
        p = _normal_pvalue(ranks2, n1, n2, u1)
    else:
        raise ValueError(f"unknown method {method!r}")
    return MannWhitneyResult(u, min(1.0, p), u1, method)


@dataclass(frozen=True)
class PeriodComparison:
    dimension: object  # MoodDimension
    period_a: str
    period_b: str
    median_a: float
    median_b: float
    u: float
    p: float
    significant: bool


@dataclass(frozen=True)
class ComparisonReport:
    results: tuple
    threshold: float

    def significant(self, threshold: float | None = None) -> list:
        t = self.threshold if threshold is None else threshold
        return [r for r in self.results if r.p < t]

    def __len__(self):
        return len(self.results)


def compare_periods(series, periods: Sequence, threshold: float = 0.05, method: str = "auto") -> ComparisonReport:
    """Mann-Whitney test of every dimension for every unordered period pair.

    Rows are ordered by dimension, then by the position of the pair in
    ``periods``. Each period must lie inside the series and contain at
    least one non-empty day.
    """
    if len(periods) < 2:
        raise ValueError("need at least two periods")
    names = [p.name for p in periods]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate period names: {names}")
    samples = {}
    for period in periods:
        if period.start not in series or period.end not in series:
            raise RangeError(
                f"period {period.name} ({period.start}..{period.end}) outside series "
                f"{series.start}..{series.end}"
            )
        rows = series.between(period.start, period.end)
        if len(rows) == 0:
            raise DataError(f"period {period.name} has no non-empty days")
        samples[period.name] = rows
    results = []
    for dim in DIMENSIONS:
        for pa, pb in itertools.combinations(periods, 2):
            xa = samples[pa.name][:, dim.position]
            xb = samples[pb.name][:, dim.position]
            res = mann_whitney(xa, xb, method=method)
            results.append(
                PeriodComparison(
                    dim,
                    pa.name,
                    pb.name,
                    float(np.median(xa)),
                    float(np.median(xb)),
                    res.u,
                    res.p,
                    res.p < threshold,
                )
            )
    return ComparisonReport(tuple(results), threshold)


COMPARISON_COLUMNS = ["dimension", "period_a", "period_b", "median_a", "median_b", "U", "p", "significant"]


def write_comparisons_csv(rows, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(COMPARISON_COLUMNS)
    for r in rows:
        writer.writerow(
            [
                r.dimension.label,
                r.period_a,
                r.period_b,
                repr(r.median_a),
                repr(r.median_b),
                repr(float(r.u)),
                repr(float(r.p)),
                "true" if r.significant else "false",
            ]
        )


def write_matrix_csv(matrix: np.ndarray, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    labels = [d.label for d in DIMENSIONS]
    writer.writerow([""] + labels)
    for label, row in zip(labels, matrix):
        writer.writerow([label] + ["" if math.isnan(v) else repr(float(v)) for v in row])
