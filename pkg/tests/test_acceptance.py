"""Acceptance criteria, one test per criterion.

Every test records a ``ACnn PASS|FAIL`` line that pytest prints in an
"acceptance criteria" section at the end of the run.
"""

import hashlib
import itertools
import math
import random
import subprocess
import sys
import textwrap
import time
from datetime import date

import numpy as np
import pytest
from conftest import ACCEPTANCE, DATA, DEMO

from moodseries import porter
from moodseries.analysis import builtin_periods, extract_event_window
from moodseries.lexicon import DIMENSIONS, Lexicon, MoodDimension
from moodseries.pipeline import RunConfig, run_pipeline
from moodseries.scoring import score, unit_normalize
from moodseries.series import MoodSeries, zscore_normalize
from moodseries.stats import compare_periods, mann_whitney, spearman_rho
from moodseries.synth import Injection, generate_corpus
from moodseries.textnorm import default_stopwords, tokenize


def record(num, title, ok, detail):
    line = f"AC{num:02d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.is_file()}


def _digest(files):
    h = hashlib.sha256()
    for name, data in sorted(files.items()):
        h.update(name.encode() + b"\0" + data)
    return h.hexdigest()[:16]


# ---------------------------------------------------------------------------


def test_ac01_tokenization_golden():
    text = "Feeling too lazy to go to the shops and get something to eat"
    default_stopwords()  # load the shipped list outside the timed call
    porter.stem.cache_clear()
    t0 = time.perf_counter()
    terms = tokenize(text).terms
    elapsed = time.perf_counter() - t0
    ok = list(terms) == ["feel", "lazi", "shop", "someth", "eat"] and elapsed < 1e-3
    record(1, "tokenization golden", ok, f"{list(terms)} in {elapsed * 1e3:.3f} ms (cold stem cache)")


def test_ac02_porter_reference_vocabulary():
    words = (DATA / "porter_voc.txt").read_text().split()
    expected = (DATA / "porter_output.txt").read_text().split()
    stemmer = porter.PorterStemmer()
    t0 = time.perf_counter()
    got = [stemmer.stem(w) for w in words]
    elapsed = time.perf_counter() - t0
    agree = sum(g == e for g, e in zip(got, expected))
    ok = len(words) == len(expected) and agree == len(words) and elapsed < 1.0
    record(2, "Porter oracle", ok, f"{agree}/{len(words)} agree in {elapsed:.3f} s")


def _brute_counts(terms, sets):
    counts = []
    for s in sets:
        seen = set()
        for t in terms:
            for entry in s:
                if t == entry:
                    seen.add(t)
        counts.append(len(seen))
    return tuple(counts)


def test_ac03_scoring_oracle():
    rng = random.Random(3)
    vocab = [f"t{i}" for i in range(30)]
    mismatches, worst = 0, 0.0
    for _ in range(1000):
        sets = [rng.sample(vocab, 5) for _ in range(6)]
        lex = Lexicon(tuple(frozenset(s) for s in sets), tuple({w: (w,) for w in s} for s in sets))
        terms = [rng.choice(vocab) for _ in range(rng.randint(0, 10))]
        m = score(terms, lex)
        if tuple(m) != _brute_counts(terms, sets):
            mismatches += 1
        u = unit_normalize(m)
        if u is not None:
            worst = max(worst, abs(math.sqrt(sum(v * v for v in u)) - 1.0))
    ok = mismatches == 0 and worst <= 1e-9
    record(3, "scoring oracle", ok, f"{mismatches} mismatches in 1000 cases, max | ||u|| - 1 | = {worst:.1e}")


def test_ac04_normalization_properties():
    rng = np.random.default_rng(2024)
    n = 10_000
    noise = MoodSeries(date(2000, 1, 1), np.ones(n, int), rng.normal(0.3, 0.05, (n, 6)))
    z = zscore_normalize(noise, 30).values
    means, stds = z.mean(axis=0), z.std(axis=0)
    const = zscore_normalize(MoodSeries(date(2000, 1, 1), np.ones(200, int), np.full((200, 6), 0.25)), 30)
    ok = (
        np.all(np.abs(means) <= 0.1)
        and np.all((stds >= 0.9) & (stds <= 1.1))
        and np.all(const.values == 0.0)
        and const.degenerate.all()
    )
    record(
        4,
        "normalization properties",
        ok,
        f"mean range [{means.min():+.4f}, {means.max():+.4f}], std range [{stds.min():.4f}, {stds.max():.4f}], "
        f"constant series all zero and flagged: {bool(np.all(const.values == 0) and const.degenerate.all())}",
    )


def _enumerated_p(a, b):
    """Two-sided p by listing every labeling; U from pairwise comparisons."""
    pooled = np.array(list(a) + list(b), dtype=float)
    n1, n2 = len(a), len(b)
    beats = (pooled[:, None] > pooled[None, :]) + 0.5 * (pooled[:, None] == pooled[None, :])
    # U1 of subset A = sum_{i in A, j not in A} beats[i, j]; pairs inside A sum to n1^2 / 2
    row = beats.sum(axis=1)
    combos = np.array(list(itertools.combinations(range(n1 + n2), n1)))
    u_all = row[combos].sum(axis=1) - n1 * n1 / 2
    u_obs = row[:n1].sum() - n1 * n1 / 2
    centre = n1 * n2 / 2
    return np.count_nonzero(np.abs(u_all - centre) >= abs(u_obs - centre)) / len(combos)


def _tie_free_with_u(n1, n2, u):
    b = list(range(n2))
    a, rem = [], u
    for i in range(n1):
        k = min(n2, rem)
        rem -= k
        a.append(k - 0.5 + i / (10 * (n1 + n2)))
    return a, b


def test_ac05_mann_whitney_exact_oracle():
    rng = random.Random(5)
    pairs = [(n1, n2) for n1 in range(1, 9) for n2 in range(1, 9)]
    worst_exact = 0.0
    for case in range(500):
        n1, n2 = pairs[case % len(pairs)]
        if case % 2:
            a = [rng.randint(0, 4) for _ in range(n1)]
            b = [rng.randint(0, 4) for _ in range(n2)]
        else:
            a = [rng.random() for _ in range(n1)]
            b = [rng.random() for _ in range(n2)]
        worst_exact = max(worst_exact, abs(mann_whitney(a, b, "exact").p - _enumerated_p(a, b)))

    # normal vs exact: every attainable U for every split with n1, n2 <= 8 and 12 <= n <= 16,
    # plus 500 random tie-free samples in the same range
    worst_normal = 0.0
    for n1, n2 in pairs:
        if 12 <= n1 + n2 <= 16:
            for u in range(n1 * n2 + 1):
                a, b = _tie_free_with_u(n1, n2, u)
                gap = abs(mann_whitney(a, b, "exact").p - mann_whitney(a, b, "normal").p)
                worst_normal = max(worst_normal, gap)
    big = [(n1, n2) for n1, n2 in pairs if 12 <= n1 + n2 <= 16]
    for _ in range(500):
        n1, n2 = rng.choice(big)
        a = [rng.random() for _ in range(n1)]
        b = [rng.random() for _ in range(n2)]
        worst_normal = max(worst_normal, abs(mann_whitney(a, b, "exact").p - mann_whitney(a, b, "normal").p))
    ok = worst_exact <= 1e-9 and worst_normal <= 0.02
    record(
        5,
        "Mann-Whitney exact oracle",
        ok,
        f"max |exact - enumeration| = {worst_exact:.1e} over 500 cases; max |normal - exact| = {worst_normal:.4f}",
    )


def _brute_rank(v):
    return [sum(w < x for w in v) + (sum(w == x for w in v) + 1) / 2 for x in v]


def test_ac06_spearman_oracle():
    rng = random.Random(6)
    worst, nan_mismatch, monotone_fail = 0.0, 0, 0
    for case in range(500):
        n = rng.randint(3, 20)
        if case % 2:
            x = [rng.randint(0, 5) for _ in range(n)]
            y = [rng.randint(0, 5) for _ in range(n)]
        else:
            x = [rng.random() for _ in range(n)]
            y = [rng.choice([rng.random(), 0.5]) for _ in range(n)]
        rx, ry = np.array(_brute_rank(x)), np.array(_brute_rank(y))
        rho = spearman_rho(x, y)
        if rx.std() == 0 or ry.std() == 0:
            nan_mismatch += not math.isnan(rho)
            continue
        ref = float(np.corrcoef(rx, ry)[0, 1])
        worst = max(worst, abs(rho - ref))
        if spearman_rho([math.exp(v) for v in x], [v**3 + 2 for v in y]) != rho:
            monotone_fail += 1
    ok = worst <= 1e-12 and nan_mismatch == 0 and monotone_fail == 0
    record(
        6,
        "Spearman oracle",
        ok,
        f"max |rho - brute force| = {worst:.1e}; monotone-transform changes: {monotone_fail}",
    )


def test_ac07_comparison_report_shape():
    start = date(2008, 8, 1)
    n = 153
    rng = np.random.default_rng(7)
    series = MoodSeries(start, np.ones(n, int), rng.random((n, 6)))
    shapes = {kind: len(compare_periods(series, builtin_periods(kind)).results) for kind in ("DJIA", "WTI")}
    d = date
    expected = {
        "DJIA": [
            ("DJIA-I", d(2008, 8, 1), d(2008, 8, 24)),
            ("DJIA-II", d(2008, 9, 15), d(2008, 10, 8)),  # shared Oct 9 goes to III
            ("DJIA-III", d(2008, 10, 9), d(2008, 10, 25)),
            ("DJIA-IV", d(2008, 12, 1), d(2008, 12, 20)),
        ],
        "WTI": [
            ("WTI-I", d(2008, 8, 1), d(2008, 8, 22)),
            ("WTI-II", d(2008, 9, 15), d(2008, 9, 30)),  # "September 31" read as Sep 30
            ("WTI-III", d(2008, 10, 1), d(2008, 11, 21)),
            ("WTI-IV", d(2008, 11, 22), d(2008, 12, 16)),
        ],
    }
    lists_ok = all([(p.name, p.start, p.end) for p in builtin_periods(k)] == v for k, v in expected.items())
    ok = shapes == {"DJIA": 36, "WTI": 36} and lists_ok
    record(7, "comparison-report shape", ok, f"rows per set {shapes}; built-in period lists match: {lists_ok}")


THANKSGIVING = date(2008, 11, 27)


@pytest.fixture(scope="module")
def injected_run(tmp_path_factory):
    d = tmp_path_factory.mktemp("ac08")
    t0 = time.perf_counter()
    with open(d / "corpus.jsonl", "w") as fh:
        counts = generate_corpus(
            fh,
            start=date(2008, 8, 1),
            days=153,
            per_day=400,
            seed=0,
            injections=[Injection(THANKSGIVING, MoodDimension.VIGOUR, 0.5)],
            cycle_origin=THANKSGIVING,
        )
    result = run_pipeline(
        RunConfig.from_mapping({"corpus": d / "corpus.jsonl", "out": d / "out", "events": THANKSGIVING.isoformat()})
    )
    return result, counts, time.perf_counter() - t0


def test_ac08_synthetic_injection(injected_run):
    # Background: each day's dimension mix follows a weekly cycle with
    # alternating phases; the event day sits where every cycle crosses its
    # mean. Half of that day's scored messages carry one extra Vigour word.
    result, _, elapsed = injected_run
    z = result.zscore.values[result.zscore.index_of(THANKSGIVING)]
    vig = z[MoodDimension.VIGOUR.position]
    others = [abs(z[d.position]) for d in DIMENSIONS if d is not MoodDimension.VIGOUR]
    window = extract_event_window(result.zscore, THANKSGIVING, 15)
    peak = window.offsets[int(np.argmax(window.dimension(MoodDimension.VIGOUR)))]
    ok = vig > 3 and max(others) < 1.5 and peak == 0 and elapsed < 30
    record(
        8,
        "synthetic injection",
        ok,
        f"Vigour z = {vig:+.2f}, max |z| elsewhere = {max(others):.2f}, window peak offset {peak}, {elapsed:.1f} s",
    )


N_RECORDS = 1_000_000


@pytest.fixture(scope="module")
def million(tmp_path_factory):
    d = tmp_path_factory.mktemp("ac09")
    corpus = d / "corpus.jsonl"
    with open(corpus, "w") as fh:
        counts = generate_corpus(fh, start=date(2008, 8, 1), days=125, per_day=8000, seed=9)
    runs = {}
    for workers in (1, 4, 8):
        out = d / f"out{workers}"
        t0 = time.perf_counter()
        result = run_pipeline(
            RunConfig.from_mapping({"corpus": corpus, "out": out, "workers": workers, "dump_scored": True})
        )
        runs[workers] = (time.perf_counter() - t0, _digest(_files(out)), result.diagnostics)
    return corpus, counts, runs


_MEM_PROBE = textwrap.dedent(
    """
    import resource, sys
    from moodseries.pipeline import RunConfig, run_pipeline
    corpus, copies, out = sys.argv[1], int(sys.argv[2]), sys.argv[3]
    r = run_pipeline(RunConfig.from_mapping({"corpus": [corpus] * copies, "out": out}))
    try:  # VmHWM restarts at exec; ru_maxrss may carry the parent's peak
        with open("/proc/self/status") as fh:
            peak = next(int(l.split()[1]) for l in fh if l.startswith("VmHWM:"))
    except (OSError, StopIteration):
        peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    print(r.diagnostics.total, peak)
    """
)


def _peak_rss(corpus, copies, out):
    proc = subprocess.run(
        [sys.executable, "-c", _MEM_PROBE, str(corpus), str(copies), str(out)],
        capture_output=True,
        text=True,
        check=True,
    )
    total, rss = map(int, proc.stdout.split())
    return total, rss


def test_ac09_determinism_and_scale(million, tmp_path):
    corpus, counts, runs = million
    digests = {w: digest for w, (_, digest, _) in runs.items()}
    times = {w: round(t, 1) for w, (t, _, _) in runs.items()}
    identical = len(set(digests.values())) == 1
    total1, rss1 = _peak_rss(corpus, 1, tmp_path / "m1")
    total10, rss10 = _peak_rss(corpus, 10, tmp_path / "m10")
    flat = rss10 <= 1.1 * rss1
    ok = (
        counts.lines == N_RECORDS
        and identical
        and max(times.values()) < 60
        and total10 == 10 * total1 == 10 * N_RECORDS
        and flat
    )
    record(
        9,
        "determinism and scale",
        ok,
        f"{counts.lines} records; seconds by workers {times}; identical bytes: {identical}; "
        f"peak RSS {rss1 // 1024} MiB at 1x vs {rss10 // 1024} MiB at 10x",
    )


def _conserved(d):
    return (
        d.total == d.scored_retained + d.candidate_rejected + d.zero_vector_dropped + d.malformed
        and d.out_of_range == 0
        and sum(d.scored_per_day.values()) == d.scored_retained
    )


def test_ac10_funnel_conservation(injected_run, million, tmp_path):
    checked = {}
    # synthetic corpora: conservation plus agreement with the generator's counts
    for name, (diag, counts) in {
        "injection": (injected_run[0].diagnostics, injected_run[1]),
        "1M": (million[2][1][2], million[1]),
    }.items():
        checked[name] = _conserved(diag) and (
            diag.total,
            diag.malformed,
            diag.candidate_rejected,
            diag.zero_vector_dropped,
            diag.scored_retained,
        ) == (counts.lines, counts.malformed, counts.noncandidate, counts.zero_vector, counts.scored)
    checked["1M workers 4, 8"] = all(million[2][w][2] == million[2][1][2] for w in (4, 8))
    # fixture and edge-case corpora
    (tmp_path / "empty.jsonl").write_text("")
    (tmp_path / "junk.jsonl").write_text("x\n\n{}\n")
    (tmp_path / "plain.jsonl").write_text('{"ts": "2008-08-01T00:00:00Z", "text": "lunch"}\n')
    corpora = {
        "demo": [DEMO / "corpus_a.jsonl", DEMO / "corpus_b.jsonl"],
        "empty": [tmp_path / "empty.jsonl"],
        "malformed only": [tmp_path / "junk.jsonl"],
        "no candidates": [tmp_path / "plain.jsonl"],
    }
    for name, paths in corpora.items():
        diag = run_pipeline(RunConfig.from_mapping({"corpus": paths, "periods": "none"}), write=False).diagnostics
        checked[name] = _conserved(diag)
    ok = all(checked.values())
    record(10, "funnel conservation", ok, ", ".join(f"{k}: {'ok' if v else 'BROKEN'}" for k, v in checked.items()))
