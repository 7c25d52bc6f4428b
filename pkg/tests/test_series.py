import io
import math
import random
import statistics
from datetime import date, timedelta

import numpy as np
import pytest

from moodseries.errors import DataError, RangeError
from moodseries.series import (
    DailyAccumulator,
    MoodSeries,
    aggregate_daily,
    read_series_csv,
    variance_normalize,
    window_stats,
    write_series_csv,
    zscore_normalize,
)

D0 = date(2008, 8, 1)
E = [tuple(1.0 if i == j else 0.0 for i in range(6)) for j in range(6)]


def _series(columns, start=D0, counts=None):
    values = np.column_stack(columns) if np.ndim(columns[0]) else np.array([columns])
    n = len(values)
    return MoodSeries(start, counts if counts is not None else [1] * n, values)


def _unit(rng):
    v = [rng.random() for _ in range(6)]
    n = math.sqrt(sum(x * x for x in v))
    return tuple(x / n for x in v)


def test_mean_of_one_and_two():
    s = aggregate_daily([(D0, E[0])])
    assert tuple(s.values[0]) == E[0]
    s = aggregate_daily([(D0, E[0]), (D0, E[1])])
    assert tuple(s.values[0]) == (0.5, 0.5, 0, 0, 0, 0)
    assert s.counts.tolist() == [2]


def test_hundred_random_vectors_match_brute_force_mean():
    rng = random.Random(7)
    vecs = [_unit(rng) for _ in range(100)]
    s = aggregate_daily([(D0, v) for v in vecs])
    for d in range(6):
        assert abs(s.values[0, d] - math.fsum(v[d] for v in vecs) / 100) <= 1e-12


def test_partition_and_shuffle_are_bitwise_identical():
    rng = random.Random(3)
    items = [(D0 + timedelta(days=rng.randrange(10)), _unit(rng)) for _ in range(2000)]
    ref = aggregate_daily(items, D0, D0 + timedelta(days=9))
    for _ in range(5):
        rng.shuffle(items)
        cut = sorted(rng.sample(range(1, len(items)), 3))
        parts = [items[a:b] for a, b in zip([0] + cut, cut + [len(items)])]
        accs = []
        for part in parts:
            acc = DailyAccumulator()
            for d, v in part:
                acc.add(d, v)
            accs.append(acc)
        total = DailyAccumulator()
        for acc in reversed(accs):
            total.merge(acc)
        got, skipped = total.finalize(D0, D0 + timedelta(days=9))
        assert skipped == 0
        assert got == ref
        assert got.values.tobytes() == ref.values.tobytes()


def test_empty_days_and_range():
    s = aggregate_daily([(D0 + timedelta(days=2), E[3])], D0, D0 + timedelta(days=4))
    assert len(s) == 5 and s.counts.tolist() == [0, 0, 1, 0, 0]
    assert np.isnan(s.values[0]).all()
    assert s.end == D0 + timedelta(days=4)


def test_out_of_range_messages_skipped():
    s = aggregate_daily([(D0, E[0]), (D0 + timedelta(days=9), E[1])], D0, D0)
    assert s.skipped == 1 and len(s) == 1


def test_reversed_range():
    with pytest.raises(RangeError):
        aggregate_daily([], D0, D0 - timedelta(days=1))


def test_empty_input_gives_empty_series():
    s = aggregate_daily([])
    assert len(s) == 0 and s.end is None


def test_series_is_read_only():
    s = _series([np.zeros(3)] * 6)
    with pytest.raises(ValueError):
        s.values[0, 0] = 1.0


def test_constant_window():
    s = _series([np.full(20, 0.3)] * 6)
    ws = window_stats(s, D0 + timedelta(days=10), 5)
    assert np.all(ws.mean == pytest.approx(0.3)) and np.all(ws.std == 0.0) and ws.n == 11


def test_window_truncated_at_start():
    s = _series([np.arange(100.0)] * 6)
    ws = window_stats(s, D0, 30)
    assert ws.n == 31
    assert ws.mean[0] == pytest.approx(15.0)


def test_linear_ramp_window():
    s = _series([np.arange(61.0)] * 6)
    ws = window_stats(s, D0 + timedelta(days=30), 30)
    assert ws.mean[0] == 30.0
    assert ws.std[0] == pytest.approx(statistics.stdev(range(61)), rel=1e-12)


def test_window_skips_empty_days():
    counts = [1, 0, 1, 0, 1]
    s = _series([np.array([1.0, 99.0, 3.0, 99.0, 5.0])] * 6, counts=counts)
    ws = window_stats(s, D0 + timedelta(days=2), 2)
    assert ws.n == 3 and ws.mean[0] == 3.0


def test_window_outside_series():
    s = _series([np.arange(5.0)] * 6)
    with pytest.raises(RangeError):
        window_stats(s, D0 - timedelta(days=1), 3)


def test_constant_series_zscores_are_flagged_zeros():
    s = _series([np.full(40, 0.2)] * 6)
    z = zscore_normalize(s, 30)
    assert np.all(z.values == 0.0) and z.degenerate.all()
    v = variance_normalize(s, 30)
    assert np.all(v.values == 0.0) and v.degenerate.all()


def test_value_equal_to_window_mean_is_zero():
    col = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    z = zscore_normalize(_series([col] * 6), 2)
    assert z.values[2, 0] == 0.0


def test_variance_division():
    # window of [1, 3, 5] has sample std 2
    col = np.array([1.0, 3.0, 5.0])
    v = variance_normalize(_series([col] * 6), 1)
    assert v.values[1, 0] == 1.5


def test_zero_valued_day_is_zero():
    col = np.array([1.0, 0.0, 5.0])
    assert variance_normalize(_series([col] * 6), 1).values[1, 0] == 0.0


def test_variance_ramp_matches_rolling_std():
    col = np.arange(200.0) * 0.01 + np.sin(np.arange(200.0))
    v = variance_normalize(_series([col] * 6), 30)
    for i in range(200):
        window = col[max(0, i - 30) : i + 31]
        assert v.values[i, 0] == pytest.approx(col[i] / np.std(window, ddof=1), rel=1e-12)


def test_single_day_window_is_degenerate():
    s = MoodSeries(D0, [1, 0, 0, 0, 0], np.vstack([np.full(6, 0.5)] + [np.full(6, np.nan)] * 4))
    z = zscore_normalize(s, 1)
    assert z.values[0].tolist() == [0.0] * 6 and z.degenerate[0].all()
    assert window_stats(s, D0, 1).degenerate


def test_normalization_leaves_raw_alone():
    rng = np.random.default_rng(1)
    s = _series(list(rng.random((6, 80))))
    before = s.values.copy()
    zscore_normalize(s, 10)
    variance_normalize(s, 10)
    assert np.array_equal(s.values, before)


def test_normalize_requires_raw_and_k():
    s = _series([np.arange(10.0)] * 6)
    with pytest.raises(ValueError):
        zscore_normalize(zscore_normalize(s, 3), 3)
    with pytest.raises(ValueError):
        zscore_normalize(s, 0)


def test_shift_equivariance():
    rng = np.random.default_rng(2)
    cols = list(rng.random((6, 120)))
    base = _series(cols)
    shifted = _series([cols[0] + 0.25] + cols[1:])
    z0, z1 = zscore_normalize(base, 10), zscore_normalize(shifted, 10)
    assert np.allclose(z0.values[:, 0], z1.values[:, 0], atol=1e-9, rtol=0)
    v0, v1 = variance_normalize(base, 10), variance_normalize(shifted, 10)
    sigma = np.array([window_stats(base, d, 10).std[0] for d in base.dates])
    assert np.allclose(v1.values[:, 0] - v0.values[:, 0], 0.25 / sigma, atol=1e-9, rtol=0)


def test_csv_round_trip_is_exact():
    rng = np.random.default_rng(4)
    counts = [3, 0, 2, 5, 1, 0, 4] * 5
    s = MoodSeries(D0, counts, rng.random((35, 6)))
    for series in (s, zscore_normalize(s, 4), variance_normalize(s, 4)):
        fh = io.StringIO()
        write_series_csv(series, fh)
        fh.seek(0)
        assert read_series_csv(fh) == series


def test_csv_fixed_decimals():
    s = _series([np.array([1 / 3])] * 6)
    fh = io.StringIO()
    write_series_csv(s, fh, decimals=9)
    row = fh.getvalue().splitlines()[1]
    assert row == "2008-08-01,1,0.333333333,0.333333333,0.333333333,0.333333333,0.333333333,0.333333333,raw,,000000"


def test_csv_rejects_gaps_and_bad_header():
    with pytest.raises(DataError):
        read_series_csv(io.StringIO("date,x\n"))
    s = _series([np.arange(3.0)] * 6)
    fh = io.StringIO()
    write_series_csv(s, fh)
    lines = fh.getvalue().splitlines()
    del lines[2]
    with pytest.raises(DataError, match="contiguous"):
        read_series_csv(io.StringIO("\n".join(lines)))


def test_slices_and_between():
    s = _series([np.arange(5.0)] * 6, counts=[1, 0, 1, 1, 1])
    sl = list(s.slices())
    assert sl[1].empty and sl[0].vector == (0.0,) * 6
    assert s.between(D0, D0 + timedelta(days=2))[:, 0].tolist() == [0.0, 2.0]
    assert D0 in s and D0 + timedelta(days=5) not in s


def test_large_zscores_are_rare_on_stationary_noise():
    rng = np.random.default_rng(12)
    s = MoodSeries(D0, [1] * 5000, rng.normal(0.4, 0.05, (5000, 6)))
    z = zscore_normalize(s, 30).values[30:-30]
    assert np.count_nonzero(np.abs(z) > 6) == 0
    assert np.count_nonzero(np.abs(z) > 4) < 10
