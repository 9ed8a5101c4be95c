import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import fixed_sticks, geometric_sticks
from ssp_finite.diagnostics import (TRACE_COLUMNS, DensityAccumulator, TraceRecord, TraceWriter,
                                    credible_band, default_grid, density_draw, ergodic_mean,
                                    occupied_clusters)
from ssp_finite.model import LatentState
from ssp_finite.priors import StickState
from ssp_finite.schedules import NaturalSchedule


def _state(sticks, mu, tau, k_star):
    z = np.ones(1, np.int64)
    return LatentState(z, [k_star], sticks, NaturalSchedule(sticks), mu=mu, tau=tau)


def test_single_atom_pdf():
    s = StickState.from_lengths([1.0 - 1e-16])
    state = _state(s, [0.0], [1.0], 1)
    assert density_draw(state, [0.0])[0] == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-12)
    assert density_draw(state, [0.0])[0] == pytest.approx(0.398942, abs=1e-6)


def test_symmetric_pair():
    s = StickState.from_lengths([0.5, 1.0 - 1e-16])
    state = _state(s, [-1.5, 1.5], [2.0, 2.0], 2)
    grid = np.linspace(-4, 4, 81)
    d = density_draw(state, grid)
    np.testing.assert_allclose(d, d[::-1], rtol=1e-12)
    assert np.all(d >= 0)


def test_gsb_integral():
    s = geometric_sticks(0.5, 4)
    state = _state(s, np.zeros(4), np.ones(4), 4)
    grid = np.linspace(-12, 12, 20001)
    assert np.trapezoid(density_draw(state, grid), grid) == pytest.approx(0.9375, abs=1e-9)


def test_density_extends_lengths_when_needed():
    s = fixed_sticks(0.5, 2)
    state = _state(s, np.zeros(2), np.ones(2), 2)
    state.k_star = 2
    assert density_draw(state, np.zeros(3)).shape == (3,)


@pytest.mark.parametrize("z,want", [([3, 3, 3], 1), ([1, 1, 2, 5], 3), (list(range(1, 8)), 7)])
def test_occupied_examples(z, want):
    assert occupied_clusters(z) == want


@given(st.lists(st.integers(1, 30), min_size=1, max_size=60))
def test_occupied_matches_set_count(z):
    assert occupied_clusters(z) == len(set(z)) <= max(z)


def test_ergodic_mean_examples():
    np.testing.assert_allclose(ergodic_mean([1, 2, 3]), [1, 1.5, 2])
    np.testing.assert_array_equal(ergodic_mean(np.full(5, 2.5)), np.full(5, 2.5))
    with pytest.raises(ValueError):
        ergodic_mean([])


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50), st.floats(-10, 10))
def test_ergodic_mean_linear(x, a):
    np.testing.assert_allclose(ergodic_mean(np.multiply(a, x)), a * ergodic_mean(x),
                               rtol=1e-9, atol=1e-6)


def test_band_examples():
    lo, hi = credible_band(np.arange(1, 101, dtype=float)[:, None])
    assert lo[0] == pytest.approx(3.475) and hi[0] == pytest.approx(97.525)
    lo, hi = credible_band(np.full((7, 3), 4.2))
    np.testing.assert_array_equal(lo, 4.2)
    np.testing.assert_array_equal(hi, 4.2)
    d = np.random.default_rng(0).normal(size=(500, 4))
    lo, hi = credible_band(d)
    m = d.mean(axis=0)
    assert np.all(lo <= m) and np.all(m <= hi)
    with pytest.raises(ValueError):
        credible_band(np.ones((1, 3)))


def test_accumulator_streaming_matches_batch():
    rng = np.random.default_rng(1)
    rows = rng.gamma(2.0, size=(5000, 7))
    acc = DensityAccumulator(np.arange(7.0), max_stored=2048)
    for r in rows:
        acc.add(r)
    np.testing.assert_allclose(acc.mean, rows.mean(axis=0), rtol=1e-12)
    assert acc.count == 5000 and len(acc.stored) <= 2048
    exact = DensityAccumulator(np.arange(7.0), exact=True)
    for r in rows:
        exact.add(r)
    lo, hi = exact.band()
    lo2, hi2 = credible_band(rows)
    np.testing.assert_array_equal(lo, lo2)
    np.testing.assert_array_equal(hi, hi2)
    # the thinned subsample (>= 1024 rows) approximates the exact band; the
    # bounds are about four standard errors of the Gamma(2) quantiles
    lo3, hi3 = acc.band()
    assert len(acc.stored) >= 1024
    assert np.max(np.abs(lo3 - lo2)) < 0.1 and np.max(np.abs(hi3 - hi2)) < 1.0


def test_accumulator_thinning_is_even():
    acc = DensityAccumulator([0.0], max_stored=8)
    for i in range(64):
        acc.add([float(i)])
    kept = acc.stored[:, 0]
    assert np.all(np.diff(kept) == kept[1] - kept[0])


def test_accumulator_merge():
    a, b = DensityAccumulator([0.0, 1.0]), DensityAccumulator([0.0, 1.0])
    a.add([1.0, 2.0])
    b.add([3.0, 6.0])
    b.add([5.0, 7.0])
    a.merge(b)
    np.testing.assert_allclose(a.mean, [3.0, 5.0])


def test_density_csv(tmp_path):
    acc = DensityAccumulator([0.0, 0.5])
    for r in ([1.0, 2.0], [3.0, 4.0]):
        acc.add(r)
    p = tmp_path / "density.csv"
    acc.write_csv(p)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["x", "mean", "lo95", "hi95"]
    assert [float(v) for v in rows[1][:2]] == [0.0, 2.0]


def test_trace_writer(tmp_path):
    p = tmp_path / "trace.csv"
    with TraceWriter(p) as tw:
        tw.write(TraceRecord(1, 2, 3, 0.1, 0.5))
        tw.write(TraceRecord(2, 2, 4, 1 / 3, 0.75))
    rows = list(csv.reader(open(p)))
    assert rows[0] == TRACE_COLUMNS == ["iter", "c_n", "k_star", "conc_or_v", "elapsed_s"]
    assert rows[1] == ["1", "2", "3", "0.10000000000000001", "0.500000"]
    assert float(rows[2][3]) == 1 / 3


def test_default_grid():
    g = default_grid([0.0, 1.0, 2.0])
    assert g.size == 500
    assert g[0] == pytest.approx(-3.0) and g[-1] == pytest.approx(5.0)
    assert np.allclose(np.diff(g), np.diff(g)[0])
