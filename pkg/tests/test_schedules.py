import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import fixed_sticks
from ssp_finite.priors import DirichletSticks, StickState
from ssp_finite.schedules import (MAX_INDEX, DegenerateScheduleError, ExponentialSchedule,
                                  GeometricSchedule, NaturalSchedule, parse_schedule)


def test_xi_examples():
    assert ExponentialSchedule(1.0).xi(2) == pytest.approx(0.135335, abs=1e-6)
    g = GeometricSchedule(0.5)
    # computed through exp(log), so allow last-bit rounding
    assert g.xi(1) == pytest.approx(0.5, rel=1e-15)
    assert g.xi(3) == pytest.approx(0.125, rel=1e-15)
    assert NaturalSchedule(fixed_sticks(0.5, 5)).xi(3) == 0.25


def test_xi_gap_examples():
    assert NaturalSchedule(fixed_sticks(0.5, 5)).xi_gap(2) == 0.25
    assert ExponentialSchedule(1.0).xi_gap(1) == pytest.approx(0.232544, abs=1e-6)
    assert GeometricSchedule(0.5).xi_gap(2) == pytest.approx(0.125, rel=1e-15)


def test_smallest_index_examples():
    assert ExponentialSchedule(1.0).smallest_index_with_xi_below(0.05) == 2
    assert GeometricSchedule(0.5).smallest_index_with_xi_below(0.2) == 2
    # xi = 1, 0.1, 0.01, 0.001: xi_4 is the first one <= 0.009
    assert NaturalSchedule(fixed_sticks(0.9, 10)).smallest_index_with_xi_below(0.009) == 3


def test_natural_recursion_and_first_term():
    s = fixed_sticks([0.3, 0.6, 0.2, 0.9])
    sch = NaturalSchedule(s)
    assert sch.xi(1) == 1.0
    xi = sch.xi(np.arange(1, 5))
    v = s.lengths
    np.testing.assert_allclose(xi[1:], xi[:-1] * (1 - v[:-1]), rtol=1e-15)


def test_natural_gap_is_weight():
    s = fixed_sticks(np.random.default_rng(1).uniform(0.05, 0.95, 30))
    sch = NaturalSchedule(s)
    k = np.arange(1, 31)
    assert np.array_equal(sch.xi_gap(k), s.weights[:30])
    np.testing.assert_allclose(sch.xi_gap(k), sch.xi(k) - sch.xi(k + 1), rtol=1e-12)


def test_natural_extends_from_prior():
    s = StickState(DirichletSticks(2.0), rng=np.random.default_rng(3))
    sch = NaturalSchedule(s)
    assert sch.xi(50) > 0
    assert s.size >= 49
    before = sch.xi(50)
    assert sch.xi(50) == before  # no hidden redraws


@given(eta=st.floats(0.01, 5.0), j=st.integers(1, 10**4))
def test_exponential_strictly_decreasing(eta, j):
    sch = ExponentialSchedule(eta)
    assert sch.log_xi(j) > sch.log_xi(j + 1)
    assert sch.log_xi_gap(j) > -math.inf


@given(rho=st.floats(0.01, 0.99), j=st.integers(1, 10**4))
def test_geometric_strictly_decreasing(rho, j):
    sch = GeometricSchedule(rho)
    assert sch.log_xi(j) > sch.log_xi(j + 1)
    assert sch.xi(1) <= 1


@pytest.mark.parametrize("sch", [ExponentialSchedule(0.3), GeometricSchedule(0.8)])
def test_deterministic_monotone_to_ten_thousand(sch):
    lx = sch.log_xi(np.arange(1, 10**4 + 2))
    assert np.all(np.diff(lx) < 0)
    assert sch.xi(10**4) < 1e-100 or sch.xi(10**4) < sch.xi(1)


@given(seed=st.integers(0, 2**32 - 1), alpha=st.floats(0.1, 20.0))
@settings(max_examples=30)
def test_natural_strict_decrease(seed, alpha):
    s = StickState(DirichletSticks(alpha), rng=np.random.default_rng(seed))
    lx = NaturalSchedule(s).log_xi(np.arange(1, 2001))
    assert np.all(np.diff(lx) < 0)


def test_xi_tends_to_zero():
    for sch in (ExponentialSchedule(0.1), GeometricSchedule(0.95)):
        assert sch.xi(10**4) < 1e-30
    s = StickState(DirichletSticks(5.0), rng=np.random.default_rng(0))
    assert NaturalSchedule(s).xi(5000) < 1e-30


@pytest.mark.parametrize("sch", [ExponentialSchedule(0.7), GeometricSchedule(0.4)])
def test_gap_same_arithmetic(sch):
    k = np.arange(1, 200)
    assert np.array_equal(sch.xi_gap(k), sch.xi(k) - sch.xi(k + 1))


@pytest.mark.parametrize("make", [lambda: ExponentialSchedule(0.05),
                                  lambda: GeometricSchedule(0.97),
                                  lambda: NaturalSchedule(fixed_sticks(0.01, 1000))])
def test_telescoping(make):
    sch = make()
    J = 1000
    gaps = sch.xi_gap(np.arange(1, J + 1))
    for j in (1, 10, 500):
        assert abs(math.fsum(gaps[j - 1:]) - (sch.xi(j) - sch.xi(J + 1))) <= 1e-12


@given(eta=st.floats(0.05, 4.0), t=st.floats(1e-200, 0.999))
def test_exponential_inverse_is_smallest(eta, t):
    sch = ExponentialSchedule(eta)
    j = sch.smallest_index_with_xi_below(t)
    assert sch.log_xi(j + 1) <= math.log(t)
    assert j == 1 or sch.log_xi(j) > math.log(t)


@given(rho=st.floats(0.05, 0.99), t=st.floats(1e-200, 0.999))
def test_geometric_inverse_is_smallest(rho, t):
    sch = GeometricSchedule(rho)
    j = sch.smallest_index_with_xi_below(t)
    assert sch.log_xi(j + 1) <= math.log(t)
    assert j == 1 or sch.log_xi(j) > math.log(t)


@given(seed=st.integers(0, 10**6), t=st.floats(1e-50, 0.99))
@settings(max_examples=40)
def test_natural_inverse_is_smallest(seed, t):
    s = StickState(DirichletSticks(1.5), rng=np.random.default_rng(seed))
    sch = NaturalSchedule(s)
    j = sch.smallest_index_with_xi_below(t)
    assert sch.log_xi(j + 1) <= math.log(t)
    assert j == 1 or sch.log_xi(j) > math.log(t)


def test_inverse_vectorised_matches_scalar():
    sch = ExponentialSchedule(0.37)
    t = np.geomspace(1e-8, 0.9, 50)
    assert list(sch.smallest_index_with_xi_below(t)) == [
        sch.smallest_index_with_xi_below(float(x)) for x in t]


def test_search_cap_raises():
    with pytest.raises(DegenerateScheduleError):
        ExponentialSchedule(1e-9).smallest_index_with_xi_below(1e-300)
    assert MAX_INDEX == 10**6


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_exponential_rejects(bad):
    with pytest.raises(ValueError):
        ExponentialSchedule(bad)


@pytest.mark.parametrize("bad", [0.0, 1.0, 1.5, math.nan])
def test_geometric_rejects(bad):
    with pytest.raises(ValueError):
        GeometricSchedule(bad)


def test_parse():
    assert isinstance(parse_schedule("exp:0.2"), ExponentialSchedule)
    assert parse_schedule("exp:0.2").eta == 0.2
    assert parse_schedule(" GEOM:0.5 ").rho == 0.5
    s = fixed_sticks(0.5, 3)
    assert parse_schedule("natural", s).sticks is s
    for bad in ("natural", "exp", "poly:2", "exp:-1"):
        with pytest.raises(ValueError):
            parse_schedule(bad)


def test_index_validation():
    with pytest.raises(ValueError):
        ExponentialSchedule(1.0).xi(0)
