import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from conftest import fixed_sticks, tiny_state
from ssp_finite.model import (Counts, InconsistentStateError, LatentState, ModelSpec,
                              initial_partition, log_joint, log_normal, recompute_counts)
from ssp_finite.priors import BaseMeasure, DirichletSticks
from ssp_finite.schedules import ExponentialSchedule, NaturalSchedule


def _state(z, k, v=0.5, schedule=None):
    kmax = max(k)
    s = fixed_sticks(v, kmax + 1)
    sch = schedule or NaturalSchedule(s)
    return LatentState(z, k, s, sch, mu=np.zeros(kmax), tau=np.ones(kmax))


def test_counts_example():
    c = recompute_counts(_state([1, 1, 2, 5], [2, 3, 2, 5]))
    np.testing.assert_array_equal(c.n, [2, 1, 0, 0, 1])
    np.testing.assert_array_equal(c.m, [0, 2, 1, 0, 1])
    np.testing.assert_array_equal(c.h, [4, 2, 1, 1, 0])
    # r_j = #{z_i > j}: z = 5 exceeds j = 1..4
    np.testing.assert_array_equal(c.r, [2, 1, 1, 1, 0])


def test_counts_single_component():
    c = recompute_counts(_state([1] * 6, [1] * 6))
    assert list(c.n) == [6] and list(c.m) == [6] and list(c.h) == [0] and list(c.r) == [0]


@given(seed=st.integers(0, 10**6))
@settings(max_examples=50)
def test_counts_properties(seed):
    state, *_ = tiny_state(seed)
    c = recompute_counts(state)
    assert c.n.sum() == state.n
    assert np.all(np.diff(c.h) <= 0) and np.all(np.diff(c.r) <= 0)
    for j in range(1, state.k_star + 1):
        assert c.h[j - 1] == np.sum(state.k > j)
        assert c.r[j - 1] == np.sum(state.z > j)
        assert c.m[j - 1] == np.sum(state.k == j)
    c2 = recompute_counts(state)
    assert all(np.array_equal(getattr(c, f), getattr(c2, f)) for f in "nmhr")


def test_log_joint_support_violation():
    state, data, spec, _ = tiny_state(3, n=3)
    state.z[0] = state.k[0] + 1
    assert log_joint(state, data, spec) == -math.inf


def test_log_joint_inconsistent_kstar():
    state, data, spec, _ = tiny_state(3, n=3)
    state.k_star += 1
    with pytest.raises(InconsistentStateError):
        log_joint(state, data, spec)
    state, data, spec, _ = tiny_state(3, n=3)
    state.n_atoms = state.k_star - 1
    with pytest.raises(InconsistentStateError):
        log_joint(state, data, spec)


def test_log_joint_hand_evaluation():
    # n = 1, natural schedule, v = (0.5), z = k = 1
    x, mu, tau = 0.7, 0.2, 1.5
    bm = BaseMeasure(0.0, 1.0, 2.0, 2.0)
    spec = ModelSpec(family="dp", schedule="natural", base=bm, alpha_prior=(2.0, 1.0))
    sticks = fixed_sticks([0.5], family=DirichletSticks(1.3))
    state = LatentState([1], [1], sticks, NaturalSchedule(sticks), mu=[mu], tau=[tau])
    want = (math.log(0.5)                     # xi_1 - xi_2 = w_1
            + math.log(0.5)                   # w_1 / xi_1
            + stats.norm.logpdf(x, mu, 1 / math.sqrt(tau))
            + stats.norm.logpdf(mu, 0, 1) + stats.gamma.logpdf(tau, 2, scale=0.5)
            + stats.beta.logpdf(0.5, 1, 1.3)
            + stats.gamma.logpdf(1.3, 2.0, scale=1.0))
    assert log_joint(state, [x], spec) == pytest.approx(want, rel=1e-12)


def test_log_joint_ignores_inert_components():
    state, data, spec, _ = tiny_state(8)
    before = log_joint(state, data, spec)
    state.set_atoms(state.k_star, [99.0], [7.0])
    assert log_joint(state, data, spec) == before


@given(seed=st.integers(0, 10**6), c=st.floats(-50, 50))
@settings(max_examples=30)
def test_likelihood_translation(seed, c):
    state, data, spec, _ = tiny_state(seed)
    mu = state.mu[state.z - 1]
    tau = state.tau[state.z - 1]
    a = log_normal(data, mu, tau).sum()
    b = log_normal(data + c, mu + c, tau).sum()
    assert a == pytest.approx(b, rel=1e-9, abs=1e-9)


def test_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec(family="pitman")
    with pytest.raises(ValueError):
        ModelSpec(alpha_prior=(0.0, 1.0))
    with pytest.raises(ValueError):
        ModelSpec(schedule="exp:oops")
    assert ModelSpec(schedule="natural").natural
    assert not ModelSpec(schedule="exp:1").natural


def test_initial_partition():
    data = np.array([5.0, 1.0, 3.0, 2.0, 4.0, 6.0])
    z, mean, prec = initial_partition(data, 3)
    np.testing.assert_array_equal(z, [3, 1, 2, 1, 2, 3])
    np.testing.assert_allclose(mean, [1.5, 3.5, 5.5])
    assert np.all(prec > 0)
    z1, *_ = initial_partition(data, 100)
    assert sorted(z1) == list(range(1, 7))


def test_copy_is_independent():
    state, data, spec, _ = tiny_state(5)
    other = state.copy()
    other.z[:] = 1
    other.sticks.set_lengths([0.123])
    other.set_atoms(0, [42.0], [1.0])
    assert state.mu[0] != 42.0
    assert state.sticks.lengths[0] != 0.123
    assert isinstance(other.schedule, NaturalSchedule) and other.schedule.sticks is other.sticks
