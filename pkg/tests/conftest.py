import numpy as np
import pytest

from ssp_finite.priors import DirichletSticks, GeometricSticks, StickState


def fixed_sticks(v, n=None, family=None):
    """Stick state with lengths ``v`` (repeated to ``n`` if scalar)."""
    if np.ndim(v) == 0:
        v = np.full(n, float(v))
    return StickState.from_lengths(v, family=family or DirichletSticks(1.0),
                                   rng=np.random.default_rng(0))


def geometric_sticks(v, n=0):
    s = StickState(GeometricSticks(v))
    s.extend_to(n)
    return s


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def tiny_state(seed, family="dp", schedule="natural", n=None, kmax=4):
    """Random valid state with ``n <= 5`` and ``k* <= kmax``, plus data and spec."""
    from ssp_finite.model import LatentState, ModelSpec, make_schedule, make_sticks
    from ssp_finite.priors import BaseMeasure

    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6)) if n is None else n
    spec = ModelSpec(family=family, schedule=schedule,
                     base=BaseMeasure(0.3, 0.5, 2.0, 1.5), alpha_prior=(1.5, 0.7),
                     gsb_prior=(1.3, 2.1))
    sticks = make_sticks(spec, rng)
    sch = make_schedule(spec, sticks)
    k = rng.integers(1, kmax + 1, n)
    k[rng.integers(n)] = kmax
    z = np.array([rng.integers(1, ki + 1) for ki in k])
    sticks.extend_to(kmax + 2, rng)
    state = LatentState(z, k, sticks, sch, mu=rng.normal(0, 2, kmax + 2),
                        tau=rng.gamma(2.0, 1.0, kmax + 2))
    data = rng.normal(0, 2, n)
    return state, data, spec, rng


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
