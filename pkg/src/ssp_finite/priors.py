"""Stick-breaking weights, the base measure and the random finite representation.

A :class:`StickState` holds a lazily grown prefix of stick lengths
``v_1, v_2, ...`` together with the cumulative ``log prod_{l<j}(1 - v_l)``,
so that tail masses ``sum_{l>=j} w_l`` are always available exactly
(they equal the natural schedule ``xi_j``).

Given any schedule ``xi``, the truncation level ``K`` has pmf
``P(K = k | w) = (xi_k - xi_{k+1}) s_k`` with ``s_k = sum_{i<=k} w_i / xi_i``,
and conditionally on ``K = k`` the random measure is the finite mixture
with weights ``w_j / (xi_j s_k)``, ``j <= k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import _random
from .schedules import MAX_INDEX, DegenerateScheduleError, NaturalSchedule

# keeps log1p(-v) finite; Beta draws with tiny parameters can round to 0 or 1
_V_MIN = np.finfo(float).tiny
_V_MAX = 1.0 - np.finfo(float).epsneg


@dataclass
class DirichletSticks:
    """``v_j ~ Beta(1, alpha)`` i.i.d."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def params(self, j):
        j = np.asarray(j)
        return np.ones(j.shape), np.full(j.shape, float(self.alpha))


@dataclass
class BetaSticks:
    """Independent ``v_j ~ Beta(a - discount, b + j * discount)``.

    ``discount = 0`` gives constant Beta(a, b) lengths; ``a = 1``,
    ``b = theta`` and ``discount = sigma`` give the Pitman-Yor lengths
    ``Beta(1 - sigma, theta + j sigma)``.
    """

    a: float = 1.0
    b: float = 1.0
    discount: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.discount < self.a) or not self.b + self.discount > 0:
            raise ValueError("need 0 <= discount < a and b + discount > 0")

    @classmethod
    def pitman_yor(cls, sigma, theta):
        return cls(a=1.0, b=theta, discount=sigma)

    def params(self, j):
        j = np.asarray(j, dtype=float)
        return (np.full(j.shape, self.a - self.discount),
                self.b + j * self.discount)


@dataclass
class GeometricSticks:
    """Geometric stick-breaking: every length equals the shared ``v``."""

    v: float

    def __post_init__(self):
        if not 0.0 < self.v < 1.0:
            raise ValueError("v must lie in (0, 1)")


class StickState:
    """Growable stick-breaking prefix for one chain.

    Parameters
    ----------
    family : DirichletSticks, BetaSticks or GeometricSticks
        Prior law of the lengths.  New lengths are drawn from it on demand.
    rng : numpy.random.Generator, optional
        Stream used when the state has to extend itself (e.g. when a
        :class:`~ssp_finite.schedules.NaturalSchedule` is queried past the
        instantiated prefix).
    """

    def __init__(self, family, rng=None, capacity=32):
        self.family = family
        self.rng = rng
        self.size = 0
        self._v = np.empty(capacity)
        self._logxi = np.zeros(capacity + 1)

    @classmethod
    def from_lengths(cls, lengths, family=None, rng=None):
        lengths = np.asarray(lengths, dtype=float)
        state = cls(family if family is not None else BetaSticks(), rng=rng,
                    capacity=max(32, lengths.size))
        state.size = lengths.size
        state._v[:lengths.size] = lengths
        state._refresh(0)
        return state

    def __repr__(self):
        return "StickState(%r, size=%d)" % (self.family, self.size)

    @property
    def is_geometric(self):
        return isinstance(self.family, GeometricSticks)

    # -- views -------------------------------------------------------------
    @property
    def lengths(self):
        return self._v[:self.size]

    @property
    def log_xi_array(self):
        """``log xi_j`` for ``j = 1..size+1`` (natural schedule)."""
        return self._logxi[:self.size + 1]

    @property
    def log_weights(self):
        return np.log(self._v[:self.size]) + self._logxi[:self.size]

    @property
    def weights(self):
        return self._v[:self.size] * np.exp(self._logxi[:self.size])

    def tail(self, j):
        """``sum_{l>=j} w_l = prod_{l<j}(1 - v_l)``, from the lengths."""
        self.extend_to(j - 1)
        return math.exp(self._logxi[j - 1])

    # -- mutation ----------------------------------------------------------
    def _grow(self, n):
        if n <= self._v.size:
            return
        cap = max(n, 2 * self._v.size)
        v = np.empty(cap)
        v[:self.size] = self._v[:self.size]
        lx = np.zeros(cap + 1)
        lx[:self.size + 1] = self._logxi[:self.size + 1]
        self._v, self._logxi = v, lx

    def _refresh(self, start):
        """Recompute cumulative log products from index ``start`` (0-based)."""
        n = self.size
        v = np.minimum(np.maximum(self._v[start:n], _V_MIN), _V_MAX)
        self._v[start:n] = v
        self._logxi[start + 1:n + 1] = self._logxi[start] + np.cumsum(np.log1p(-v))

    def draw_prior(self, idx, rng):
        """Prior draws of the lengths at the 1-based indices ``idx``."""
        idx = np.asarray(idx)
        if self.is_geometric:
            return np.full(idx.shape, self.family.v)
        a, b = self.family.params(idx)
        return _random.beta(rng, a, b)

    def extend_to(self, j, rng=None):
        """Instantiate lengths through index ``j`` by drawing from the prior."""
        j = int(j)
        if j <= self.size:
            return
        if j > MAX_INDEX:
            raise DegenerateScheduleError("stick prefix would exceed %d" % MAX_INDEX)
        rng = rng if rng is not None else self.rng
        if rng is None and not self.is_geometric:
            raise ValueError("extending the sticks needs a random generator")
        self._grow(j)
        start = self.size
        self._v[start:j] = self.draw_prior(np.arange(start + 1, j + 1), rng)
        self.size = j
        self._refresh(start)

    def extend_until_log_tail_below(self, log_t, rng=None):
        """Extend until ``log xi_{size+1} <= log_t``."""
        while self._logxi[self.size] > log_t:
            self.extend_to(max(2 * self.size, self.size + 16), rng)

    def set_lengths(self, values, start=0):
        """Overwrite lengths ``start+1 .. start+len(values)`` and refresh."""
        values = np.asarray(values, dtype=float)
        end = start + values.size
        if end > self.size:
            self._grow(end)
            self.size = end
        self._v[start:end] = values
        self._refresh(start)

    def set_shared(self, v):
        """Geometric family: set the common length and refill the prefix."""
        self.family.v = float(v)
        self._v[:self.size] = self.family.v
        self._refresh(0)

    def truncate(self, j):
        """Forget lengths beyond index ``j``; they are redrawn from the prior later."""
        self.size = min(self.size, max(int(j), 0))

    def redraw(self, start, stop, rng):
        """Replace lengths ``start+1..stop`` (1-based, inclusive) with prior draws."""
        if stop <= start:
            return
        self._grow(stop)
        self.size = max(self.size, stop)
        self._v[start:stop] = self.draw_prior(np.arange(start + 1, stop + 1), rng)
        self._refresh(start)

    def log_prior(self, upto):
        """Sum of Beta log-densities of lengths ``1..upto`` (0 for geometric)."""
        if self.is_geometric or upto <= 0:
            return 0.0
        idx = np.arange(1, upto + 1)
        a, b = self.family.params(idx)
        v = self._v[:upto]
        return float(np.sum((a - 1) * np.log(v) + (b - 1) * np.log1p(-v)
                            - special.betaln(a, b)))


@dataclass(frozen=True)
class BaseMeasure:
    """Independent ``Normal(mu | mu0, 1/tau0) x Gamma(tau | a, rate=b)``."""

    mu0: float = 0.0
    tau0: float = 0.001
    a: float = 0.001
    b: float = 0.001

    def __post_init__(self):
        if not (self.tau0 > 0 and self.a > 0 and self.b > 0):
            raise ValueError("tau0, a and b must be positive")

    def sample(self, size, rng):
        mu = rng.normal(self.mu0, 1.0 / math.sqrt(self.tau0), size)
        tau = rng.gamma(self.a, 1.0 / self.b, size)
        return mu, np.maximum(tau, TAU_MIN)

    def log_density(self, mu, tau):
        mu = np.asarray(mu, dtype=float)
        tau = np.asarray(tau, dtype=float)
        lmu = (0.5 * math.log(self.tau0 / (2 * math.pi))
               - 0.5 * self.tau0 * (mu - self.mu0) ** 2)
        ltau = (self.a * math.log(self.b) - special.gammaln(self.a)
                + (self.a - 1) * np.log(tau) - self.b * tau)
        return lmu + ltau


# Gamma draws with shape near 0.001 underflow to exactly 0.0
TAU_MIN = np.finfo(float).tiny


@dataclass(frozen=True)
class Atom:
    mu: float
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("atom precision must be positive")


def base_density_log(bm, atom):
    """Log density of ``atom`` under the base measure ``bm``."""
    return float(bm.log_density(atom.mu, atom.tau))


# -- finite representation ------------------------------------------------

def _log_s(sticks, schedule, kmax):
    """``log s_k`` for ``k = 1..kmax``."""
    sticks.extend_to(kmax)
    if isinstance(schedule, NaturalSchedule) and schedule.sticks is sticks:
        terms = np.log(sticks.lengths[:kmax])
    else:
        terms = sticks.log_weights[:kmax] - schedule.log_xi(np.arange(1, kmax + 1))
    return np.logaddexp.accumulate(terms)


def truncation_pmf(sticks, schedule, k):
    """``P(K = k | w) = (xi_k - xi_{k+1}) s_k``.

    ``k`` may be an int or an integer array.  With the natural schedule of
    the same sticks this is ``w_k * sum_{j<=k} v_j``; for geometric sticks
    it is ``k v^2 (1 - v)^(k-1)``.
    """
    k_arr = np.atleast_1d(np.asarray(k))
    if np.any(k_arr < 1):
        raise ValueError("k must be >= 1")
    own = isinstance(schedule, NaturalSchedule) and schedule.sticks is sticks
    if own and sticks.is_geometric:
        v = sticks.family.v
        out = k_arr * v * v * (1 - v) ** (k_arr - 1)
    elif own:
        kmax = int(k_arr.max())
        sticks.extend_to(kmax)
        cum_v = np.cumsum(sticks.lengths[:kmax])
        out = sticks.weights[k_arr - 1] * cum_v[k_arr - 1]
    else:
        out = np.exp(truncation_log_pmf(sticks, schedule, k_arr))
    return out if np.ndim(k) else float(out[0])


def truncation_log_pmf(sticks, schedule, k):
    """Log of the truncation pmf through the generic schedule formula."""
    k = np.atleast_1d(np.asarray(k))
    kmax = int(k.max())
    log_s = _log_s(sticks, schedule, kmax)
    return schedule.log_xi_gap(k) + log_s[k - 1]


def truncation_log_survival(sticks, schedule, kmax):
    """``log P(K > k | w)`` for ``k = 0..kmax``.

    Uses the exact identity ``P(K > k) = xi_{k+1} s_k + sum_{j>k} w_j``,
    whose last term is the stick tail.
    """
    sticks.extend_to(kmax)
    log_s = _log_s(sticks, schedule, kmax) if kmax else np.empty(0)
    k = np.arange(1, kmax + 1)
    head = schedule.log_xi(k + 1) + log_s
    tail = sticks.log_xi_array[1:kmax + 1]
    return np.concatenate(([0.0], np.logaddexp(head, tail)))


def finite_representation(sticks, schedule, mu, tau, k):
    """Weights and atoms of the finite mixture given ``K = k``.

    Returns ``(weights, atoms)`` where ``weights[j-1] = w_j / (xi_j s_k)``.
    ``mu`` and ``tau`` hold at least ``k`` atom parameters.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    sticks.extend_to(k)
    own = isinstance(schedule, NaturalSchedule) and schedule.sticks is sticks
    if own and sticks.is_geometric:
        weights = np.full(k, 1.0 / k)
    elif own:
        v = sticks.lengths[:k]
        weights = v / v.sum()
    else:
        lw = sticks.log_weights[:k] - schedule.log_xi(np.arange(1, k + 1))
        weights = np.exp(lw - special.logsumexp(lw))
    atoms = [Atom(float(m), float(t)) for m, t in zip(mu[:k], tau[:k])]
    return weights, atoms


def sample_truncation(sticks, schedule, rng, size=None):
    """Draw ``K`` from :func:`truncation_pmf` by inverting its survival curve.

    The stick prefix is extended until the survival function drops below
    the smallest uniform.  Raises :class:`DegenerateScheduleError` if that
    needs more than :data:`~ssp_finite.schedules.MAX_INDEX` indices.
    """
    u = rng.random(size)
    log_u = np.log(np.maximum(u, np.finfo(float).tiny))
    target = float(np.min(log_u))
    kmax = max(sticks.size, 8)
    while True:
        log_sf = truncation_log_survival(sticks, schedule, kmax)
        if log_sf[-1] <= target:
            break
        if kmax >= MAX_INDEX:
            raise DegenerateScheduleError(
                "P(K > %d) = %g is still above the draw" % (kmax, math.exp(log_sf[-1])))
        kmax = min(2 * kmax, MAX_INDEX)
    # K = smallest k with P(K > k) <= u ; log_sf is nonincreasing
    k = np.searchsorted(-log_sf, -log_u, side="left")
    return int(k) if size is None else k.astype(np.int64)
