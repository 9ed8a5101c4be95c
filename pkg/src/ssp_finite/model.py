"""Hierarchical mixture state and its joint log density.

Observation ``i`` carries an allocation ``z_i`` and a truncation level
``k_i`` with ``z_i <= k_i``.  The joint density of data and latents is

    p(w) prod_i (xi_{k_i} - xi_{k_i+1}) 1(z_i <= k_i)
         prod_{j <= k*} p(theta_j) (w_j / xi_j)^{n_j} prod_{i: z_i = j} N(x_i | theta_j)

with ``k* = max_i k_i``.  Only the first ``k*`` lengths and atoms enter;
anything instantiated beyond is inert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .priors import (BaseMeasure, BetaSticks, DirichletSticks, GeometricSticks,
                     StickState, TAU_MIN)
from .schedules import NaturalSchedule, parse_schedule

FAMILIES = ("dp", "betaseq", "gsb")
_LOG_2PI = math.log(2 * math.pi)


class InconsistentStateError(RuntimeError):
    """The latent state breaks a bookkeeping invariant (a bug, not a -inf)."""


@dataclass
class ModelSpec:
    """Prior and sampler configuration.

    ``family`` is ``"dp"`` (Beta(1, alpha) lengths, gamma prior on alpha),
    ``"betaseq"`` (fixed Beta(a - discount, b + j discount) lengths) or
    ``"gsb"`` (one shared length with a Beta prior).  ``schedule`` uses the
    ``"natural" | "exp:<eta>" | "geom:<rho>"`` syntax.
    """

    family: str = "dp"
    schedule: str = "natural"
    base: BaseMeasure = field(default_factory=BaseMeasure)
    alpha_prior: tuple = (0.1, 0.1)
    gsb_prior: tuple = (1.0, 1.0)
    betaseq: BetaSticks = field(default_factory=BetaSticks)
    freeze_concentration: bool = False
    alpha_init: float | None = None
    init_clusters: int = 10

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError("family must be one of %s" % (FAMILIES,))
        if min(self.alpha_prior) <= 0 or min(self.gsb_prior) <= 0:
            raise ValueError("hyperparameters must be positive")
        parse_schedule(self.schedule, sticks=object())  # syntax check
        if self.init_clusters < 1:
            raise ValueError("init_clusters must be >= 1")

    @property
    def natural(self):
        return self.schedule.strip().lower() == "natural"


@dataclass
class Counts:
    n: np.ndarray  # occupancy  #{z_i = j}
    m: np.ndarray  # #{k_i = j}
    h: np.ndarray  # #{k_i > j}
    r: np.ndarray  # #{z_i > j}


class LatentState:
    """Allocations, truncations, atoms and sticks of one chain.

    ``z`` and ``k`` are 1-based integer arrays.  ``mu[j-1], tau[j-1]`` is
    atom ``j``; ``n_atoms`` of them are instantiated.
    """

    def __init__(self, z, k, sticks, schedule, mu=(), tau=(), k_star=None):
        self.z = np.asarray(z, dtype=np.int64).copy()
        self.k = np.asarray(k, dtype=np.int64).copy()
        self.sticks = sticks
        self.schedule = schedule
        self.n_atoms = len(mu)
        cap = max(32, self.n_atoms)
        self._mu = np.zeros(cap)
        self._tau = np.ones(cap)
        self._mu[:self.n_atoms] = mu
        self._tau[:self.n_atoms] = tau
        if k_star is None:
            k_star = int(self.k.max()) if self.k.size else 0
        self.k_star = int(k_star)

    @property
    def n(self):
        return self.z.size

    @property
    def mu(self):
        return self._mu[:self.n_atoms]

    @property
    def tau(self):
        return self._tau[:self.n_atoms]

    @property
    def alpha(self):
        return self.sticks.family.alpha

    @property
    def v(self):
        return self.sticks.family.v

    @property
    def hyper(self):
        """Concentration (DP), shared length (GSB) or NaN."""
        fam = self.sticks.family
        if isinstance(fam, DirichletSticks):
            return fam.alpha
        if isinstance(fam, GeometricSticks):
            return fam.v
        return float("nan")

    def atom_arrays(self, upto):
        return self._mu[:upto], self._tau[:upto]

    def _grow_atoms(self, n):
        if n <= self._mu.size:
            return
        cap = max(n, 2 * self._mu.size)
        mu, tau = np.zeros(cap), np.ones(cap)
        mu[:self.n_atoms] = self.mu
        tau[:self.n_atoms] = self.tau
        self._mu, self._tau = mu, tau

    def set_atoms(self, start, mu, tau):
        """Write atoms ``start+1 .. start+len(mu)``."""
        end = start + len(mu)
        self._grow_atoms(end)
        self._mu[start:end] = mu
        self._tau[start:end] = np.maximum(tau, TAU_MIN)
        self.n_atoms = max(self.n_atoms, end)

    def draw_atoms(self, start, stop, base, rng):
        """Fresh base-measure atoms at indices ``start+1 .. stop``."""
        if stop > start:
            mu, tau = base.sample(stop - start, rng)
            self.set_atoms(start, mu, tau)

    def ensure_atoms(self, upto, base, rng):
        self.draw_atoms(self.n_atoms, upto, base, rng)

    def copy(self):
        sticks = StickState.from_lengths(self.sticks.lengths.copy(),
                                         family=_copy_family(self.sticks.family),
                                         rng=self.sticks.rng)
        if isinstance(self.schedule, NaturalSchedule):
            schedule = NaturalSchedule(sticks)
        else:
            schedule = self.schedule
        out = self.__class__.__new__(self.__class__)
        out.__dict__.update(self.__dict__)
        out.z, out.k = self.z.copy(), self.k.copy()
        out._mu, out._tau = self._mu.copy(), self._tau.copy()
        out.sticks, out.schedule = sticks, schedule
        return out


def _copy_family(fam):
    return type(fam)(**fam.__dict__)


def make_sticks(spec, rng, hyper=None):
    """Stick state for ``spec``; ``hyper`` is alpha (DP) or v (GSB) if given."""
    if spec.family == "dp":
        if hyper is None:
            hyper = spec.alpha_init
        if hyper is None:
            a, b = spec.alpha_prior
            hyper = rng.gamma(a, 1.0 / b)
        fam = DirichletSticks(max(float(hyper), np.finfo(float).tiny))
    elif spec.family == "gsb":
        if hyper is None:
            hyper = rng.beta(*spec.gsb_prior)
        fam = GeometricSticks(float(np.clip(hyper, 1e-300, 1 - 1e-16)))
    else:
        fam = _copy_family(spec.betaseq)
    return StickState(fam, rng=rng)


def make_schedule(spec, sticks):
    return parse_schedule(spec.schedule, sticks=sticks)


def initial_partition(data, m):
    """Split the sorted data into ``m`` contiguous equal-size groups.

    Returns 1-based labels plus each group's mean and precision.
    """
    data = np.asarray(data, dtype=float)
    n = data.size
    m = max(1, min(m, n))
    z = np.empty(n, np.int64)
    z[np.argsort(data, kind="stable")] = np.arange(n) * m // n + 1
    cnt = np.bincount(z, minlength=m + 1)[1:]
    mean = np.bincount(z, weights=data, minlength=m + 1)[1:] / cnt
    var = np.bincount(z, weights=(data - mean[z - 1]) ** 2, minlength=m + 1)[1:] / cnt
    spread = data.var() if n > 1 else 1.0
    var = np.maximum(var, 1e-3 * spread if spread > 0 else 1.0)
    return z, mean, 1.0 / var


def recompute_counts(state):
    """Counts ``n, m, h, r`` for ``j = 1..k_star``."""
    ks = state.k_star
    n = np.bincount(state.z, minlength=ks + 1)[1:ks + 1]
    m = np.bincount(state.k, minlength=ks + 1)[1:ks + 1]
    return Counts(n=n, m=m, h=_exceedances(m), r=_exceedances(n))


def _exceedances(c):
    # e_j = sum_{l > j} c_l
    total = np.cumsum(c[::-1])[::-1]
    return np.concatenate((total[1:], [0])).astype(np.int64)


def log_normal(x, mu, tau):
    return 0.5 * (np.log(tau) - _LOG_2PI) - 0.5 * tau * (x - mu) ** 2


def allocation_log_coef(state, upto):
    """``log(w_j / xi_j)`` for ``j = 1..upto``."""
    sticks, schedule = state.sticks, state.schedule
    sticks.extend_to(upto)
    if isinstance(schedule, NaturalSchedule) and schedule.sticks is sticks:
        if sticks.is_geometric:
            return np.full(upto, math.log(sticks.family.v))
        return np.log(sticks.lengths[:upto])
    return sticks.log_weights[:upto] - schedule.log_xi(np.arange(1, upto + 1))


def log_hyperprior(state, spec):
    fam = state.sticks.family
    if isinstance(fam, DirichletSticks):
        a, b = spec.alpha_prior
        return float(stats.gamma.logpdf(fam.alpha, a, scale=1.0 / b))
    if isinstance(fam, GeometricSticks):
        return float(stats.beta.logpdf(fam.v, *spec.gsb_prior))
    return 0.0


def log_joint(state, data, spec):
    """Log joint density of ``(x, z, k, theta_{1:k*}, v_{1:k*}, hyper)``.

    Returns ``-inf`` if some ``z_i > k_i``.  Raises
    :class:`InconsistentStateError` if ``k_star`` disagrees with ``k`` or
    atoms are missing.
    """
    z, k, ks = state.z, state.k, state.k_star
    if np.any(z > k) or np.any(z < 1):
        return -math.inf
    if k.size and ks != int(k.max()):
        raise InconsistentStateError("k_star=%d but max k=%d" % (ks, k.max()))
    if state.n_atoms < ks:
        raise InconsistentStateError("only %d atoms for k_star=%d" % (state.n_atoms, ks))
    data = np.asarray(data, dtype=float)
    state.sticks.extend_to(ks)
    mu, tau = state.atom_arrays(ks)
    out = float(np.sum(state.schedule.log_xi_gap(k))) if k.size else 0.0
    out += float(np.sum(spec.base.log_density(mu, tau)))
    if z.size:
        out += float(np.sum(allocation_log_coef(state, ks)[z - 1]))
        out += float(np.sum(log_normal(data, mu[z - 1], tau[z - 1])))
    out += state.sticks.log_prior(ks) + log_hyperprior(state, spec)
    return out


def beta_log_kernel(v, a, b):
    return (a - 1) * np.log(v) + (b - 1) * np.log1p(-v)


def gamma_log_kernel(x, shape, rate):
    return (shape - 1) * np.log(x) - rate * x


def beta_logpdf(v, a, b):
    return beta_log_kernel(v, a, b) - special.betaln(a, b)
