"""Full-conditional updates and the sweep for the finite-representation samplers.

A sweep visits, in order: atoms ``theta_j`` (j <= k*), stick lengths (or
the shared GSB length), the DP concentration, then every observation's
allocation ``z_i | k_i`` followed by its truncation ``k_i | z_i``, and
finally the ``k*`` bookkeeping.  Given the global parameters the
per-observation pairs are conditionally independent, so they are drawn
for all observations at once; the single-index functions wrap the same
code.

Two regimes for the schedule:

* natural (``xi_j = prod_{l<j}(1 - v_l)``): truncations couple to the
  sticks, lengths get ``Beta(a_j + n_j + m_j, b_j + h_j)``;
* deterministic (``exp:<eta>``, ``geom:<rho>``): standard stick-breaking
  conditionals ``Beta(a_j + n_j, b_j + r_j)`` and closed-form truncations.
"""

from __future__ import annotations

import math

import numpy as np

from . import _random
from . import model as _model
from .model import LatentState, log_normal, recompute_counts
from .priors import Atom, DirichletSticks, GeometricSticks
from .schedules import ExponentialSchedule, GeometricSchedule, NaturalSchedule

_TINY = np.finfo(float).tiny
_V_CLAMP = 1.0 - 1e-15


def init_state(data, spec, rng):
    """Starting state.

    With ``spec.init_clusters == 1`` this is the smallest valid state
    (``z_i = k_i = 1``, one base-measure atom).  Otherwise the sorted data
    are split into that many groups, atoms start at the group means and
    precisions and ``k_i = z_i``.  The hyperparameter is drawn from its prior.
    """
    n = len(data)
    sticks = _model.make_sticks(spec, rng)
    schedule = _model.make_schedule(spec, sticks)
    if spec.init_clusters == 1 or n == 0:
        sticks.extend_to(1, rng)
        state = LatentState(np.ones(n, np.int64), np.ones(n, np.int64), sticks, schedule,
                            k_star=1)
        state.draw_atoms(0, 1, spec.base, rng)
        return state
    z, mu, tau = _model.initial_partition(data, spec.init_clusters)
    sticks.extend_to(mu.size, rng)
    return LatentState(z, z, sticks, schedule, mu=mu, tau=tau, k_star=mu.size)


# -- atoms -----------------------------------------------------------------

def update_atoms(data, state, spec, rng, js=None):
    """Semi-conjugate update of ``(mu_j, tau_j)`` for ``js`` (default ``1..k*``).

    ``mu_j | tau_j`` is normal with precision ``tau0 + n_j tau_j`` and
    ``tau_j | mu_j`` is ``Gamma(a + n_j/2, b + SS_j/2)``.  Empty components
    draw from the base measure, as do all components when ``data`` is None
    (prior-only runs).
    """
    bm = spec.base
    ks = state.k_star
    if js is None:
        js = np.arange(1, ks + 1)
    js = np.asarray(js, dtype=np.int64)
    z = state.z
    if data is None:
        z, data = z[:0], np.zeros(0)
    data = np.asarray(data, dtype=float)
    nj = np.bincount(z, minlength=ks + 1)[js].astype(float)
    sx = np.bincount(z, weights=data, minlength=ks + 1)[js]
    tau = state.tau[js - 1]
    prec = bm.tau0 + nj * tau
    mean = (bm.tau0 * bm.mu0 + tau * sx) / prec
    mu = mean + rng.standard_normal(js.size) / np.sqrt(prec)
    # sum of squares about the new means
    mu_full = np.zeros(ks + 1)
    mu_full[js] = mu
    dev = data - mu_full[z]
    ss = np.bincount(z, weights=dev * dev, minlength=ks + 1)[js]
    tau = _random.gamma(rng, bm.a + 0.5 * nj, 1.0 / (bm.b + 0.5 * ss))
    state._mu[js - 1] = mu
    state._tau[js - 1] = np.maximum(tau, _model.TAU_MIN)


def update_atom(j, data, state, spec, rng):
    update_atoms(data, state, spec, rng, js=[j])
    return Atom(float(state.mu[j - 1]), float(state.tau[j - 1]))


# -- sticks ----------------------------------------------------------------

def _length_params(state, upto):
    return state.sticks.family.params(np.arange(1, upto + 1))


def stick_posterior_case_a(state, counts):
    a, b = _length_params(state, state.k_star)
    return a + counts.n + counts.m, b + counts.h


def stick_posterior_case_b(state, counts):
    a, b = _length_params(state, state.k_star)
    return a + counts.n, b + counts.r


def update_sticks_case_a(state, counts, spec, rng):
    """``v_j ~ Beta(a_j + n_j + m_j, b_j + h_j)``, ``j = 1..k*`` (natural schedule)."""
    A, B = stick_posterior_case_a(state, counts)
    state.sticks.set_lengths(_random.beta(rng, A, B))


def update_sticks_case_b(state, counts, spec, rng):
    """``v_j ~ Beta(a_j + n_j, b_j + r_j)``, ``j = 1..k*`` (deterministic schedule)."""
    A, B = stick_posterior_case_b(state, counts)
    state.sticks.set_lengths(_random.beta(rng, A, B))


def gsb_posterior(state, spec):
    """Parameters of the shared-length conditional for the geometric family."""
    a, b = spec.gsb_prior
    if isinstance(state.schedule, NaturalSchedule):
        return a + 2 * state.n, b + float(np.sum(state.k - 1))
    return a + state.n, b + float(np.sum(state.z - 1))


def update_gsb_v(state, spec, rng):
    """Shared GSB length.

    With its own schedule ``xi_j = (1-v)^(j-1)`` the conditional is
    ``Beta(a + 2n, b + sum_i (k_i - 1))``; under a deterministic schedule it
    is ``Beta(a + n, b + sum_i (z_i - 1))``.
    """
    A, B = gsb_posterior(state, spec)
    v = float(np.clip(rng.beta(A, B), 1e-300, 1 - 1e-16))
    state.sticks.set_shared(v)
    return v


def concentration_posterior(state, spec):
    a, b = spec.alpha_prior
    ks = state.k_star
    v = np.minimum(state.sticks.lengths[:ks], _V_CLAMP)
    return a + ks, b - float(np.sum(np.log1p(-v)))


def update_concentration(state, spec, rng):
    """``alpha ~ Gamma(a + k*, b - sum_{j<=k*} log(1 - v_j))``.

    Lengths past ``k*`` were drawn under the old alpha, so they are
    dropped and later redrawn from the prior under the new one.
    """
    shape, rate = concentration_posterior(state, spec)
    alpha = max(rng.gamma(shape, 1.0 / rate), _TINY)
    state.sticks.family.alpha = alpha
    state.sticks.truncate(state.k_star)
    return alpha


# -- allocations -----------------------------------------------------------

def allocation_log_weights(data, state, idx=None):
    """Unnormalised ``log p(z_i = j | k_i, ...)`` as an ``(len(idx), k*)`` array.

    Entries with ``j > k_i`` are ``-inf``.
    """
    if idx is None:
        idx = slice(None)
    k = state.k[idx]
    upto = int(k.max())
    logits = np.repeat(_model.allocation_log_coef(state, upto)[None, :], k.size, axis=0)
    if data is not None:
        # data=None gives the prior allocation law given k
        x = np.asarray(data, dtype=float)[idx]
        mu, tau = state.atom_arrays(upto)
        logits += log_normal(x[:, None], mu[None, :], tau[None, :])
    logits[np.arange(upto)[None, :] >= k[:, None]] = -np.inf
    return logits


def sample_rows(logits, rng):
    """Draw one column index per row (1-based) with log-sum-exp normalisation."""
    top = logits.max(axis=1, keepdims=True)
    if not np.all(np.isfinite(top)):
        raise FloatingPointError("allocation row with no finite weight")
    p = np.exp(logits - top)
    cum = np.cumsum(p, axis=1)
    target = (1.0 - rng.random(p.shape[0])) * cum[:, -1]
    j = np.sum(cum < target[:, None], axis=1)
    return np.minimum(j, p.shape[1] - 1) + 1


def update_allocations(data, state, rng, idx=None):
    """Redraw ``z_i | k_i`` for ``idx`` (default: all observations)."""
    if idx is None:
        idx = np.arange(state.n)
    if len(idx) == 0:
        return state.z[idx]
    state.z[idx] = sample_rows(allocation_log_weights(data, state, idx), rng)
    return state.z[idx]


def update_allocation(i, data, state, spec, rng):
    return int(update_allocations(data, state, rng, idx=np.array([i]))[0])


# -- truncations -----------------------------------------------------------

def update_truncations_case_a(state, spec, rng, idx=None):
    """``k_i | z_i = j`` with pmf ``w_k / T_j``, ``k >= j``, ``T_j = sum_{l>=j} w_l``.

    Inverse CDF: with ``U`` uniform, ``k_i`` is the first ``k >= j`` with
    ``T_{k+1} <= (1 - U) T_j``.  Tails come from the log-products of the
    lengths, and the sticks (plus atoms) are extended from the prior as
    far as the search needs.
    """
    if idx is None:
        idx = np.arange(state.n)
    sticks = state.sticks
    z = state.z[idx]
    one_minus_u = np.maximum(rng.random(len(idx)), _TINY)
    log_thr = np.log(one_minus_u) + sticks.log_xi_array[z - 1]
    if len(idx):
        sticks.extend_until_log_tail_below(float(log_thr.min()), rng)
    k = np.searchsorted(-sticks.log_xi_array, -log_thr, side="left")
    k = np.maximum(k, z)
    state.k[idx] = k
    if len(idx):
        top = int(k.max())
        state.ensure_atoms(top, spec.base, rng)
        state.k_star = max(state.k_star, top)
    return k


def update_truncations_case_b(state, spec, rng, idx=None):
    """``k_i | z_i`` with pmf ``(xi_k - xi_{k+1}) / xi_{z_i}``, ``k >= z_i``.

    ``exp:<eta>`` uses ``k_i = floor(z_i - log(U) / eta)``; ``geom:<rho>``
    uses ``k_i = z_i + Geometric_0(1 - rho)``.
    """
    if idx is None:
        idx = np.arange(state.n)
    z = state.z[idx]
    schedule = state.schedule
    if isinstance(schedule, ExponentialSchedule):
        u = 1.0 - rng.random(len(idx))
        k = np.floor(z - np.log(u) / schedule.eta).astype(np.int64)
    elif isinstance(schedule, GeometricSchedule):
        k = z + rng.geometric(1.0 - schedule.rho, len(idx)) - 1
    else:
        thr = np.maximum(rng.random(len(idx)), _TINY) * schedule.xi(z)
        k = np.maximum(schedule.smallest_index_with_xi_below(thr), z)
    state.k[idx] = k
    return k


def update_truncations_gsb(state, spec, rng, idx=None):
    """Geometric family with its own schedule: ``k_i = z_i + Geometric_0(v)``."""
    if idx is None:
        idx = np.arange(state.n)
    k = state.z[idx] + rng.geometric(state.v, len(idx)) - 1
    state.k[idx] = k
    return k


def update_truncations(state, spec, rng, idx=None):
    if not isinstance(state.schedule, NaturalSchedule):
        return update_truncations_case_b(state, spec, rng, idx)
    if state.sticks.is_geometric:
        return update_truncations_gsb(state, spec, rng, idx)
    return update_truncations_case_a(state, spec, rng, idx)


def update_truncation_case_a(i, state, spec, rng):
    return int(update_truncations_case_a(state, spec, rng, np.array([i]))[0])


def update_truncation_case_b(i, state, spec, rng):
    return int(update_truncations_case_b(state, spec, rng, np.array([i]))[0])


def update_truncation_gsb(i, state, spec, rng):
    return int(update_truncations_gsb(state, spec, rng, np.array([i]))[0])


def bookkeeping_kstar(state, spec, rng):
    """Set ``k* = max_i k_i``, instantiating new components from the prior.

    Indices ``k*+1 .. max k_i`` get fresh base-measure atoms.  Their lengths
    are redrawn from the prior too unless the schedule is natural, where
    the truncation search has already consulted (and so conditioned on)
    the lengths it extended through.
    """
    k0 = int(state.k.max()) if state.n else state.k_star
    sticks = state.sticks
    if k0 > state.k_star:
        state.draw_atoms(state.k_star, k0, spec.base, rng)
        if isinstance(state.schedule, NaturalSchedule) or sticks.is_geometric:
            sticks.extend_to(k0, rng)
        else:
            sticks.redraw(state.k_star, k0, rng)
    state.k_star = k0
    return k0


def update_hyper_and_sticks(state, spec, rng):
    """Lengths (or the shared GSB length), then the DP concentration."""
    if state.sticks.is_geometric:
        update_gsb_v(state, spec, rng)
        return
    counts = recompute_counts(state)
    if isinstance(state.schedule, NaturalSchedule):
        update_sticks_case_a(state, counts, spec, rng)
    else:
        update_sticks_case_b(state, counts, spec, rng)
    if isinstance(state.sticks.family, DirichletSticks) and not spec.freeze_concentration:
        update_concentration(state, spec, rng)


def sweep(state, data, spec, rng):
    """One full Gibbs cycle."""
    update_atoms(data, state, spec, rng)
    update_hyper_and_sticks(state, spec, rng)
    if state.n:
        update_allocations(data, state, rng)
        update_truncations(state, spec, rng)
    bookkeeping_kstar(state, spec, rng)


def redraw_data(state, rng):
    """``x_i ~ N(mu_{z_i}, 1/tau_{z_i})`` (used by the joint-distribution test)."""
    mu, tau = state.mu[state.z - 1], state.tau[state.z - 1]
    return mu + rng.standard_normal(state.n) / np.sqrt(tau)


def log_kernel_z(data, state, i):
    return allocation_log_weights(data, state, np.array([i]))[0]


def log_kernel_k(state, i, kvals):
    """``log(xi_k - xi_{k+1})`` for ``k >= z_i`` (``-inf`` below)."""
    kvals = np.asarray(kvals)
    out = np.asarray(state.schedule.log_xi_gap(np.maximum(kvals, 1)), dtype=float)
    return np.where(kvals >= state.z[i], out, -math.inf)
