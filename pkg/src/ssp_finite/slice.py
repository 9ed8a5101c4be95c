"""Generalised slice sampler with a deterministic schedule (comparison baseline).

Each observation carries ``u_i ~ Unif(0, xi_{z_i})``; given ``u_i`` the
allocation ranges over the finite set ``{j : xi_j > u_i}`` with weights
``w_j / xi_j * N(x_i | theta_j)``.  For ``xi_j = exp(-eta j)`` the number
of admissible components is ``floor(z_i - log(U) / eta)`` with ``U`` the
uniform behind ``u_i``, i.e. exactly the closed-form truncation of the
finite sampler.
"""

import numpy as np

from . import gibbs
from .model import (LatentState, allocation_log_coef, log_joint, log_normal,
                    initial_partition, make_schedule, make_sticks)


class SliceState(LatentState):
    """Latent state plus slice variables ``u``.

    ``k[i]`` holds the largest admissible index for ``u[i]``, so that the
    support constraint reads ``z_i <= k_i`` as in the finite sampler.
    """

    def __init__(self, z, u, sticks, schedule, mu=(), tau=()):
        u = np.asarray(u, dtype=float)
        k = admissible_count(schedule, u) if u.size else np.zeros(0, np.int64)
        super().__init__(z, k, sticks, schedule, mu, tau)
        self.u = u.copy()

    def copy(self):
        out = super().copy()
        out.u = self.u.copy()
        return out


def _open_uniform(rng, size):
    # strictly inside (0, 1) so that u_i < xi_{z_i}
    return np.maximum(rng.random(size), np.finfo(float).tiny)


def admissible_count(schedule, u):
    """Largest ``j`` with ``xi_j > u`` (elementwise)."""
    return schedule.smallest_index_with_xi_below(u)


def init_slice_state(data, spec, rng):
    """Same starting partition as :func:`~ssp_finite.gibbs.init_state`, plus slices."""
    if spec.natural:
        raise ValueError("the slice sampler needs a deterministic schedule")
    n = len(data)
    sticks = make_sticks(spec, rng)
    schedule = make_schedule(spec, sticks)
    if spec.init_clusters == 1 or n == 0:
        z, mu, tau = np.ones(n, np.int64), (), ()
    else:
        z, mu, tau = initial_partition(data, spec.init_clusters)
    u = _open_uniform(rng, n) * schedule.xi(z)
    state = SliceState(z, u, sticks, schedule, mu=mu, tau=tau)
    state.k_star = max(int(state.k.max()) if n else 1, 1, len(mu))
    state.ensure_atoms(state.k_star, spec.base, rng)
    sticks.extend_to(state.k_star, rng)
    return state


def slice_update_us(state, rng, idx=None):
    """``u_i ~ Unif(0, xi_{z_i})`` and the induced admissible counts."""
    if idx is None:
        idx = np.arange(state.n)
    state.u[idx] = _open_uniform(rng, len(idx)) * state.schedule.xi(state.z[idx])
    state.k[idx] = admissible_count(state.schedule, state.u[idx])
    return state.u[idx]


def slice_update_u(i, state, rng):
    return float(slice_update_us(state, rng, np.array([i]))[0])


def slice_log_weights(data, state, idx=None):
    """``log(1(u_i < xi_j) w_j / xi_j N(x_i | theta_j))`` over ``j = 1..k*``."""
    if idx is None:
        idx = np.arange(state.n)
    upto = state.k_star
    log_xi = state.schedule.log_xi(np.arange(1, upto + 1))
    logits = np.repeat(allocation_log_coef(state, upto)[None, :], len(idx), axis=0)
    if data is not None:
        x = np.asarray(data, dtype=float)[idx]
        mu, tau = state.atom_arrays(upto)
        logits += log_normal(x[:, None], mu[None, :], tau[None, :])
    logits[log_xi[None, :] <= np.log(state.u[idx])[:, None]] = -np.inf
    return logits


def slice_update_zs(data, state, rng, idx=None):
    if idx is None:
        idx = np.arange(state.n)
    state.z[idx] = gibbs.sample_rows(slice_log_weights(data, state, idx), rng)
    return state.z[idx]


def slice_update_z(i, data, state, rng):
    return int(slice_update_zs(data, state, rng, np.array([i]))[0])


def slice_sweep(state, data, spec, rng):
    """Atoms, lengths (deterministic-schedule conditionals), concentration,
    slice variables, component bookkeeping, allocations."""
    gibbs.update_atoms(data, state, spec, rng)
    gibbs.update_hyper_and_sticks(state, spec, rng)
    if state.n:
        slice_update_us(state, rng)
    gibbs.bookkeeping_kstar(state, spec, rng)
    if state.n:
        slice_update_zs(data, state, rng)


def slice_log_joint(state, data, spec):
    """Log joint of the slice augmentation.

    Differs from :func:`~ssp_finite.model.log_joint` by replacing the
    truncation factor ``xi_{k_i} - xi_{k_i+1}`` with the slice indicator,
    so it is ``log_joint`` minus ``sum_i log(xi_{k_i} - xi_{k_i+1})`` on the
    support ``u_i < xi_{z_i}``.
    """
    if np.any(state.u >= state.schedule.xi(state.z)):
        return -np.inf
    lj = log_joint(state, data, spec)
    return lj - float(np.sum(state.schedule.log_xi_gap(state.k)))
