"""Numerical certificates for the finite representation and the samplers.

Every check returns a :class:`CheckResult`; :func:`run_validation` runs the
whole battery with pinned seeds and collects one entry per check in a
:class:`ValidationReport` that serialises to JSON.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import gibbs
from .model import LatentState, ModelSpec, make_schedule, make_sticks
from .priors import (BaseMeasure, BetaSticks, DirichletSticks, GeometricSticks,
                     StickState, sample_truncation, truncation_log_pmf, truncation_pmf)
from .schedules import ExponentialSchedule, GeometricSchedule, NaturalSchedule


@dataclass
class CheckResult:
    name: str
    statistic: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)
    elapsed_s: float = 0.0

    def line(self):
        return "%-28s %s  statistic=%.3g tolerance=%.3g" % (
            self.name, "PASS" if self.passed else "FAIL", self.statistic, self.tolerance)


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)
    seed: int | None = None

    def add(self, result):
        if any(c.name == result.name for c in self.checks):
            raise ValueError("duplicate check %r" % result.name)
        self.checks.append(result)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {"seed": self.seed, "passed": self.passed,
                "checks": [_jsonable(asdict(c)) for c in self.checks]}

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    def summary(self):
        return "\n".join(c.line() for c in self.checks)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _combine(name, results, tolerance=None, smaller_is_worse=False):
    """Fold per-case results into one entry (worst statistic, all must pass)."""
    pick = min if smaller_is_worse else max
    worst = pick(results, key=lambda r: (r.passed == smaller_is_worse, r.statistic))
    return CheckResult(
        name=name,
        statistic=worst.statistic,
        tolerance=worst.tolerance if tolerance is None else tolerance,
        passed=all(r.passed for r in results),
        details={"cases": len(results), "failed": sum(not r.passed for r in results),
                 "worst": worst.details},
        elapsed_s=sum(r.elapsed_s for r in results))


# -- representation identities ---------------------------------------------

def _xi_prefix(sticks, schedule, kmax):
    """``xi_1 .. xi_{kmax+1}`` in plain arithmetic."""
    if isinstance(schedule, NaturalSchedule):
        return np.concatenate(([1.0], np.cumprod(1.0 - sticks.lengths[:kmax])))
    return schedule.xi(np.arange(1, kmax + 2))


def check_pmf_normalization(sticks, schedule, kmax, tol=1e-10):
    """``sum_{k<=K} P(K=k) + P(K > K_max) = 1``.

    The remainder is computed independently of the pmf from the exact
    identity ``P(K > K_max) = xi_{K_max+1} s_{K_max} + prod_{l<=K_max}(1 - v_l)``.
    """
    t0 = time.perf_counter()
    sticks.extend_to(kmax)
    pmf = truncation_pmf(sticks, schedule, np.arange(1, kmax + 1))
    v = sticks.lengths[:kmax]
    w = v * np.concatenate(([1.0], np.cumprod(1.0 - v)[:-1]))
    xi = _xi_prefix(sticks, schedule, kmax)
    s = math.fsum(w / xi[:kmax])
    tail = float(np.prod(1.0 - v))
    remainder = xi[kmax] * s + tail
    err = abs(math.fsum(pmf) + remainder - 1.0)
    return CheckResult("pmf_normalization", err, tol, err <= tol,
                       {"schedule": repr(schedule), "k_max": kmax, "remainder": remainder},
                       time.perf_counter() - t0)


def check_marginalization_bridge(sticks, schedule, kmax, jmax=None, tol=1e-12):
    """``sum_{k=j}^{K_max} P(K = k) w~_j(k) -> w_j`` with telescoping remainder.

    For each ``j <= jmax`` the partial sum must be within
    ``xi_{K_max+1} w_j / xi_j + tol`` of ``w_j``.  Two routes are checked:
    the schedule gaps times ``w_j / xi_j`` and the product of the
    truncation pmf with the finite-representation weights.
    """
    t0 = time.perf_counter()
    jmax = kmax if jmax is None else min(jmax, kmax)
    sticks.extend_to(kmax)
    ks = np.arange(1, kmax + 1)
    gaps = np.asarray(schedule.xi_gap(ks), dtype=float)
    xi = _xi_prefix(sticks, schedule, kmax)
    w = sticks.weights[:kmax]
    coef = w / xi[:kmax]
    # route 1: reverse cumulative sums of the gaps
    gap_tail = np.cumsum(gaps[::-1])[::-1]
    via_gaps = gap_tail[:jmax] * coef[:jmax]
    # route 2: pmf(k) * w~_j(k) = pmf(k) coef_j / s_k, summed over k >= j
    pmf = truncation_pmf(sticks, schedule, ks)
    s = np.cumsum(coef)
    via_pmf = np.cumsum((pmf / s)[::-1])[::-1][:jmax] * coef[:jmax]
    bound = xi[kmax] * coef[:jmax] + tol
    excess = np.maximum(np.abs(via_gaps - w[:jmax]), np.abs(via_pmf - w[:jmax])) - bound
    stat = float(excess.max())
    return CheckResult("marginalization_bridge", max(stat, 0.0), tol, stat <= 0.0,
                       {"schedule": repr(schedule), "k_max": kmax, "j_max": jmax,
                        "max_abs_error": float(np.max(np.abs(via_pmf - w[:jmax])))},
                       time.perf_counter() - t0)


def gsb_expected_truncation(v):
    return (2.0 - v) / v


def check_gsb_pmf_closed_form(v, kmax=None, tol=1e-10):
    """Closed form ``k v^2 (1-v)^(k-1)`` for geometric sticks and their own schedule.

    Checks exact equality of :func:`truncation_pmf`, agreement of the
    generic log-space formula to ``1e-12`` relative, and the brute-force
    mean against ``(2 - v) / v``.
    """
    t0 = time.perf_counter()
    if kmax is None:
        # k^2 (1-v)^k below 1e-20
        kmax = int(math.ceil((math.log(1e-20) - 2 * math.log(2000 / v)) / math.log1p(-v)))
    sticks = StickState(GeometricSticks(v))
    schedule = NaturalSchedule(sticks)
    ks = np.arange(1, kmax + 1)
    pmf = truncation_pmf(sticks, schedule, ks)
    closed = ks * v * v * (1 - v) ** (ks - 1)
    exact = bool(np.all(pmf == closed))
    generic = np.exp(truncation_log_pmf(sticks, _SameSchedule(schedule), ks))
    head = closed > 1e-300
    rel = float(np.max(np.abs(generic[head] - closed[head]) / closed[head]))
    mean = math.fsum(ks * pmf)
    err = abs(mean - gsb_expected_truncation(v))
    ok = exact and rel <= 1e-12 and err <= tol
    return CheckResult("gsb_pmf_closed_form", err, tol, ok,
                       {"v": v, "k_max": kmax, "exact_match": exact,
                        "generic_rel_error": rel, "mean": mean,
                        "expected": gsb_expected_truncation(v)},
                       time.perf_counter() - t0)


class _SameSchedule:
    """Wrapper that hides the natural-schedule shortcut so the generic path runs."""

    def __init__(self, inner):
        self.inner = inner

    def log_xi(self, j):
        return self.inner.log_xi(j)

    def log_xi_gap(self, k):
        return self.inner.log_xi_gap(k)


# -- truncation equivalence -------------------------------------------------

def _binned_chisquare(observed_k, pmf, start, min_expected=5.0):
    """Chi-square of integer draws ``>= start`` against ``pmf(start + i)``.

    Cells with small expectation at the right end are merged into one tail
    cell carrying the remaining probability.
    """
    n = observed_k.size
    m = 0
    cum = 0.0
    while m < pmf.size and n * pmf[m] >= min_expected:
        cum += pmf[m]
        m += 1
    counts = np.bincount(observed_k - start, minlength=m + 1)
    obs = np.concatenate((counts[:m], [counts[m:].sum()]))
    exp = n * np.concatenate((pmf[:m], [max(1.0 - cum, 0.0)]))
    if exp[-1] < min_expected:
        obs = np.concatenate((obs[:-2], [obs[-2:].sum()]))
        exp = np.concatenate((exp[:-2], [exp[-2:].sum()]))
    exp *= n / exp.sum()
    chi2, p = stats.chisquare(obs, exp)
    return float(chi2), float(p), obs.size


def check_slice_truncation_equivalence(eta, z, draws=10**6, rng=None, p_min=1e-3):
    """Slice-induced truncation versus the closed-form truncation pmf.

    Draw ``u = U xi_z`` with ``xi_j = exp(-eta j)``, let ``k`` be the number
    of indices with ``xi_j > u``, and compare the frequencies with
    ``(xi_k - xi_{k+1}) / xi_z`` for ``k >= z``.  Also records how often ``k``
    equals ``floor(z - log(U) / eta)``; this should be always.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(rng)
    schedule = ExponentialSchedule(eta)
    uni = np.maximum(rng.random(draws), np.finfo(float).tiny)
    u = uni * schedule.xi(z)
    k = np.asarray(schedule.smallest_index_with_xi_below(u), dtype=np.int64)
    closed = np.floor(z - np.log(uni) / eta).astype(np.int64)
    agree = float(np.mean(k == closed))
    span = int(k.max()) - z + 2
    ks = np.arange(z, z + span)
    pmf = np.exp(schedule.log_xi_gap(ks) - schedule.log_xi(z))
    chi2, p, cells = _binned_chisquare(k, pmf, z)
    ok = p > p_min and bool(np.all(k >= z))
    return CheckResult("slice_truncation_equivalence", p, p_min, ok,
                       {"eta": eta, "z": z, "draws": draws, "chi2": chi2, "cells": cells,
                        "floor_formula_agreement": agree},
                       time.perf_counter() - t0)


# -- prior partition --------------------------------------------------------

def crp_expected_clusters(alpha, n):
    """``E[c_n] = sum_{i=1}^n alpha / (alpha + i - 1)`` under a Dirichlet process."""
    if alpha == 0:
        return 1.0
    i = np.arange(1, n + 1)
    return float(np.sum(alpha / (alpha + i - 1)))


def simulate_prior_clusters(alpha, n, chains, rng, schedule="natural"):
    """Occupied-cluster counts from the hierarchical prior.

    Each simulation draws DP(alpha) sticks, truncations ``k_i`` from the
    finite-representation pmf and allocations ``z_i | k_i`` from the
    reweighted atoms ``w_j / (xi_j s_{k_i})``.
    """
    out = np.empty(chains, dtype=np.int64)
    spec = ModelSpec(family="dp", schedule=schedule, alpha_init=alpha, freeze_concentration=True)
    for c in range(chains):
        state, _ = draw_prior_state(spec, n, rng, data=False)
        out[c] = np.unique(state.z).size
    return out


def check_prior_crp_moments(alpha, n, chains=20000, rng=None, n_se=3.0, schedule="natural"):
    t0 = time.perf_counter()
    rng = np.random.default_rng(rng)
    c = simulate_prior_clusters(alpha, n, chains, rng, schedule)
    se = c.std(ddof=1) / math.sqrt(chains)
    target = crp_expected_clusters(alpha, n)
    z = abs(c.mean() - target) / se if se > 0 else (0.0 if c.mean() == target else math.inf)
    return CheckResult("prior_crp_moments", z, n_se, z <= n_se,
                       {"alpha": alpha, "n": n, "chains": chains, "mean_c_n": float(c.mean()),
                        "expected": target, "se": se, "schedule": schedule},
                       time.perf_counter() - t0)


# -- joint-distribution (Geweke) test ---------------------------------------

GEWEKE_BASE = BaseMeasure(mu0=0.0, tau0=1.0, a=3.0, b=3.0)


def geweke_spec(family="dp", schedule="natural"):
    """Proper, moderate priors so that test statistics have finite moments."""
    return ModelSpec(family=family, schedule=schedule, base=GEWEKE_BASE,
                     alpha_prior=(2.0, 2.0), gsb_prior=(2.0, 2.0), init_clusters=1)


def draw_prior_state(spec, n, rng, data=True):
    """Exact draw of ``(hyper, v, k, z, theta, x)`` from the hierarchical prior.

    Returns ``(state, x)``; ``x`` is ``None`` with ``data=False`` (atoms
    are then skipped too).
    """
    sticks = make_sticks(spec, rng)
    schedule = make_schedule(spec, sticks)
    k = sample_truncation(sticks, schedule, rng, size=n)
    state = LatentState(np.ones(n, np.int64), k, sticks, schedule)
    sticks.extend_to(state.k_star, rng)
    state.z[:] = gibbs.sample_rows(gibbs.allocation_log_weights(None, state), rng)
    if not data:
        return state, None
    state.draw_atoms(0, state.k_star, spec.base, rng)
    return state, gibbs.redraw_data(state, rng)


def geweke_statistics(state, x):
    ks = state.k_star
    v = state.sticks.lengths[:ks]
    return np.array([np.unique(state.z).size, ks, v[0], v.sum(), state.hyper,
                     x.mean(), np.mean(x * x), state.mu[state.z[0] - 1]])


GEWEKE_NAMES = ("c_n", "k_star", "v_1", "sum_v", "hyper", "mean_x", "mean_x2", "mu_z1")


def _batch_means_se(series, batches=None):
    """Standard error of the mean of a correlated series by batch means."""
    n = series.shape[0]
    batches = batches or max(10, int(math.sqrt(n)))
    size = n // batches
    trimmed = series[n - batches * size:]
    means = trimmed.reshape(batches, size, -1).mean(axis=1)
    se = means.std(axis=0, ddof=1) / math.sqrt(batches)
    return float(se[0]) if series.ndim == 1 else se


def run_geweke(spec, n=5, iters=200_000, rng=None, prior_draws=None, n_se=4.0):
    """Compare the prior (marginal-conditional) with the Gibbs chain run on
    regenerated data (successive-conditional).

    The chain alternates one :func:`~ssp_finite.gibbs.sweep` with a fresh
    ``x | z, theta``; if every conditional is right its stationary law is
    the prior.  Statistics are the occupied clusters, ``k*``, the first
    and summed lengths, the hyperparameter and moments of ``x``.  The
    prior side uses iid standard errors, the chain side batch means.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(rng)
    # iid draws: a quarter of the chain length already gives the smaller error
    prior_draws = max(iters // 4, 2) if prior_draws is None else prior_draws
    marg = np.array([geweke_statistics(*draw_prior_state(spec, n, rng))
                     for _ in range(prior_draws)])
    state, x = draw_prior_state(spec, n, rng)
    chain = np.empty((iters, marg.shape[1]))
    for t in range(iters):
        gibbs.sweep(state, x, spec, rng)
        x = gibbs.redraw_data(state, rng)
        chain[t] = geweke_statistics(state, x)
    se = np.sqrt(marg.var(axis=0, ddof=1) / prior_draws + _batch_means_se(chain) ** 2)
    zs = (marg.mean(axis=0) - chain.mean(axis=0)) / se
    # constant statistics (e.g. a fixed hyperparameter) give nan
    keep = np.isfinite(zs)
    names = [nm for nm, ok in zip(GEWEKE_NAMES, keep) if ok]
    zs = zs[keep]
    worst = float(np.max(np.abs(zs)))
    return CheckResult("geweke", worst, n_se, worst <= n_se,
                       {"family": spec.family, "schedule": spec.schedule, "n": n,
                        "iters": iters, "prior_draws": prior_draws,
                        "z": dict(zip(names, zs.tolist())),
                        "prior_mean": dict(zip(GEWEKE_NAMES, marg.mean(axis=0).tolist())),
                        "chain_mean": dict(zip(GEWEKE_NAMES, chain.mean(axis=0).tolist()))},
                       time.perf_counter() - t0)


# -- battery ----------------------------------------------------------------

def random_stick_state(rng):
    """Sticks from a randomly chosen DP, Pitman-Yor or geometric prior."""
    kind = rng.integers(3)
    if kind == 0:
        fam = DirichletSticks(float(rng.uniform(0.3, 5.0)))
    elif kind == 1:
        sigma = float(rng.uniform(0.0, 0.5))
        fam = BetaSticks.pitman_yor(sigma, float(rng.uniform(0.5, 3.0)))
    else:
        fam = GeometricSticks(float(rng.uniform(0.1, 0.9)))
    return StickState(fam, rng=rng)


def random_schedules(sticks, rng):
    return [NaturalSchedule(sticks),
            ExponentialSchedule(float(rng.uniform(0.2, 2.0))),
            GeometricSchedule(float(rng.uniform(0.2, 0.9)))]


def identity_cases(realizations=100, kmax=100, rng=None):
    """``(sticks, schedule)`` pairs: each stick draw under all three schedule families."""
    rng = np.random.default_rng(rng)
    for _ in range(realizations):
        sticks = random_stick_state(rng)
        sticks.extend_to(kmax)
        for schedule in random_schedules(sticks, rng):
            yield sticks, schedule


GEWEKE_CONFIGS = (("dp", "natural"), ("dp", "exp:1"), ("gsb", "natural"))
SLICE_TRUNCATION_CASES = ((1.0, 1), (0.2, 3), (1.0, 10))
GSB_VALUES = (0.1, 0.3, 0.5, 0.9)


def run_validation(seed=2024, geweke_iters=200_000, slice_draws=10**6,
                   crp_chains=20_000, realizations=100, geweke=True, progress=None):
    """All checks with seeds derived from ``seed``; one report entry per check."""
    seeds = np.random.SeedSequence(seed).spawn(8)
    report = ValidationReport(seed=seed)

    def emit(result):
        report.add(result)
        if progress:
            progress(result.line())

    cases = list(identity_cases(realizations, rng=np.random.default_rng(seeds[0])))
    emit(_combine("pmf_normalization", [check_pmf_normalization(s, sch, 100) for s, sch in cases]))
    emit(_combine("marginalization_bridge",
                  [check_marginalization_bridge(s, sch, 100, jmax=30) for s, sch in cases]))
    emit(_combine("gsb_pmf_closed_form", [check_gsb_pmf_closed_form(v) for v in GSB_VALUES]))
    slice_rng = np.random.default_rng(seeds[1])
    emit(_combine("slice_truncation_equivalence",
                  [check_slice_truncation_equivalence(eta, z, slice_draws, slice_rng) for eta, z in SLICE_TRUNCATION_CASES],
                  smaller_is_worse=True))
    emit(check_prior_crp_moments(1.0, 82, crp_chains, np.random.default_rng(seeds[2])))
    if geweke:
        res = [run_geweke(geweke_spec(fam, sch), 5, geweke_iters, np.random.default_rng(s))
               for (fam, sch), s in zip(GEWEKE_CONFIGS, seeds[3:])]
        combined = _combine("geweke", res)
        combined.details["configs"] = [r.details for r in res]
        emit(combined)
    return report
