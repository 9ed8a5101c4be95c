"""Run configuration, chain driver, fit artifacts and the timing harness."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import gibbs, slice as slice_mod
from .datasets import resolve_data, simulate_mixture
from .diagnostics import (DensityAccumulator, TraceRecord, TraceWriter, default_grid,
                          density_draw, ergodic_mean, occupied_clusters)
from .model import ModelSpec
from .priors import BaseMeasure, BetaSticks

log = logging.getLogger(__name__)

MODELS = {
    "dp-finite": ("dp", "finite"),
    "gsb-finite": ("gsb", "finite"),
    "betaseq-finite": ("betaseq", "finite"),
    "dp-slice": ("dp", "slice"),
    "gsb-slice": ("gsb", "slice"),
}


@dataclass
class RunConfig:
    """Everything a fit needs.  Defaults follow the weakly informative setup
    ``(mu0, tau0, a, b) = (0, 0.001, 0.001, 0.001)``, ``alpha ~ Gamma(0.1, 0.1)``,
    ``v ~ Beta(1, 1)``, 100000 iterations with 20000 burn-in."""

    model: str = "dp-finite"
    schedule: str | None = None
    iters: int = 100_000
    burnin: int = 20_000
    seed: int = 1
    chains: int = 1
    data: str = "galaxy"
    grid: int = 500
    out: str = "runs/default"
    mu0: float = 0.0
    tau0: float = 0.001
    a: float = 0.001
    b: float = 0.001
    a_alpha: float = 0.1
    b_alpha: float = 0.1
    a_v: float = 1.0
    b_v: float = 1.0
    py_discount: float = 0.0
    py_strength: float = 1.0
    alpha_init: float | None = None
    freeze_concentration: bool = False
    timing: bool = True
    exact_quantiles: bool = False

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError("model must be one of %s" % ", ".join(MODELS))
        if self.schedule is None:
            self.schedule = "exp:1" if self.sampler == "slice" else "natural"
        if self.iters < 1 or not 0 <= self.burnin < self.iters:
            raise ValueError("need iters >= 1 and 0 <= burnin < iters")
        if self.grid < 2:
            raise ValueError("grid needs at least 2 points")
        if self.chains < 1:
            raise ValueError("chains must be >= 1")
        if self.sampler == "slice" and self.schedule.strip() == "natural":
            raise ValueError("slice models need a deterministic schedule")
        self.model_spec()  # validates hyperparameters and schedule syntax

    @property
    def family(self):
        return MODELS[self.model][0]

    @property
    def sampler(self):
        return MODELS[self.model][1]

    def model_spec(self):
        return ModelSpec(
            family=self.family,
            schedule=self.schedule,
            base=BaseMeasure(self.mu0, self.tau0, self.a, self.b),
            alpha_prior=(self.a_alpha, self.b_alpha),
            gsb_prior=(self.a_v, self.b_v),
            betaseq=BetaSticks.pitman_yor(self.py_discount, self.py_strength),
            freeze_concentration=self.freeze_concentration,
            alpha_init=self.alpha_init,
        )

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)


def _coerce(fld, text):
    kind = fld.type if isinstance(fld.type, str) else getattr(fld.type, "__name__", "")
    text = text.strip()
    if "None" in kind and text.lower() in ("", "none", "null"):
        return None
    if kind.startswith("bool"):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError("not a boolean: %r" % text)
    if kind.startswith("int"):
        return int(float(text)) if "e" in text.lower() else int(text)
    if kind.startswith("float"):
        return float(text)
    return text


def parse_config_text(text, name="<config>"):
    """Flat ``key = value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    known = {f.name: f for f in dataclasses.fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in known:
            raise ValueError("%s:%d: expected 'key = value' with a known key, got %r"
                             % (name, lineno, raw))
        values[key] = _coerce(known[key], value)
    return values


def load_config(path, **overrides):
    with open(path) as fh:
        values = parse_config_text(fh.read(), str(path))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


# -- chain driver ------------------------------------------------------------

@dataclass
class ChainResult:
    c_n: np.ndarray
    k_star: np.ndarray
    hyper: np.ndarray
    sampler_s: float = 0.0
    density_s: float = 0.0
    state: object = None
    extra: dict = field(default_factory=dict)


def initial_state(data, spec, sampler, rng):
    if sampler == "slice":
        return slice_mod.init_slice_state(data, spec, rng)
    return gibbs.init_state(data, spec, rng)


def run_chain(data, spec, iters, rng, sampler="finite", burnin=0, grid=None,
              accumulator=None, trace=None, timing=True, callback=None):
    """Run one chain for ``iters`` sweeps.

    Density draws on ``grid`` go to ``accumulator`` after ``burnin``
    sweeps; ``trace`` (a :class:`TraceWriter`) receives one record per
    sweep.  ``callback(it, state)`` is called after every sweep.
    """
    data = np.asarray(data, dtype=float)
    step = slice_mod.slice_sweep if sampler == "slice" else gibbs.sweep
    state = initial_state(data, spec, sampler, rng)
    c_n = np.empty(iters, np.int64)
    k_star = np.empty(iters, np.int64)
    hyper = np.empty(iters)
    sampler_s = density_s = 0.0
    clock = time.perf_counter
    start = clock()
    for it in range(iters):
        t0 = clock()
        step(state, data, spec, rng)
        t1 = clock()
        sampler_s += t1 - t0
        c_n[it] = occupied_clusters(state.z)
        k_star[it] = state.k_star
        hyper[it] = state.hyper
        if accumulator is not None and it >= burnin:
            accumulator.add(density_draw(state, grid))
            density_s += clock() - t1
        if trace is not None:
            elapsed = clock() - start if timing else 0.0
            trace.write(TraceRecord(it + 1, int(c_n[it]), int(k_star[it]),
                                    float(hyper[it]), elapsed))
        if callback is not None:
            callback(it, state)
    return ChainResult(c_n, k_star, hyper, sampler_s, density_s, state)


def _summary_stats(x):
    x = np.asarray(x, dtype=float)
    if x.size == 0 or np.all(np.isnan(x)):
        return None
    q = np.quantile(x, [0.025, 0.5, 0.975])
    return {"mean": float(x.mean()), "sd": float(x.std()),
            "q025": float(q[0]), "q50": float(q[1]), "q975": float(q[2])}


def run_fit(config):
    """Fit ``config`` and write ``density.csv``, trace file(s) and ``summary.json``.

    Returns the summary dictionary (also written to disk) with the chain
    results under the non-serialised key ``"_chains"``.
    """
    dataset = resolve_data(config.data)
    data = dataset.values
    spec = config.model_spec()
    grid = default_grid(data, config.grid)
    os.makedirs(config.out, exist_ok=True)
    seeds = np.random.SeedSequence(config.seed).spawn(config.chains)
    pooled = DensityAccumulator(grid, exact=config.exact_quantiles)
    chains, trace_files = [], []
    t_start = time.perf_counter()
    for c, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        name = "trace.csv" if config.chains == 1 else "trace_chain%d.csv" % c
        path = os.path.join(config.out, name)
        acc = DensityAccumulator(grid, exact=config.exact_quantiles)
        try:
            with TraceWriter(path) as tw:
                res = run_chain(data, spec, config.iters, rng, sampler=config.sampler,
                                burnin=config.burnin, grid=grid, accumulator=acc, trace=tw,
                                timing=config.timing)
        except OSError as exc:
            raise OSError("cannot write trace file %s: %s" % (path, exc)) from exc
        pooled.merge(acc)
        chains.append(res)
        trace_files.append(name)
        log.info("chain %d done: mean c_n %.3f", c, res.c_n[config.burnin:].mean())
    elapsed = time.perf_counter() - t_start
    density_path = os.path.join(config.out, "density.csv")
    pooled.write_csv(density_path)
    post = slice(config.burnin, None)
    summary = {
        "model": config.model,
        "schedule": config.schedule,
        "data": dataset.name,
        "n": int(data.size),
        "iters": config.iters,
        "burnin": config.burnin,
        "seed": config.seed,
        "chains": config.chains,
        "c_n": _summary_stats(np.concatenate([r.c_n[post] for r in chains])),
        "k_star": _summary_stats(np.concatenate([r.k_star[post] for r in chains])),
        "conc_or_v": _summary_stats(np.concatenate([r.hyper[post] for r in chains])),
        "c_n_ergodic_final": [float(ergodic_mean(r.c_n[post])[-1]) for r in chains],
        "elapsed_s": elapsed if config.timing else 0.0,
        "sampler_s": sum(r.sampler_s for r in chains) if config.timing else 0.0,
        "density_s": sum(r.density_s for r in chains) if config.timing else 0.0,
        "grid": {"size": int(grid.size), "min": float(grid[0]), "max": float(grid[-1])},
        "density_file": "density.csv",
        "trace_files": trace_files,
        "config": config.to_dict(),
    }
    with open(os.path.join(config.out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    summary["_chains"] = chains
    summary["_density"] = pooled
    return summary


# -- timing harness ------------------------------------------------------------

BENCH_ROWS = (
    ("natural", "finite", "natural"),
    ("eta=0.2", "finite", "exp:0.2"),
    ("eta=1.0", "finite", "exp:1.0"),
    ("eta=1.0 (slice)", "slice", "exp:1.0"),
)
BENCH_NOTE = ("Wall-clock seconds on this machine; not comparable with published "
              "timings obtained on different hardware and software.")


def run_bench(iters=100_000, ns=(250, 1000), families=("dp", "gsb"), rows=BENCH_ROWS,
              grid=500, seed=1, burnin=None, out=None, base=None):
    """Time every (schedule row, family, n) cell over ``iters`` sweeps.

    Sampler time and density-evaluation time (on a ``grid``-point grid,
    after ``burnin``) are reported separately.  Returns a dict with the
    cells, a formatted table and any soft-check warnings; if ``out`` is
    given, ``bench.json`` and ``bench.txt`` are written there.
    """
    if burnin is None:
        burnin = iters // 5
    base = base or BaseMeasure()
    cells = []
    for n in ns:
        data = simulate_mixture(n, seed).values
        g = default_grid(data, grid)
        for fam in families:
            for label, sampler, schedule in rows:
                model = "%s-%s" % (fam, sampler)
                spec = ModelSpec(family=fam, schedule=schedule, base=base)
                rng = np.random.default_rng(seed)
                acc = DensityAccumulator(g, max_stored=200)
                t0 = time.perf_counter()
                res = run_chain(data, spec, iters, rng, sampler=sampler, burnin=burnin,
                                grid=g, accumulator=acc)
                total = time.perf_counter() - t0
                cells.append({"row": label, "family": fam, "model": model,
                              "schedule": schedule, "n": n, "iters": iters, "grid": grid,
                              "total_s": total, "sampler_s": res.sampler_s,
                              "density_s": res.density_s,
                              "mean_c_n": float(res.c_n[burnin:].mean())})
    report = {"note": BENCH_NOTE, "iters": iters, "grid": grid, "cells": cells,
              "table": format_bench_table(cells, rows, families, ns)}
    report["warnings"] = bench_soft_checks(cells)
    for msg in report["warnings"]:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    if out is not None:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "bench.json"), "w") as fh:
            json.dump(report, fh, indent=2)
        with open(os.path.join(out, "bench.txt"), "w") as fh:
            fh.write(report["table"] + "\n")
    return report


def _cell(cells, row, fam, n):
    for c in cells:
        if c["row"] == row and c["family"] == fam and c["n"] == n:
            return c
    return None


def format_bench_table(cells, rows=BENCH_ROWS, families=("dp", "gsb"), ns=(250, 1000)):
    cols = [(fam, n) for fam in families for n in ns]
    head = "%-16s" % "xi_j" + "".join("%14s" % ("%s n=%d" % (f.upper(), n)) for f, n in cols)
    lines = [head, "-" * len(head)]
    for label, _, _ in rows:
        line = "%-16s" % label
        for fam, n in cols:
            c = _cell(cells, label, fam, n)
            line += "%14s" % ("-" if c is None else "%.3f" % c["total_s"])
        lines.append(line)
    lines.append(BENCH_NOTE)
    return "\n".join(lines)


def bench_soft_checks(cells):
    """Ordering check: finite-natural DP faster than slice DP at the largest n."""
    out = []
    ns = sorted({c["n"] for c in cells})
    if not ns:
        return out
    n = ns[-1]
    nat = _cell(cells, "natural", "dp", n)
    slc = _cell(cells, "eta=1.0 (slice)", "dp", n)
    if nat and slc and not nat["total_s"] < slc["total_s"]:
        out.append("soft check: DP natural (%.3fs) not faster than DP slice (%.3fs) at n=%d"
                   % (nat["total_s"], slc["total_s"], n))
    return out
