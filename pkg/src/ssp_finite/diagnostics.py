"""Posterior summaries: density estimates, occupied clusters, running means."""

from __future__ import annotations

import csv
from dataclasses import astuple, dataclass, fields

import numpy as np

from .model import log_normal


def default_grid(data, size=500, pad=3.0):
    """``size`` equally spaced points over ``[min - pad*sd, max + pad*sd]``."""
    data = np.asarray(data, dtype=float)
    sd = data.std(ddof=1) if data.size > 1 else 1.0
    return np.linspace(data.min() - pad * sd, data.max() + pad * sd, size)


def density_draw(state, grid):
    """``sum_{j<=k*} w_j N(x; mu_j, 1/tau_j)`` at each grid point.

    The weights are the first ``k*`` stick-breaking weights, not
    renormalised, so one draw integrates to ``sum_{j<=k*} w_j < 1``.
    """
    ks = state.k_star
    state.sticks.extend_to(ks)
    w = state.sticks.weights[:ks]
    mu, tau = state.atom_arrays(ks)
    grid = np.asarray(grid, dtype=float)
    return np.exp(log_normal(grid[:, None], mu[None, :], tau[None, :])) @ w


def occupied_clusters(z, k_star=None):
    """Number of distinct occupied components."""
    return int(np.unique(np.asarray(z)).size)


def ergodic_mean(series):
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValueError("empty series")
    return np.cumsum(series) / np.arange(1, series.size + 1)


def credible_band(draws, level=0.95):
    """Pointwise equal-tailed band from the rows of ``draws`` (linear interpolation)."""
    draws = np.asarray(draws, dtype=float)
    if draws.shape[0] < 2:
        raise ValueError("need at least two draws")
    tail = 0.5 * (1.0 - level)
    lo, hi = np.quantile(draws, [tail, 1.0 - tail], axis=0)
    return lo, hi


class DensityAccumulator:
    """Streaming mean of density draws plus a stored subsample for quantiles.

    With ``exact=True`` every row is kept and the band uses all draws.
    Otherwise at most ``max_stored`` rows are kept: once the buffer is full
    every second stored row is dropped and the keep-stride doubles, which
    leaves an evenly thinned subsample of the chain.
    """

    def __init__(self, grid, exact=False, max_stored=2000):
        self.grid = np.asarray(grid, dtype=float)
        self.exact = exact
        self.max_stored = max_stored
        self.count = 0
        self._sum = np.zeros(self.grid.size)
        self._rows = []
        self._stride = 1

    def add(self, row):
        row = np.asarray(row, dtype=float)
        self._sum += row
        if self.exact or self.count % self._stride == 0:
            self._rows.append(row.copy())
            if not self.exact and len(self._rows) >= self.max_stored:
                self._rows = self._rows[::2]
                self._stride *= 2
        self.count += 1

    def merge(self, other):
        self._sum += other._sum
        self.count += other.count
        self._rows.extend(other._rows)

    @property
    def mean(self):
        return self._sum / max(self.count, 1)

    @property
    def stored(self):
        return np.asarray(self._rows)

    def band(self, level=0.95):
        return credible_band(self.stored, level)

    def write_csv(self, path):
        lo, hi = self.band()
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["x", "mean", "lo95", "hi95"])
            for row in zip(self.grid, self.mean, lo, hi):
                out.writerow(["%.17g" % v for v in row])


@dataclass
class TraceRecord:
    iter: int
    c_n: int
    k_star: int
    conc_or_v: float
    elapsed_s: float


TRACE_COLUMNS = [f.name for f in fields(TraceRecord)]


class TraceWriter:
    """Appends :class:`TraceRecord` rows to a CSV file as they are produced."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._out = csv.writer(self._fh)
        self._out.writerow(TRACE_COLUMNS)

    def write(self, rec):
        it, cn, ks, h, el = astuple(rec)
        self._out.writerow([it, cn, ks, "%.17g" % h, "%.6f" % el])

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

