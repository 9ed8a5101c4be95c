"""Data ingestion, the simulated four-component mixture and the galaxy velocities."""

from __future__ import annotations

from dataclasses import dataclass
import os
from importlib import resources

import numpy as np
from scipy import stats

MIXTURE_WEIGHTS = np.array([0.5, 0.2, 0.2, 0.1])
MIXTURE_MEANS = np.array([-4.0, 0.0, 5.0, 8.0])
MIXTURE_SDS = np.array([0.8, 1.0, 0.5, 1.5])


@dataclass
class Dataset:
    values: np.ndarray
    name: str = ""
    provenance: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size < 1:
            raise ValueError("dataset is empty")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("dataset contains non-finite values")

    def __len__(self):
        return self.values.size


class DataFormatError(ValueError):
    pass


def _parse_lines(lines, name):
    values = []
    started = False
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        field = text.split(",")[0].strip().strip('"')
        try:
            values.append(float(field))
        except ValueError:
            if not started:
                started = True  # header row
                continue
            raise DataFormatError("%s: line %d: not a number: %r" % (name, lineno, text))
        started = True
    if not values:
        raise DataFormatError("%s: no data rows" % name)
    return values


def load_csv(path):
    """One value per row; an optional non-numeric header and ``#`` comments are skipped."""
    with open(path) as fh:
        values = _parse_lines(fh, str(path))
    return Dataset(values, name=str(path), provenance="csv file %s" % path)


def write_csv(path, values, header="x"):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for v in np.asarray(values, dtype=float):
            fh.write("%.17g\n" % v)


def simulate_mixture(n, seed=None, return_labels=False):
    """``n`` draws from ``0.5 N(-4, 0.8^2) + 0.2 N(0, 1) + 0.2 N(5, 0.5^2) + 0.1 N(8, 1.5^2)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    labels = rng.choice(4, size=n, p=MIXTURE_WEIGHTS)
    x = rng.normal(MIXTURE_MEANS[labels], MIXTURE_SDS[labels])
    ds = Dataset(x, name="mixture4-n%d" % n,
                 provenance="simulate_mixture(n=%d, seed=%r)" % (n, seed))
    return (ds, labels) if return_labels else ds


def true_mixture_density(x):
    x = np.asarray(x, dtype=float)[..., None]
    return np.sum(MIXTURE_WEIGHTS * stats.norm.pdf(x, MIXTURE_MEANS, MIXTURE_SDS), axis=-1)


def load_galaxy(scale=1000.0):
    """The 82 Corona Borealis galaxy velocities, divided by ``scale`` (default: 1000 km/s units)."""
    text = resources.files("ssp_finite").joinpath("data/galaxy.csv").read_text()
    values = np.asarray(_parse_lines(text.splitlines(), "galaxy.csv")) / scale
    unit = "km/s" if scale == 1 else "%g km/s" % scale
    return Dataset(values, name="galaxy",
                   provenance="MASS::galaxies (Roeder 1990), units of %s" % unit)


def resolve_data(spec):
    """``"galaxy"``, ``"simulated:<n>[:<seed>]"`` or a CSV path.

    ``galaxy.csv`` names the bundled file unless such a file exists locally.
    """
    if spec == "galaxy" or (spec == "galaxy.csv" and not os.path.exists(spec)):
        return load_galaxy()
    if spec.startswith("simulated:"):
        parts = spec.split(":")
        n = int(parts[1])
        seed = int(parts[2]) if len(parts) > 2 else 0
        return simulate_mixture(n, seed)
    return load_csv(spec)
