"""Stick-breaking mixture models fitted through a randomly truncated finite
mixture, with Gibbs and slice samplers for Bayesian density estimation."""

from .schedules import (DegenerateScheduleError, ExponentialSchedule, GeometricSchedule,
                        NaturalSchedule, parse_schedule)
from .priors import (Atom, BaseMeasure, BetaSticks, DirichletSticks, GeometricSticks,
                     StickState, base_density_log, finite_representation,
                     sample_truncation, truncation_pmf)
from .model import LatentState, ModelSpec, log_joint, recompute_counts
from .datasets import load_csv, load_galaxy, simulate_mixture

__version__ = "0.1.0"
