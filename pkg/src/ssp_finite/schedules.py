"""Decreasing sequences ``xi_j`` that drive the random truncation level.

Three families are provided:

* :class:`NaturalSchedule` -- ``xi_j = prod_{l<j} (1 - v_l)``, read off a
  :class:`~ssp_finite.priors.StickState` (extended lazily from the prior).
* :class:`ExponentialSchedule` -- ``xi_j = exp(-eta j)``.
* :class:`GeometricSchedule` -- ``xi_j = (1 - rho) rho^(j-1)``.

Indices are 1-based throughout, as in the model.  Every method accepts a
scalar or an integer array.
"""

from __future__ import annotations

import math

import numpy as np

MAX_INDEX = 10**6


class DegenerateScheduleError(RuntimeError):
    """Raised when a search over ``xi_j`` runs past :data:`MAX_INDEX`."""


def _as_index(j):
    j = np.asarray(j)
    if np.any(j < 1):
        raise ValueError("schedule indices start at 1")
    return j


class Schedule:
    """Base class.  Subclasses implement :meth:`log_xi` and :meth:`log_xi_gap`."""

    #: True when the sequence is fixed and independent of the stick lengths.
    deterministic = True

    def log_xi(self, j):
        raise NotImplementedError

    def log_xi_gap(self, k):
        """``log(xi_k - xi_{k+1})``, evaluated without cancellation."""
        raise NotImplementedError

    def xi(self, j):
        return np.exp(self.log_xi(j))

    def xi_gap(self, k):
        k = _as_index(k)
        return self.xi(k) - self.xi(k + 1)

    def smallest_index_with_xi_below(self, threshold):
        """Smallest ``j >= 1`` such that ``xi_{j+1} <= threshold``."""
        raise NotImplementedError

    def _fix_off_by_one(self, j, log_t):
        # closed forms go through a log/ceil that can land one step off
        j = np.maximum(np.asarray(j, dtype=np.int64), 1)
        too_small = self.log_xi(j + 1) > log_t
        j = np.where(too_small, j + 1, j)
        too_big = (j > 1) & (self.log_xi(np.maximum(j, 1)) <= log_t)
        j = np.where(too_big, j - 1, j)
        if np.any(j > MAX_INDEX):
            raise DegenerateScheduleError(
                "xi_j stays above the threshold beyond j = %d" % MAX_INDEX)
        return j


class ExponentialSchedule(Schedule):
    """``xi_j = exp(-eta * j)``."""

    def __init__(self, eta):
        eta = float(eta)
        if not (math.isfinite(eta) and eta > 0):
            raise ValueError("eta must be a positive finite number, got %r" % eta)
        self.eta = eta
        self._log_one_minus_ratio = math.log(-math.expm1(-eta))

    def __repr__(self):
        return "ExponentialSchedule(eta=%g)" % self.eta

    def log_xi(self, j):
        return -self.eta * _as_index(j)

    def log_xi_gap(self, k):
        return -self.eta * _as_index(k) + self._log_one_minus_ratio

    def smallest_index_with_xi_below(self, threshold):
        log_t = np.log(threshold)
        j = np.ceil(-log_t / self.eta) - 1
        return _scalarize(self._fix_off_by_one(j, log_t), threshold)


class GeometricSchedule(Schedule):
    """``xi_j = (1 - rho) * rho**(j - 1)``."""

    def __init__(self, rho):
        rho = float(rho)
        if not (0.0 < rho < 1.0):
            raise ValueError("rho must lie in (0, 1), got %r" % rho)
        self.rho = rho
        self._log_rho = math.log(rho)
        self._log_1m = math.log1p(-rho)

    def __repr__(self):
        return "GeometricSchedule(rho=%g)" % self.rho

    def log_xi(self, j):
        return self._log_1m + (_as_index(j) - 1) * self._log_rho

    def log_xi_gap(self, k):
        return 2.0 * self._log_1m + (_as_index(k) - 1) * self._log_rho

    def smallest_index_with_xi_below(self, threshold):
        log_t = np.log(threshold)
        j = np.ceil((log_t - self._log_1m) / self._log_rho)
        return _scalarize(self._fix_off_by_one(j, log_t), threshold)


class NaturalSchedule(Schedule):
    """``xi_j = prod_{l<j} (1 - v_l)`` over a shared stick state.

    The schedule reads (and extends) the stick state it was built from, so
    it must stay with the chain that owns those sticks.
    """

    deterministic = False

    def __init__(self, sticks):
        self.sticks = sticks

    def __repr__(self):
        return "NaturalSchedule(%r)" % (self.sticks,)

    def log_xi(self, j):
        j = _as_index(j)
        self.sticks.extend_to(int(np.max(j)) - 1 if j.size else 0)
        return self.sticks.log_xi_array[j - 1]

    def log_xi_gap(self, k):
        k = _as_index(k)
        self.sticks.extend_to(int(np.max(k)) if k.size else 0)
        return self.sticks.log_weights[k - 1]

    def xi_gap(self, k):
        # xi_k - xi_{k+1} = xi_k v_k = w_k, computed from the same products
        k = _as_index(k)
        self.sticks.extend_to(int(np.max(k)) if k.size else 0)
        return self.sticks.weights[k - 1]

    def smallest_index_with_xi_below(self, threshold):
        log_t = np.log(threshold)
        self.sticks.extend_until_log_tail_below(float(np.max(log_t)))
        # log_xi_array[m] is log xi_{m+1}; it is strictly decreasing
        neg = -self.sticks.log_xi_array
        j = np.searchsorted(neg, -log_t, side="left")
        return _scalarize(np.maximum(j, 1), threshold)


def _scalarize(result, like):
    if np.ndim(like) == 0:
        return int(result)
    return np.asarray(result, dtype=np.int64)


def parse_schedule(text, sticks=None):
    """Build a schedule from ``"natural"``, ``"exp:<eta>"`` or ``"geom:<rho>"``."""
    text = text.strip().lower()
    if text == "natural":
        if sticks is None:
            raise ValueError("the natural schedule needs a stick state")
        return NaturalSchedule(sticks)
    name, sep, value = text.partition(":")
    if not sep:
        raise ValueError("unknown schedule %r" % text)
    if name == "exp":
        return ExponentialSchedule(float(value))
    if name == "geom":
        return GeometricSchedule(float(value))
    raise ValueError("unknown schedule %r" % text)
