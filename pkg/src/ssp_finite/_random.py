"""Draws with array parameters that stay cheap for short arrays.

``Generator.beta`` and ``Generator.gamma`` spend ~20us validating array
arguments; for the handful of components a sweep touches, scalar calls in
a loop are several times faster.  Longer arrays use the vectorised call.
"""

import numpy as np

_SHORT = 24


def beta(rng, a, b):
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    if a.size > _SHORT:
        return rng.beta(a, b)
    draw = rng.beta
    return np.array([draw(x, y) for x, y in zip(a.flat, b.flat)]).reshape(a.shape)


def gamma(rng, shape, scale):
    shape, scale = np.broadcast_arrays(np.asarray(shape, dtype=float),
                                       np.asarray(scale, dtype=float))
    if shape.size > _SHORT:
        return rng.gamma(shape, scale)
    draw = rng.gamma
    return np.array([draw(k, s) for k, s in zip(shape.flat, scale.flat)]).reshape(shape.shape)
