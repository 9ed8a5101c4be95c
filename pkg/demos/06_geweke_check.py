#!/usr/bin/env python
# coding: utf-8

# # Joint-distribution test of the Gibbs sampler
#
# Draws from the prior `(theta, x)` are compared with a chain that alternates
# one Gibbs sweep with fresh data `x | theta`. If every conditional is right
# both sides have the same law; a z-score per statistic summarises the gap.
# A planted error in one conditional is caught at the same budget.

# In[1]:

import numpy as np

from ssp_finite import gibbs, validation

ITERS = 20_000  # the acceptance run uses 200000


# In[2]:

for family, schedule in validation.GEWEKE_CONFIGS:
    r = validation.run_geweke(validation.geweke_spec(family, schedule), n=5, iters=ITERS,
                              rng=np.random.default_rng(5))
    print(family, schedule, r.line())
    print("   ", {k: round(v, 2) for k, v in r.details["z"].items()})


# In[3]:

good = gibbs.stick_posterior_case_a


def biased(state, counts):
    A, B = good(state, counts)
    return A + 1.0, B


gibbs.stick_posterior_case_a = biased
try:
    r = validation.run_geweke(validation.geweke_spec("dp", "natural"), n=5, iters=ITERS,
                              rng=np.random.default_rng(5))
    print("with a biased stick update:", r.line())
finally:
    gibbs.stick_posterior_case_a = good
