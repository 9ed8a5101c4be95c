#!/usr/bin/env python
# coding: utf-8

# # Prior partitions
#
# Sampling `(w, k, z)` from the hierarchical prior and counting the distinct
# values of `z` reproduces the Chinese-restaurant expectation
# `E[c_n] = sum_i alpha / (alpha + i - 1)`. The schedule only changes how
# the allocations are reached, so every schedule gives the same law.

# In[1]:

import numpy as np

from ssp_finite import validation

rng = np.random.default_rng(1)
n = 82


# In[2]:

for alpha in (0.5, 1.0, 5.0):
    c = validation.simulate_prior_clusters(alpha, n, 5000, rng)
    se = c.std(ddof=1) / np.sqrt(c.size)
    print("alpha=%.1f  simulated %.3f +/- %.3f   exact %.4f"
          % (alpha, c.mean(), se, validation.crp_expected_clusters(alpha, n)))


# Same check with two deterministic schedules.

# In[3]:

for schedule in ("natural", "exp:0.2", "exp:2", "geom:0.5"):
    r = validation.check_prior_crp_moments(1.0, n, chains=4000, rng=rng, schedule=schedule)
    print("%-9s mean c_n %.3f  |z| = %.2f" % (schedule, r.details["mean_c_n"], r.statistic))


# The full distribution of `c_n`, not only its mean, agrees across schedules.

# In[4]:

counts = {s: validation.simulate_prior_clusters(1.0, n, 4000, rng, schedule=s)
          for s in ("natural", "exp:1")}
bins = np.arange(1, 13)
for s, c in counts.items():
    print("%-8s" % s, np.round(np.bincount(c, minlength=13)[1:13] / c.size, 3))
