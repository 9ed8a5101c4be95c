#!/usr/bin/env python
# coding: utf-8

# # Random truncation of a stick-breaking prior
#
# A stick-breaking weight sequence `w` is paired with a decreasing sequence
# `xi` (the schedule). Drawing a truncation level `K` with
# `P(K = k | w) = (xi_k - xi_{k+1}) s_k`, where `s_k = sum_{i<=k} w_i / xi_i`,
# and then an index from the finite vector `w_j / (xi_j s_K)` gives back an
# index distributed exactly as `w`. This notebook checks that numerically.

# In[1]:

import numpy as np

from ssp_finite import priors, schedules, validation

rng = np.random.default_rng(0)


# Draw Dirichlet-process sticks and look at the three schedules side by side.

# In[2]:

sticks = priors.StickState(priors.DirichletSticks(2.0))
sticks.extend_to(60, rng)
choices = {
    "natural": schedules.NaturalSchedule(sticks),
    "exp:0.5": schedules.ExponentialSchedule(0.5),
    "geom:0.7": schedules.GeometricSchedule(0.7),
}
ks = np.arange(1, 16)
for name, sch in choices.items():
    pmf = priors.truncation_pmf(sticks, sch, ks)
    print("%-9s P(K<=15) = %.4f  first pmf values %s" % (name, pmf.sum(), np.round(pmf[:5], 4)))


# The pmf plus the exact tail mass sums to one, and mixing the finite
# weights over `K` recovers `w_j` up to the telescoping remainder.

# In[3]:

for name, sch in choices.items():
    n = validation.check_pmf_normalization(sticks, sch, 50)
    b = validation.check_marginalization_bridge(sticks, sch, 50, jmax=20)
    print(name, n.line())
    print(name, b.line())


# Monte Carlo version: sample `(K, index)` pairs and compare the index
# frequencies with the weights themselves.

# In[4]:

sch = choices["exp:0.5"]
draws = 200_000
k = priors.sample_truncation(sticks, sch, rng, size=draws)
idx = np.empty(draws, dtype=int)
for kk in np.unique(k):
    rows = np.flatnonzero(k == kk)
    fw, _ = priors.finite_representation(sticks, sch, np.zeros(kk), np.ones(kk), kk)
    idx[rows] = rng.choice(kk, size=rows.size, p=fw) + 1
freq = np.bincount(idx, minlength=8)[1:8] / draws
print("empirical", np.round(freq, 4))
print("weights  ", np.round(sticks.weights[:7], 4))


# With geometric weights `w_j = v (1 - v)^{j-1}` under their own schedule the
# truncation law has the closed form `k v^2 (1 - v)^{k-1}` and mean `(2 - v)/v`.

# In[5]:

for v in validation.GSB_VALUES:
    print(validation.check_gsb_pmf_closed_form(v).line())
