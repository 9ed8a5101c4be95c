#!/usr/bin/env python
# coding: utf-8

# # Galaxy velocities
#
# 82 velocities (in units of 1000 km/s) from six regions of the Corona
# Borealis survey. The posterior of the number of occupied clusters does
# not depend on the schedule that drives the truncation, and long runs
# settle around three clusters for all of them. Short runs differ: with
# `exp:1` the concentration can wander off for a while and drag the
# cluster count up with it.

# In[1]:

import numpy as np

from ssp_finite import runner
from ssp_finite.datasets import load_galaxy
from ssp_finite.diagnostics import ergodic_mean
from ssp_finite.model import ModelSpec
from ssp_finite.priors import BaseMeasure

data = load_galaxy().values
print(len(data), "velocities, range %.2f to %.2f" % (data.min(), data.max()))
ITERS, BURNIN = 8000, 2000
base = BaseMeasure(0.0, 0.001, 0.001, 0.001)


# In[2]:

for schedule in ("natural", "exp:0.5", "exp:1"):
    spec = ModelSpec(schedule=schedule, base=base)
    res = runner.run_chain(data, spec, ITERS, np.random.default_rng(1), burnin=BURNIN)
    post = slice(BURNIN, None)
    print("%-8s ergodic c_n %.3f  mean alpha %.3f  mean k* %.1f  %.1fs"
          % (schedule, ergodic_mean(res.c_n[post])[-1], res.hyper[post].mean(),
             res.k_star[post].mean(), res.sampler_s))


# The same run through the file-based driver, which writes `density.csv`,
# `trace.csv` and `summary.json`.

# In[3]:

config = runner.RunConfig(model="dp-finite", iters=3000, burnin=500, data="galaxy",
                          out="demo_output/galaxy_natural")
summary = runner.run_fit(config)
print({k: round(v, 3) for k, v in summary["c_n"].items()})
