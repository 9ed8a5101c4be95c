#!/usr/bin/env python
# coding: utf-8

# # Execution times
#
# Every (schedule row, family, n) cell is timed on the same machine, with
# the sampler and the 500-point density evaluation reported separately.
# Absolute seconds depend on hardware; only the ordering within a column is
# of interest. `ssp-finite bench` runs the full 100000-sweep budget.

# In[1]:

from ssp_finite import runner

report = runner.run_bench(iters=1000, ns=(250, 1000), families=("dp", "gsb"))
print(report["table"])


# In[2]:

for cell in report["cells"][:4]:
    print("%-16s %s n=%d  sampler %.2fs  density %.2fs  mean c_n %.2f"
          % (cell["row"], cell["family"], cell["n"], cell["sampler_s"], cell["density_s"],
             cell["mean_c_n"]))
print(report["warnings"] or "ordering check passed")
