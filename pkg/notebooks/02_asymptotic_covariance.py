# %% [markdown]
# # Asymptotic covariance of the estimator
#
# `parameter_cov` chains the design averages `c_u`, the limit covariance of
# the empirical moments, the correction for estimating the mean, and the
# Jacobian of the inverse moment map.  `M` is the covariance of
# `sqrt(sum N_i) * (theta_hat - theta)`.

# %%
from __future__ import annotations

import numpy as np

from perturbed_gamma import ExperimentConfig, ModelParams, ObservationGrid, design_constants, parameter_cov, run_experiment

theta = ModelParams(1.0, 0.02, 0.02)
grid = ObservationGrid.repeated([200.0, 300.0, 500.0], 2000)
cov = parameter_cov(theta, grid)
print(design_constants(grid))
np.set_printoptions(precision=5, suppress=False)
print("M =\n", cov.M)
print("sd (xi, alpha, tau2):", cov.sd)
print("sd of the estimates at n = 2000:", cov.sd / np.sqrt(grid.total))

# %% [markdown]
# ## Checking the sandwich against simulation
#
# The empirical variance of `sqrt(sum N) * (theta_hat - theta)` over many
# repetitions should be close to the diagonal of `M`.

# %%
table = run_experiment(ExperimentConfig(theta, (200.0, 300.0, 500.0), [2000], repetitions=1000, master_seed=3))
est = table.estimates[2000][table.valid[2000]]
emp = np.var(np.sqrt(grid.total) * (est - theta.as_array()), axis=0, ddof=1)
for name, e, m in zip(("xi", "alpha", "tau2"), emp, np.diag(cov.M)):
    print(f"{name:>6}: simulated {e:.4g}   asymptotic {m:.4g}   ratio {e / m:.3f}")

# %% [markdown]
# `xi_hat` has a heavy right tail (it divides by the third moment), so its
# simulated variance moves by several percent from seed to seed even with
# 1000 repetitions; ratios between about 1.05 and 1.15 are typical at this
# sample size, while `tau2` sits closer to 1.
