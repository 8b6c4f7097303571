# %% [markdown]
# # Bias, MSE and standard deviation tables
#
# Reference setup: `theta = (1, 0.02, 0.02)`, windows of 200, 300 and 500
# time units, 1000 repetitions per sample size.  A repetition counts when the
# moments are invertible and the raw `tau2` estimate is non-negative.

# %%
from __future__ import annotations

from perturbed_gamma import ExperimentConfig, ModelParams, ValidityRule, run_experiment

theta = ModelParams(1.0, 0.02, 0.02)
config = ExperimentConfig(theta, (200.0, 300.0, 500.0), [50, 100, 200], repetitions=1000, master_seed=0)
table = run_experiment(config)
print(table.to_text())

# %% [markdown]
# The published table reports 937, 983 and 998 usable repetitions.  We find
# noticeably fewer at `n = 50`.  Halving every window reproduces the
# published counts and the published bias of `xi` and `alpha` closely, which
# suggests those numbers came from a shorter time scale.

# %%
half = ExperimentConfig(theta, (100.0, 150.0, 250.0), [50, 100, 200], repetitions=1000, master_seed=0)
print(run_experiment(half).to_text())

# %% [markdown]
# Counting every invertible repetition instead barely changes the counts:
# when the moments can be inverted, the `tau2` estimate is almost never
# negative at this parameter point.

# %%
loose = ExperimentConfig(theta, (200.0, 300.0, 500.0), [50, 100, 200], repetitions=1000, master_seed=0,
                         validity=ValidityRule.INVERTIBLE)
print([run_experiment(loose).valid_count(n) for n in (50, 100, 200)])

# %% [markdown]
# The same table as CSV, suitable for plotting elsewhere.

# %%
print(table.to_csv())
