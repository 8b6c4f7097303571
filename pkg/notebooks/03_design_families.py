# %% [markdown]
# # Which observation designs give consistent estimators?
#
# The limit theory needs a summability condition (H1), bounded windows (H2)
# and finite design averages (H3).  `design_diagnostics` checks each one
# numerically over a long run of items.  The verdicts are heuristics: a
# quantity counts as divergent if it still grows by more than 1% over the
# last 90% of the horizon.

# %%
from __future__ import annotations

from perturbed_gamma import case_family, design_diagnostics

descriptions = {
    1: "N regular instants on [0, T], shared",
    2: "shared irregular instants 200, 500, 1000",
    3: "N_i = i regular instants on [0, T]",
    4: "N_i = i regular instants on [0, i T]",
    5: "N_i = 2**(i-1) regular instants on [0, T]",
}
for case, text in descriptions.items():
    report = design_diagnostics(case_family(case))
    print(f"case {case} ({text}): {report.conclusion}")

# %% [markdown]
# Case 3 crowds more and more instants into a fixed interval, so windows
# shrink and the average of `1/dt**2` blows up.  Consistency survives,
# asymptotic normality is not covered.

# %%
print(design_diagnostics(case_family(3)).to_text())
