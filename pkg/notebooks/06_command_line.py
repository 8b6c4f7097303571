# %% [markdown]
# # The `pgamma` command line
#
# The same workflow from a shell:
#
# ```
# pgamma simulate --n 50 --grid 200,300,500 --theta 1,0.02,0.02 --seed 7 -o panel.csv
# pgamma estimate --panel panel.csv --level 0.95
# pgamma mc-table --reps 1000 --sizes 50,100,200 --format text
# pgamma design-check --case 4
# ```
#
# Here the entry point is called in-process.

# %%
from __future__ import annotations

import tempfile
from pathlib import Path

from perturbed_gamma.cli import main

with tempfile.TemporaryDirectory() as tmp:
    panel = Path(tmp) / "panel.csv"
    main(["simulate", "--n", "50", "--grid", "200,300,500", "--theta", "1,0.02,0.02", "--seed", "7", "-o", str(panel)])
    print(panel.read_text().splitlines()[:4])
    main(["estimate", "--panel", str(panel)])

    bad = Path(tmp) / "bad.csv"
    bad.write_text("item,time,value\nA,200,1\nA,200,2\n")
    print("exit code:", main(["estimate", "--panel", str(bad)]))
