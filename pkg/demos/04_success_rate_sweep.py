"""
Monte-Carlo success rates
=========================

The harness sweeps one or two parameters, runs independent seeded trials
per cell and writes plot-ready CSV.  Presets cover the usual figures; here
a small sweep over m runs in a few seconds.
"""

import sys

from bgpc import harness

spec = harness.ExperimentSpec(
    base={"n": 64, "m": 16, "N": 8, "signal": "dense", "sigma_w": 0.0},
    axes=[["m", [8, 16, 24, 32, 40]]],
    trials=10,
    solver="pi",
)

# %% run and print the summary table
result = harness.run_experiment(spec)
sys.stdout.write(harness.summary_csv(result))

# %% a 2-D grid with a coupling rule (n tied to m)
grid = harness.ExperimentSpec(
    base={"n": 32, "m": 8, "N": 4, "signal": "dense"},
    axes=[["m", [4, 8, 12]], ["N", [2, 4, 8]]],
    couplings={"n": "2*m"},
    trials=5,
)
sys.stdout.write(harness.summary_csv(harness.phase_transition(grid)))

# %% the same spec as a JSON config, usable with `bgpc experiment --config`
print(harness.ExperimentSpec.from_dict(spec.to_dict()) == spec)
