"""
Starting without phase information
==================================

The row norms of D^H E point at the support of each column.  Restricting
D^H E to those rows and taking its top singular pair gives a start that
already correlates with the truth.
"""

import numpy as np

from bgpc import (EnsembleSpec, PerColumn, SolverConfig, dstar_e_row_norms, gen_instance, initialize, rsnr,
                  truncated_power_iteration)
from bgpc.solvers import baseline_eta0

spec = EnsembleSpec.from_dict({"n": 256, "m": 512, "N": 32, "signal": "flat", "s0": 20, "sigma_w": 0.1, "seed": 5})
inst, truth = gen_instance(spec)

# %% how well do the largest row norms cover the true supports?
scores = dstar_e_row_norms(inst)
cover = np.mean([len(set(S) & set(np.argsort(-scores[:, j])[:40])) / 20 for j, S in enumerate(truth.support)])
print(f"fraction of the true support among the top 40 rows: {cover:.2f}")

# %% spectral start
rep = initialize(inst, s1=40)
print(f"top singular value {rep.singular_value:.4f} after {rep.iterations} iterations")
print(f"|<eta_dot, eta0>| = {abs(np.vdot(truth.eta_dot.data, rep.eta0.data)):.3f}")

# %% compare with the all-ones start
cfg = SolverConfig(sparsity=PerColumn(40))
for name, eta0 in (("ones", baseline_eta0(inst.dims, rep.eta0.alpha)), ("spectral", rep.eta0)):
    res = truncated_power_iteration(inst, eta0, cfg)
    print(f"{name:8s} start: RSNR = {rsnr(truth.eta_dot, res.eta):.1f} dB")
