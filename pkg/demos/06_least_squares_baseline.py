"""
Least squares with one gain pinned
==================================

Fixing gamma_1 = 1 removes the scale ambiguity and turns the problem into
ordinary least squares.  It is exact without noise but, unlike power
iteration, it leans on a single reference sensor.
"""

import numpy as np

from bgpc import EnsembleSpec, gen_instance, least_squares, pack_eta, power_iteration, rsnr

for sigma in (0.0, 0.1, 0.2):
    spec = EnsembleSpec.from_dict({"n": 128, "m": 16, "N": 16, "sigma_w": sigma, "seed": 2})
    inst, truth = gen_instance(spec)
    ls = least_squares(inst)
    eta_ls = pack_eta(ls.X, ls.gamma, np.sqrt(128)).normalized()
    eta_pi = power_iteration(inst).eta
    print(f"sigma_w={sigma}: LS {rsnr(truth.eta_dot, eta_ls):7.1f} dB   PI {rsnr(truth.eta_dot, eta_pi):7.1f} dB")
