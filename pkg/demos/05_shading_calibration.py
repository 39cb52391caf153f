"""
Lambertian shading as a calibration problem
===========================================

Each pixel sees the lighting through 9 spherical harmonics of its normal.
The unknown albedo acts as a per-pixel gain and the lighting coefficients
form X.  Pixels play the role of sensors, lightings the role of snapshots.

The default alpha = sqrt(n) assumes ||A||_2 ~ 1 and ||Y||_F ~ 1, so both
are rescaled first; the rescaling only changes the unknowns by constants.
"""

import numpy as np

from bgpc import ProblemInstance, SolverConfig, power_iteration
from bgpc.rendering import sh_basis

rng = np.random.default_rng(0)


def albedo_error(normals, iters):
    A = sh_basis(normals)
    albedo = 0.6 + 0.4 * (np.sin(6 * normals[:, 0]) > 0)
    L = rng.standard_normal((9, 12))
    L[0] += 4.0
    Y = albedo[:, None] * (A @ L)
    inst = ProblemInstance(A / np.linalg.norm(A, 2), Y / np.linalg.norm(Y))
    res = power_iteration(inst, cfg=SolverConfig(max_iters=iters))
    est = 1 / (-res.eta.alpha * res.eta.tail)
    est = np.real(est * np.vdot(est, albedo) / np.vdot(est, est))
    print(f"  {res.iterations} iterations: albedo relative error "
          f"{np.linalg.norm(est - albedo) / np.linalg.norm(albedo):.1e}")


# %% normals spread over the whole sphere: the 9 harmonics are nearly orthogonal
normals = rng.standard_normal((4096, 3))
normals /= np.linalg.norm(normals, axis=1, keepdims=True)
print("full sphere, cond(A) =", round(np.linalg.cond(sh_basis(normals)), 2))
for iters in (200, 1000):
    albedo_error(normals, iters)

# %% a sphere seen from +z only shows one hemisphere; A is worse conditioned
# and the iteration needs many more steps for the same accuracy
k = 64
u, v = np.meshgrid(np.linspace(-1, 1, k), np.linspace(-1, 1, k))
inside = u ** 2 + v ** 2 < 0.95
normals = np.stack([u[inside], v[inside], np.sqrt(1 - u[inside] ** 2 - v[inside] ** 2)], axis=1)
print("visible hemisphere, cond(A) =", round(np.linalg.cond(sh_basis(normals)), 2))
for iters in (200, 1000):
    albedo_error(normals, iters)
