"""Spherical-harmonic lighting basis for Lambertian inverse rendering.

Real spherical harmonics up to degree 2, without the Condon-Shortley
phase, in the order (0,0), (1,-1), (1,0), (1,1), (2,-2), (2,-1), (2,0),
(2,1), (2,2).  For a unit normal (x, y, z):

    Y00  = 1 / (2 sqrt(pi))                 = 0.282095
    Y1-1 = sqrt(3 / (4 pi)) y               = 0.488603 y
    Y10  = sqrt(3 / (4 pi)) z
    Y11  = sqrt(3 / (4 pi)) x
    Y2-2 = sqrt(15 / (4 pi)) x y            = 1.092548 x y
    Y2-1 = sqrt(15 / (4 pi)) y z
    Y20  = sqrt(5 / (16 pi)) (3 z^2 - 1)    = 0.315392 (3 z^2 - 1)
    Y21  = sqrt(15 / (4 pi)) x z
    Y22  = sqrt(15 / (16 pi)) (x^2 - y^2)   = 0.546274 (x^2 - y^2)

Any other normalization rescales the columns of ``A`` by constants, which
the calibration absorbs into ``X``.
"""

from __future__ import annotations

import math

import numpy as np

C0 = 0.5 / math.sqrt(math.pi)
C1 = math.sqrt(3.0 / (4.0 * math.pi))
C2 = math.sqrt(15.0 / (4.0 * math.pi))
C20 = math.sqrt(5.0 / (16.0 * math.pi))
C22 = math.sqrt(15.0 / (16.0 * math.pi))


def sh_basis(normals) -> np.ndarray:
    """Evaluate the 9 real SH functions at each row of an ``n x 3`` normal map.

    Rows are normalized first; all-zero rows (masked pixels) give zero rows.
    """
    N = np.asarray(normals, dtype=float)
    if N.ndim != 2 or N.shape[1] != 3:
        raise ValueError(f"normals must have shape (n, 3), got {N.shape}")
    if not np.all(np.isfinite(N)):
        raise ValueError("normals must be finite")
    nrm = np.linalg.norm(N, axis=1)
    valid = nrm > 0
    U = np.zeros_like(N)
    U[valid] = N[valid] / nrm[valid, None]
    x, y, z = U[:, 0], U[:, 1], U[:, 2]
    B = np.stack([
        np.full_like(x, C0),
        C1 * y,
        C1 * z,
        C1 * x,
        C2 * x * y,
        C2 * y * z,
        C20 * (3 * z * z - 1),
        C2 * x * z,
        C22 * (x * x - y * y),
    ], axis=1)
    B[~valid] = 0.0
    return B
