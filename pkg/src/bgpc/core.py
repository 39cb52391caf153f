"""Domain types, packing of the lifted unknown, and phase-invariant metrics.

Complex matrices are plain ``numpy`` arrays of dtype ``complex128``; the
helpers here validate shapes and finiteness at the boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

UNIT_TOL = 1e-9


class DimensionError(ValueError):
    """Raised when an array does not have the shape its role requires."""

    def __init__(self, name: str, expected, got):
        self.name = name
        self.expected = expected
        self.got = got
        super().__init__(f"{name}: expected shape {expected}, got {got}")


def as_cmatrix(a, name: str = "matrix", shape: tuple | None = None) -> np.ndarray:
    """Return ``a`` as a finite 2-D complex128 array, checking ``shape`` if given."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionError(name, "2-D", arr.shape)
    if shape is not None and arr.shape != tuple(shape):
        raise DimensionError(name, tuple(shape), arr.shape)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: contains NaN or Inf")
    return arr


@dataclass(frozen=True)
class Dims:
    """Sensor count ``n``, signal dimension ``m`` and snapshot count ``N``."""

    n: int
    m: int
    N: int

    def __post_init__(self):
        for k in ("n", "m", "N"):
            v = getattr(self, k)
            if int(v) != v or v < 1:
                raise ValueError(f"Dims.{k} must be a positive integer, got {v}")

    @property
    def size(self) -> int:
        """Length of the lifted vector, ``N*m + n``."""
        return self.N * self.m + self.n


@dataclass(frozen=True)
class ProblemInstance:
    A: np.ndarray
    Y: np.ndarray
    dims: Dims = field(init=False)

    def __post_init__(self):
        A = as_cmatrix(self.A, "A")
        Y = as_cmatrix(self.Y, "Y")
        if Y.shape[0] != A.shape[0]:
            raise DimensionError("Y", (A.shape[0], "N"), Y.shape)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "dims", Dims(A.shape[0], A.shape[1], Y.shape[1]))


@dataclass(frozen=True)
class EtaVector:
    """Lifted unknown ``[vec(X); -gamma/alpha]`` with its packing metadata."""

    data: np.ndarray
    dims: Dims
    alpha: float

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128).reshape(-1)
        if data.shape[0] != self.dims.size:
            raise DimensionError("eta.data", (self.dims.size,), data.shape)
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        object.__setattr__(self, "data", data)

    @property
    def x(self) -> np.ndarray:
        return self.data[: self.dims.N * self.dims.m]

    @property
    def tail(self) -> np.ndarray:
        return self.data[self.dims.N * self.dims.m:]

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def normalized(self) -> "EtaVector":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return EtaVector(self.data / nrm, self.dims, self.alpha)

    def with_data(self, data) -> "EtaVector":
        return EtaVector(data, self.dims, self.alpha)


@dataclass(frozen=True)
class GroundTruth:
    lam: np.ndarray
    gamma: np.ndarray
    X: np.ndarray
    W: np.ndarray
    eta_dot: EtaVector
    phases: np.ndarray
    support: list | None = None


def pack_eta(X, gamma, alpha: float) -> EtaVector:
    """Stack ``vec(X)`` (column-major) over ``-gamma/alpha``."""
    X = as_cmatrix(X, "X")
    gamma = np.asarray(gamma, dtype=np.complex128).reshape(-1)
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    m, N = X.shape
    dims = Dims(gamma.shape[0], m, N)
    data = np.concatenate([X.reshape(-1, order="F"), -gamma / alpha])
    return EtaVector(data, dims, float(alpha))


def unpack_eta(eta: EtaVector) -> tuple[np.ndarray, np.ndarray]:
    d = eta.dims
    X = eta.x.reshape((d.m, d.N), order="F").copy()
    gamma = -eta.alpha * eta.tail
    return X, gamma


def _vec(v) -> np.ndarray:
    if isinstance(v, EtaVector):
        return v.data
    return np.asarray(v, dtype=np.complex128).reshape(-1)


def _check_unit(v: np.ndarray, name: str):
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > UNIT_TOL:
        raise ValueError(f"{name} must have unit norm, got {nrm:.12g}")


def distance(a, b) -> float:
    """Distance between unit vectors modulo a global phase.

    Equals ``sqrt(2 - 2|a^H b|)``; evaluated as ``||a - e^{i phi} b||`` at the
    optimal phase so that nearly parallel vectors keep full precision.
    """
    a, b = _vec(a), _vec(b)
    if a.shape != b.shape:
        raise DimensionError("b", a.shape, b.shape)
    _check_unit(a, "a")
    _check_unit(b, "b")
    inner = np.vdot(b, a)
    phase = inner / abs(inner) if inner != 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


def rsnr(eta_dot, eta) -> float:
    """Recovery SNR in dB, ``-10 log10(2 - 2|eta_dot^H eta|)``; ``inf`` on exact recovery."""
    d = distance(eta_dot, eta)
    if d == 0.0:
        return math.inf
    return -20.0 * math.log10(d)


def msnr(lam, A, X, W) -> float:
    """Measurement SNR in dB, ``inf`` when the noise is exactly zero."""
    signal = np.asarray(lam).reshape(-1, 1) * (np.asarray(A) @ np.asarray(X))
    wn = np.linalg.norm(W)
    if wn == 0:
        return math.inf
    return 20.0 * math.log10(np.linalg.norm(signal) / wn)


def gains_from_eta(eta: EtaVector, rel_tol: float = 1e-12) -> np.ndarray:
    """Recover gains as the entrywise inverse of ``-alpha * tail``.

    Entries with modulus below ``rel_tol * max`` are reported as zero gain.
    """
    gamma = -eta.alpha * eta.tail
    return safe_reciprocal(gamma, rel_tol)


def safe_reciprocal(v, rel_tol: float = 1e-12) -> np.ndarray:
    """Entrywise inverse that keeps (numerically) zero entries at zero."""
    v = np.asarray(v, dtype=np.complex128)
    out = np.zeros_like(v)
    vmax = np.max(np.abs(v)) if v.size else 0.0
    keep = np.abs(v) > rel_tol * vmax
    out[keep] = 1.0 / v[keep]
    return out
