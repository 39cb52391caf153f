"""Seeded synthetic ensembles and assumption diagnostics.

Every random draw comes from a Philox (counter-based) stream keyed by
``(seed, stream tag)``, so each component of an instance can be
regenerated in isolation and trials never share generator state.
Complex Gaussians use the polar Box-Muller form
``sqrt(-ln u1) * exp(2 pi i u2)``, which is ``CN(0, 1)`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .core import Dims, GroundTruth, ProblemInstance, pack_eta

STREAMS = {"A": 1, "lambda": 2, "X": 3, "W": 4, "support": 5, "sign": 6, "phase_noise": 7}


@dataclass(frozen=True)
class DenseSubspace:
    pass


@dataclass(frozen=True)
class Sparse:
    s0: int


@dataclass(frozen=True)
class JointSparse:
    s0: int


@dataclass(frozen=True)
class FlatSparse:
    """Each column has ``s0`` nonzeros of equal modulus and Rademacher sign."""

    s0: int
    joint: bool = False


SIGNALS = {"dense": DenseSubspace, "sparse": Sparse, "joint": JointSparse, "flat": FlatSparse}


@dataclass(frozen=True)
class EnsembleSpec:
    dims: Dims
    delta: float = 0.1
    sigma_w: float = 0.0
    signal: object = DenseSubspace()
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.sigma_w < 0:
            raise ValueError("sigma_w must be nonnegative")
        s0 = getattr(self.signal, "s0", None)
        if s0 is not None and not 1 <= s0 <= self.dims.m:
            raise ValueError(f"s0={s0} outside [1, m={self.dims.m}]")

    def to_dict(self) -> dict:
        sig = self.signal
        kind = next(k for k, v in SIGNALS.items() if isinstance(sig, v))
        d = {"n": self.dims.n, "m": self.dims.m, "N": self.dims.N, "delta": self.delta,
             "sigma_w": self.sigma_w, "signal": kind, "seed": self.seed}
        d.update({k: v for k, v in asdict(sig).items()})
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleSpec":
        kind = d.get("signal", "dense")
        if kind not in SIGNALS:
            raise ValueError(f"unknown signal kind {kind!r}")
        if kind == "dense":
            sig = DenseSubspace()
        elif kind == "flat":
            sig = FlatSparse(int(d["s0"]), bool(d.get("joint", False)))
        else:
            sig = SIGNALS[kind](int(d["s0"]))
        return cls(Dims(int(d["n"]), int(d["m"]), int(d["N"])), float(d.get("delta", 0.1)),
                   float(d.get("sigma_w", 0.0)), sig, int(d.get("seed", 0)))


def stream(seed: int, tag: str, *keys: int) -> np.random.Generator:
    """Independent generator for ``(seed, keys..., tag)``."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(*keys, STREAMS[tag]))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(base_seed: int, *keys: int) -> int:
    """64-bit seed for a sub-task such as ``(cell, trial)``."""
    ss = np.random.SeedSequence(entropy=int(base_seed) & (2**64 - 1), spawn_key=tuple(keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def complex_normal(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """``CN(0, var)`` samples: real and imaginary parts i.i.d. ``N(0, var/2)``."""
    u1 = 1.0 - rng.random(shape)  # in (0, 1]
    u2 = rng.random(shape)
    return math.sqrt(var) * np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


def gen_gains(n: int, delta: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Gains on a circle of radius ``sqrt(1+delta)-1`` around ``exp(i phi)``.

    Returns ``(lambda, phi)``.
    """
    phi = 2 * np.pi * rng.random(n)
    phi2 = 2 * np.pi * rng.random(n)
    r = math.sqrt(1 + delta) - 1
    lam = np.exp(1j * phi) * (1 + r * np.exp(1j * phi2))
    return lam, phi


def _supports(m: int, N: int, s0: int, joint: bool, rng) -> list[np.ndarray]:
    if joint:
        T = np.sort(rng.permutation(m)[:s0])
        return [T] * N
    return [np.sort(rng.permutation(m)[:s0]) for _ in range(N)]


def gen_signal(spec: EnsembleSpec, seed: int) -> tuple[np.ndarray, list | None]:
    n, m, N = spec.dims.n, spec.dims.m, spec.dims.N
    sig = spec.signal
    rx = stream(seed, "X")
    if isinstance(sig, DenseSubspace):
        return complex_normal(rx, (m, N), 1.0 / (N * m)), None
    s0 = sig.s0
    joint = isinstance(sig, JointSparse) or (isinstance(sig, FlatSparse) and sig.joint)
    supp = _supports(m, N, s0, joint, stream(seed, "support"))
    X = np.zeros((m, N), dtype=np.complex128)
    if isinstance(sig, FlatSparse):
        signs = stream(seed, "sign").choice([-1.0, 1.0], size=(s0, N))
        for j, T in enumerate(supp):
            X[T, j] = signs[:, j] / math.sqrt(N * s0)
    else:
        vals = complex_normal(rx, (s0, N), 1.0 / (N * s0))
        for j, T in enumerate(supp):
            X[T, j] = vals[:, j]
    return X, supp


def gen_instance(spec: EnsembleSpec) -> tuple[ProblemInstance, GroundTruth]:
    """Draw ``Y = diag(lambda) A X + W`` and its ground truth.

    ``A`` is ``CN(0, 1/n)``; dense ``X`` is ``CN(0, 1/(Nm))``; sparse nonzeros
    are ``CN(0, 1/(N s0))``; ``W`` is ``CN(0, sigma_w^2/(Nn))``.
    """
    n, m, N = spec.dims.n, spec.dims.m, spec.dims.N
    seed = spec.seed
    A = complex_normal(stream(seed, "A"), (n, m), 1.0 / n)
    lam, phi = gen_gains(n, spec.delta, stream(seed, "lambda"))
    X, supp = gen_signal(spec, seed)
    Ys = lam[:, None] * (A @ X)
    if spec.sigma_w > 0:
        W = complex_normal(stream(seed, "W"), (n, N), spec.sigma_w ** 2 / (N * n))
        Y = Ys + W
    else:
        W = np.zeros((n, N), dtype=np.complex128)
        Y = Ys
    gamma = 1.0 / lam
    eta = pack_eta(X, gamma, math.sqrt(n))
    truth = GroundTruth(lam, gamma, X, W, eta.normalized(), phi, supp)
    return ProblemInstance(A, Y), truth


def corrupt_phases(phases, fraction: float, seed: int) -> np.ndarray:
    """Replace a random ``fraction`` of the phases with uniform random ones."""
    phases = np.asarray(phases, dtype=float).copy()
    n = phases.shape[0]
    rng = stream(seed, "phase_noise")
    k = int(round(fraction * n))
    idx = rng.permutation(n)[:k]
    phases[idx] = 2 * np.pi * rng.random(k)
    return phases


@dataclass(frozen=True)
class AssumptionReport:
    delta_actual: float
    theta_actual: float
    omega: float | None
    delta_X: float | None
    fro_norm: float


def assumption_diagnostics(truth: GroundTruth, joint: bool = False, s0: int | None = None) -> AssumptionReport:
    """Measured flatness, conditioning and large-entry quantities of a truth.

    ``theta`` is ``min(||N X^H X - I||, ||m X X^H - I||)``; with ``joint`` the
    second term is restricted to the row support.  ``omega`` / ``delta_X``
    take the ``s0`` largest entries of each column as the large set.
    """
    lam = np.asarray(truth.lam)
    X = np.asarray(truth.X)
    m, N = X.shape
    delta_actual = float(np.max(np.abs(np.abs(lam) ** 2 - 1)))
    t1 = np.linalg.norm(N * (X.conj().T @ X) - np.eye(N), 2)
    if joint:
        rows = np.flatnonzero(np.linalg.norm(X, axis=1) > 0)
        Xr = X[rows]
        t2 = np.linalg.norm(len(rows) * (Xr @ Xr.conj().T) - np.eye(len(rows)), 2) if len(rows) else np.inf
    else:
        t2 = np.linalg.norm(m * (X @ X.conj().T) - np.eye(m), 2)
    theta = float(min(t1, t2))
    omega = delta_X = None
    if s0 is None and truth.support is not None:
        s0 = len(truth.support[0])
    if s0 is not None:
        mags = np.abs(X) ** 2
        col = mags.sum(axis=0)
        srt = -np.sort(-mags, axis=0)
        big = srt[:s0]
        with np.errstate(divide="ignore", invalid="ignore"):
            omega = float(np.min(s0 * big / col))
            delta_X = float(np.max(srt[s0:].sum(axis=0) / col)) if s0 < m else 0.0
    return AssumptionReport(delta_actual, theta, omega, delta_X, float(np.linalg.norm(X)))
