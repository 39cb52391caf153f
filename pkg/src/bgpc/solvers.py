"""Power iteration and truncated power iteration on ``G = beta I - B``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import EtaVector, ProblemInstance, distance
from .operators import CalibrationOperator, resolve_beta
from .projections import PerColumn, project_vector


class DegenerateIterationError(RuntimeError):
    """The iterate collapsed to the zero vector."""


@dataclass(frozen=True)
class SolverConfig:
    """Solver parameters.

    ``alpha=None`` means ``sqrt(n)``.  ``beta`` is ``"estimated"`` (1.01 times
    a power-iteration estimate of ``||B||``), ``"theory"`` (3/2) or a number.
    """

    alpha: float | None = None
    beta: float | str = "estimated"
    max_iters: int = 1000
    tol: float = 1e-9
    sparsity: object | None = None
    trace: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class SolveResult:
    eta: EtaVector
    iterations: int
    converged: bool
    beta: float
    trace: list[float] | None = field(default=None)
    iterates: list[np.ndarray] | None = field(default=None, repr=False)


def build_operator(instance: ProblemInstance, cfg: SolverConfig) -> CalibrationOperator:
    op = CalibrationOperator(instance.A, instance.Y, cfg.alpha)
    return op.with_beta(resolve_beta(op, cfg.beta))


def phase_informed_eta0(phases, dims, alpha: float) -> EtaVector:
    """Zero signal part over ``exp(-i phases)``, normalized.

    The unnormalized gain part equals ``gamma0``, as used to start the
    iteration; ``-gamma/alpha`` scaling is immaterial after normalization.
    """
    phases = np.asarray(phases, dtype=float).reshape(-1)
    if phases.shape[0] != dims.n:
        raise ValueError(f"expected {dims.n} phases, got {phases.shape[0]}")
    if not np.all(np.isfinite(phases)):
        raise ValueError("phases must be finite")
    data = np.zeros(dims.size, dtype=np.complex128)
    data[dims.N * dims.m:] = np.exp(-1j * phases)
    return EtaVector(data / np.linalg.norm(data), dims, alpha)


def baseline_eta0(dims, alpha: float) -> EtaVector:
    """The all-ones start ``[0; 1]`` (normalized)."""
    return phase_informed_eta0(np.zeros(dims.n), dims, alpha)


def _run(op: CalibrationOperator, eta0: EtaVector, cfg: SolverConfig, mode, keep_iterates: bool) -> SolveResult:
    dims = op.dims
    v = np.asarray(eta0.data, dtype=np.complex128)
    nrm0 = np.linalg.norm(v)
    if nrm0 == 0:
        raise ValueError("eta0 must be nonzero")
    if abs(nrm0 - 1.0) > 1e-9:
        raise ValueError(f"eta0 must have unit norm, got {nrm0:.12g}")
    trace = [] if cfg.trace else None
    iterates = [v.copy()] if keep_iterates else None
    converged = False
    t = 0
    for t in range(1, cfg.max_iters + 1):
        w = op.apply_G(v)
        nw = np.linalg.norm(w)
        if nw == 0:
            raise DegenerateIterationError(f"G eta vanished at iteration {t}")
        w /= nw
        if mode is not None:
            w = project_vector(w, dims.m, dims.N, mode, t - 1, cfg.max_iters)
            nw = np.linalg.norm(w)
            if nw == 0:
                raise DegenerateIterationError(f"projection vanished at iteration {t}")
            w /= nw
        if trace is not None:
            trace.append(abs(np.vdot(w, v)))
        if keep_iterates:
            iterates.append(w.copy())
        step = distance(w, v)
        v = w
        if step < cfg.tol:
            converged = True
            break
    eta = EtaVector(v, dims, op.alpha)
    return SolveResult(eta, t, converged, op.beta, trace, iterates)


def power_iteration(instance: ProblemInstance, eta0: EtaVector | None = None, cfg: SolverConfig = SolverConfig(),
                    op: CalibrationOperator | None = None, keep_iterates: bool = False) -> SolveResult:
    """Principal eigenvector of ``G`` (the minor eigenvector of ``B``).

    Iterates ``eta <- G eta / ||G eta||`` until consecutive iterates are
    closer than ``cfg.tol`` in phase-invariant distance, or ``max_iters``.
    A prebuilt ``op`` (with ``beta`` set) skips the norm estimate.
    """
    if cfg.sparsity is not None:
        raise ValueError("power_iteration takes no sparsity mode; use truncated_power_iteration")
    op = op or build_operator(instance, cfg)
    if eta0 is None:
        eta0 = baseline_eta0(op.dims, op.alpha)
    return _run(op, eta0, cfg, None, keep_iterates)


def truncated_power_iteration(instance: ProblemInstance, eta0: EtaVector | None = None, cfg: SolverConfig = None,
                              op: CalibrationOperator | None = None, keep_iterates: bool = False) -> SolveResult:
    """Power iteration with hard truncation of the signal part after each step.

    Each step multiplies by ``G``, normalizes, projects according to
    ``cfg.sparsity`` and normalizes again.
    """
    if cfg is None or cfg.sparsity is None:
        raise ValueError("truncated_power_iteration needs cfg.sparsity")
    if cfg.sparsity.s < 1:
        raise ValueError("sparsity level must be >= 1")
    op = op or build_operator(instance, cfg)
    if eta0 is None:
        eta0 = baseline_eta0(op.dims, op.alpha)
    return _run(op, eta0, cfg, cfg.sparsity, keep_iterates)


def solve(instance: ProblemInstance, eta0: EtaVector | None = None, cfg: SolverConfig = SolverConfig(), **kw) -> SolveResult:
    if cfg.sparsity is None:
        return power_iteration(instance, eta0, cfg, **kw)
    return truncated_power_iteration(instance, eta0, cfg, **kw)


def default_alpha(n: int) -> float:
    return math.sqrt(n)


__all__ = [
    "SolverConfig",
    "SolveResult",
    "DegenerateIterationError",
    "PerColumn",
    "power_iteration",
    "truncated_power_iteration",
    "phase_informed_eta0",
    "baseline_eta0",
    "build_operator",
    "solve",
]
