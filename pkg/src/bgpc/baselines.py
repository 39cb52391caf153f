"""Competing solvers: constrained least squares and ADMM for l1 / l2,1 minimization."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .core import ProblemInstance


class RankDeficientWarning(UserWarning):
    pass


class AdmmDivergenceError(RuntimeError):
    pass


@dataclass
class BaselineResult:
    gamma: np.ndarray
    X: np.ndarray
    iterations: int = 0
    converged: bool = True
    rank_deficient: bool = False


def least_squares(instance: ProblemInstance) -> BaselineResult:
    """Minimize ``||diag(gamma) Y - A X||_F`` subject to ``gamma_1 = 1``.

    ``X`` is eliminated through the orthogonal complement of ``range(A)``:
    the residual becomes ``sum_j P diag(y_j) gamma`` with ``P = I - Q Q^H``,
    a linear least-squares problem in ``gamma_2..gamma_n`` solved by
    ``lstsq``.  ``X`` is then ``A^+ diag(gamma) Y``.
    """
    A, Y = instance.A, instance.Y
    n, m, N = instance.dims.n, instance.dims.m, instance.dims.N
    if n <= m:
        raise ValueError(f"least squares needs n > m (got n={n}, m={m})")
    Q, R = np.linalg.qr(A)
    rank_a = int(np.sum(np.abs(np.diag(R)) > 1e-12 * max(1.0, np.abs(R).max())))
    # K stacks P diag(y_j) for each snapshot: (N n) x n
    blocks = []
    for j in range(N):
        Dj = np.diag(Y[:, j])
        blocks.append(Dj - Q @ (Q.conj().T @ Dj))
    K = np.vstack(blocks)
    sol, _, rank, _ = np.linalg.lstsq(K[:, 1:], -K[:, 0], rcond=None)
    deficient = rank < n - 1 or rank_a < m
    if deficient:
        warnings.warn("least-squares system is rank deficient; returning minimum-norm solution",
                      RankDeficientWarning, stacklevel=2)
    gamma = np.concatenate([[1.0 + 0j], sol])
    X, *_ = np.linalg.lstsq(A, gamma[:, None] * Y, rcond=None)
    return BaselineResult(gamma, X, rank_deficient=deficient)


@dataclass(frozen=True)
class AdmmConfig:
    rho: float = 1.0
    max_iters: int = 2000
    eps_primal: float = 1e-7
    eps_dual: float = 1e-7

    def __post_init__(self):
        for k in ("rho", "max_iters", "eps_primal", "eps_dual"):
            if not getattr(self, k) > 0:
                raise ValueError(f"{k} must be positive")


def soft_threshold(X: np.ndarray, t: float) -> np.ndarray:
    """Complex soft thresholding: shrink moduli by ``t``, keep phases."""
    mag = np.abs(X)
    scale = np.maximum(1.0 - t / np.where(mag > 0, mag, 1.0), 0.0)
    return X * np.where(mag > 0, scale, 0.0)


def group_soft_threshold(X: np.ndarray, t: float) -> np.ndarray:
    """Row-wise group shrinkage; rows with l2 norm at most ``t`` become zero."""
    nrm = np.linalg.norm(X, axis=1, keepdims=True)
    scale = np.maximum(1.0 - t / np.where(nrm > 0, nrm, 1.0), 0.0)
    return X * np.where(nrm > 0, scale, 0.0)


class AffineProjector:
    """Euclidean projection onto ``{(X, gamma): A X = diag(gamma) Y, c^H gamma = n}``.

    Requires ``A A^H`` invertible (``m >= n``, full row rank).  For fixed
    ``gamma`` the closest ``X`` is ``P - A^H K (A P - diag(gamma) Y)`` with
    ``K = (A A^H)^{-1}``; substituting leaves an ``n x n`` Hermitian system
    ``H gamma = r + mu c`` with ``H = I + K o (conj(Y) Y^T)``.
    """

    def __init__(self, A: np.ndarray, Y: np.ndarray, c: np.ndarray):
        n = A.shape[0]
        self.A, self.Y, self.c = A, Y, c
        self.n = n
        gram = A @ A.conj().T
        try:
            cf = sla.cho_factor(gram)
        except np.linalg.LinAlgError:
            raise ValueError("A A^H is singular; the l1 baseline needs A with full row rank") from None
        self.K = sla.cho_solve(cf, np.eye(n, dtype=np.complex128))
        self.KA = self.K @ A
        self.AHK = self.KA.conj().T
        self.Yc = Y.conj()
        H = np.eye(n) + self.K * (self.Yc @ Y.T)
        self.Hf = sla.cho_factor(H)
        self.Hc = sla.cho_solve(self.Hf, c)
        self.cHc = float(np.vdot(c, self.Hc).real)

    def __call__(self, P: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        AP = self.A @ P
        r = q + np.einsum("kj,kj->k", self.Yc, self.K @ AP)
        Hr = sla.cho_solve(self.Hf, r)
        mu = (self.n - np.vdot(self.c, Hr)) / self.cHc
        gamma = Hr + mu * self.Hc
        X = P - self.AHK @ (AP - gamma[:, None] * self.Y)
        return X, gamma


def _admm(instance: ProblemInstance, gamma0, cfg: AdmmConfig, prox) -> BaselineResult:
    A, Y = instance.A, instance.Y
    n, m, N = instance.dims.n, instance.dims.m, instance.dims.N
    c = np.asarray(gamma0, dtype=np.complex128).reshape(-1)
    if c.shape[0] != n:
        raise ValueError(f"gamma0 has length {c.shape[0]}, expected {n}")
    if not np.any(c != 0):
        raise ValueError("gamma0 must be nonzero")
    proj = AffineProjector(A, Y, c)
    # scaled ADMM: u in the affine set, z carries the penalty, w is the scaled dual
    zX = np.zeros((m, N), dtype=np.complex128)
    zg = c * (n / np.vdot(c, c).real)
    wX = np.zeros_like(zX)
    wg = np.zeros_like(zg)
    t = 1.0 / cfg.rho
    converged = False
    k = 0
    uX, ug = proj(zX, zg)
    for k in range(1, cfg.max_iters + 1):
        uX, ug = proj(zX - wX, zg - wg)
        zX_old = zX
        zX = prox(uX + wX, t)
        zg = ug + wg
        wX += uX - zX
        wg += ug - zg
        r_pri = np.sqrt(np.linalg.norm(uX - zX) ** 2 + np.linalg.norm(ug - zg) ** 2)
        r_dual = cfg.rho * np.linalg.norm(zX - zX_old)
        if not np.isfinite(r_pri) or r_pri > 1e6:
            raise AdmmDivergenceError(f"primal residual {r_pri:.3g} at iteration {k}")
        scale_p = max(np.linalg.norm(uX), np.linalg.norm(zX), 1e-300)
        scale_d = max(cfg.rho * np.linalg.norm(wX), 1e-300)
        if r_pri <= cfg.eps_primal * scale_p and r_dual <= cfg.eps_dual * scale_d:
            converged = True
            break
    return BaselineResult(ug, uX, k, converged)


def l1_admm(instance: ProblemInstance, gamma0, cfg: AdmmConfig = AdmmConfig()) -> BaselineResult:
    """ADMM for ``min ||vec(X)||_1`` s.t. ``diag(gamma) Y = A X``, ``gamma0^H gamma = n``.

    The returned pair is the affine-projected iterate, so it satisfies the
    constraints to machine precision regardless of convergence.
    """
    return _admm(instance, gamma0, cfg, soft_threshold)


def l21_admm(instance: ProblemInstance, gamma0, cfg: AdmmConfig = AdmmConfig()) -> BaselineResult:
    """As :func:`l1_admm` with the row-wise mixed norm ``||X||_{2,1}``."""
    return _admm(instance, gamma0, cfg, group_soft_threshold)


def l1_objective(X) -> float:
    return float(np.sum(np.abs(X)))


def l21_objective(X) -> float:
    return float(np.sum(np.linalg.norm(X, axis=1)))
