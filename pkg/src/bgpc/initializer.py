"""Support estimation and rank-one spectral initialization for truncated power iteration."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import EtaVector, ProblemInstance, safe_reciprocal
from .projections import top_indices


@dataclass
class InitReport:
    eta0: EtaVector
    supports: list[np.ndarray]
    singular_value: float
    iterations: int = 0


def dstar_e_row_norms(instance: ProblemInstance, alpha: float | None = None) -> np.ndarray:
    """Squared row norms of ``D^H E`` as an ``m x N`` array.

    Row ``(j, l)`` of ``D^H E`` is ``[conj(a_kl) y_kj]_k``, so its squared norm
    is ``sum_k |a_kl|^2 |y_kj|^2``.  ``alpha`` does not enter; it is accepted
    for signature symmetry with the other builders.
    """
    return (np.abs(instance.A) ** 2).T @ (np.abs(instance.Y) ** 2)


def _dstar_e(A, Y, mask, v):
    """``Pi_T D^H E v`` as an ``m x N`` array; ``D^H E v = A^H diag(v) Y``."""
    return mask * (A.conj().T @ (v[:, None] * Y))


def _dstar_e_adj(A, Y, mask, U):
    """``(Pi_T D^H E)^H`` applied to an ``m x N`` array."""
    return np.einsum("kj,kj->k", Y.conj(), A @ (mask * U))


def select_supports(scores: np.ndarray, s1: int, joint: bool = False) -> list[np.ndarray]:
    m, N = scores.shape
    if not 1 <= s1 <= m:
        raise ValueError(f"s1={s1} outside [1, {m}]")
    if joint:
        T = np.sort(top_indices(scores.sum(axis=1), s1))
        return [T] * N
    idx = top_indices(scores, s1, axis=0)
    return [np.sort(idx[:, j]) for j in range(N)]


def initialize(instance: ProblemInstance, s1: int, alpha: float | None = None, joint: bool = False,
               tol: float = 1e-9, max_iters: int = 500) -> InitReport:
    """Spectral initial estimate from the row-restricted ``D^H E``.

    Per snapshot, the ``s1`` rows of largest norm are kept (``joint`` ranks
    rows by their norms summed over snapshots).  The principal singular pair
    ``(u, v)`` of the restricted matrix is found by power iteration on its
    ``Nm``-side Gram operator; ``v`` is taken in the orientation where the
    matrix is ``~ sigma u v^T`` so that it tracks the gains.  The start is
    ``[u; -(1./v)/n]``, normalized.
    """
    n, m, N = instance.dims.n, instance.dims.m, instance.dims.N
    alpha = math.sqrt(n) if alpha is None else float(alpha)
    A, Y = instance.A, instance.Y
    scores = dstar_e_row_norms(instance)
    supports = select_supports(scores, s1, joint)
    mask = np.zeros((m, N))
    for j, T in enumerate(supports):
        mask[T, j] = 1.0
    if not np.any(scores * mask > 0):
        raise ValueError("restricted D^H E is the zero matrix")

    rng = np.random.default_rng(0)
    v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    U = _dstar_e(A, Y, mask, v0)
    nu = np.linalg.norm(U)
    if nu == 0:
        raise ValueError("restricted D^H E annihilated the start vector")
    U /= nu
    it = 0
    for it in range(1, max_iters + 1):
        W = _dstar_e(A, Y, mask, _dstar_e_adj(A, Y, mask, U))
        nw = np.linalg.norm(W)
        if nw == 0:
            raise ValueError("restricted D^H E is numerically zero")
        W /= nw
        inner = np.vdot(W, U)
        step = math.sqrt(max(2.0 - 2.0 * abs(inner), 0.0))
        U = W
        if step < tol:
            break
    vstd = _dstar_e_adj(A, Y, mask, U)
    sigma = float(np.linalg.norm(vstd))
    v = np.conj(vstd) / sigma
    u = U.reshape(-1, order="F")
    tail = -safe_reciprocal(v) / n
    data = np.concatenate([u, tail])
    eta0 = EtaVector(data / np.linalg.norm(data), instance.dims, alpha)
    return InitReport(eta0, supports, sigma, it)
