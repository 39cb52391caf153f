"""Hard-thresholding projections on the signal part of the lifted vector.

Ties are broken toward the smaller index; scores are compared as squared
magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EtaVector


@dataclass(frozen=True)
class PerColumn:
    s: int


@dataclass(frozen=True)
class JointRows:
    s: int


@dataclass(frozen=True)
class Hybrid:
    """Per-column truncation early on, joint-row truncation afterwards."""

    s: int
    switch_fraction: float = 0.5

    def __post_init__(self):
        if not 0 < self.switch_fraction < 1:
            raise ValueError("switch_fraction must lie in (0, 1)")


SparsityMode = PerColumn | JointRows | Hybrid


def _check_s(s: int, m: int):
    if not 1 <= s <= m:
        raise ValueError(f"sparsity level s={s} outside [1, {m}]")


def top_indices(scores: np.ndarray, s: int, axis: int = 0) -> np.ndarray:
    """Indices of the ``s`` largest scores along ``axis``, smaller index on ties.

    A stable sort of the negated scores gives exactly this order.
    """
    order = np.argsort(-scores, axis=axis, kind="stable")
    return np.take(order, np.arange(s), axis=axis)


def project_columns(x, s: int) -> np.ndarray:
    """Keep the ``s`` entries of largest modulus in each column of ``x``.

    ``x`` may be a vector or an ``m x N`` matrix (columns handled separately).
    """
    x = np.asarray(x)
    m = x.shape[0]
    _check_s(s, m)
    if s == m:
        return x.copy()
    scores = x.real ** 2 + x.imag ** 2
    keep = top_indices(scores, s, axis=0)
    out = np.zeros_like(x)
    if x.ndim == 1:
        out[keep] = x[keep]
    else:
        cols = np.arange(x.shape[1])[None, :]
        out[keep, cols] = x[keep, cols]
    return out


def project_rows(X, s: int) -> np.ndarray:
    """Keep the ``s`` rows of ``X`` with the largest l2 norms."""
    X = np.asarray(X)
    m = X.shape[0]
    _check_s(s, m)
    if s == m:
        return X.copy()
    scores = np.sum(X.real ** 2 + X.imag ** 2, axis=1)
    keep = top_indices(scores, s)
    out = np.zeros_like(X)
    out[keep] = X[keep]
    return out


def active_mode(mode, t: int, max_iters: int):
    """Resolve a :class:`Hybrid` mode to the concrete projection at iteration ``t``."""
    if isinstance(mode, Hybrid):
        if t < mode.switch_fraction * max_iters:
            return PerColumn(mode.s)
        return JointRows(mode.s)
    return mode


def project_vector(v: np.ndarray, m: int, N: int, mode, t: int = 0, max_iters: int = 1) -> np.ndarray:
    """Array-level projection of a lifted vector; the gain part is copied unchanged."""
    mode = active_mode(mode, t, max_iters)
    X = v[: N * m].reshape((m, N), order="F")
    if isinstance(mode, PerColumn):
        Xp = project_columns(X, mode.s)
    elif isinstance(mode, JointRows):
        Xp = project_rows(X, mode.s)
    else:
        raise TypeError(f"unknown sparsity mode {mode!r}")
    return np.concatenate([Xp.reshape(-1, order="F"), v[N * m:]])


def project_eta(eta: EtaVector, mode, iteration_context: tuple[int, int] = (0, 1)) -> EtaVector:
    t, max_iters = iteration_context
    d = eta.dims
    return eta.with_data(project_vector(eta.data, d.m, d.N, mode, t, max_iters))
