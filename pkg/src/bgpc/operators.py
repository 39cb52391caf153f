"""Matrix-free calibration operators.

With ``x = vec(X)`` and ``eta = [x; g]`` the linearized measurement
residual is ``[D, alpha E] eta``; for sensor ``k`` its block is
``X^T a_k + alpha g_k y_k``.  Arranged as an ``n x N`` matrix this is
``M = A X + alpha diag(g) Y``, so

    B eta = [vec(A^H M); alpha * sum_j conj(Y) * M]

costs ``O(mnN)`` and never forms ``D`` or ``E``.
"""

from __future__ import annotations

import math

import numpy as np

from .core import Dims, EtaVector, ProblemInstance, as_cmatrix

DENSE_CAP = 5000
BETA_SAFETY = 1.01
THEORY_BETA = 1.5


def _data(eta, dims: Dims) -> np.ndarray:
    data = eta.data if isinstance(eta, EtaVector) else np.asarray(eta, dtype=np.complex128).reshape(-1)
    if data.shape[0] != dims.size:
        raise ValueError(f"eta has length {data.shape[0]}, operator expects {dims.size}")
    return data


class CalibrationOperator:
    """``B`` and ``G = beta I - B`` for fixed ``(A, Y, alpha, beta)``.

    ``beta`` may be ``None`` while estimating it; :meth:`apply_G` then refuses.
    """

    def __init__(self, A, Y, alpha: float | None = None, beta: float | None = None):
        inst = ProblemInstance(A, Y)
        self.A = inst.A
        self.Y = inst.Y
        self.dims = inst.dims
        self.alpha = math.sqrt(self.dims.n) if alpha is None else float(alpha)
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if beta is not None and not beta > 0:
            raise ValueError("beta must be positive")
        self.beta = None if beta is None else float(beta)
        self._AH = self.A.conj().T
        self._Yc = self.Y.conj()

    @classmethod
    def from_instance(cls, inst: ProblemInstance, alpha=None, beta=None):
        return cls(inst.A, inst.Y, alpha, beta)

    def with_beta(self, beta: float) -> "CalibrationOperator":
        return CalibrationOperator(self.A, self.Y, self.alpha, beta)

    def _check_eta(self, eta):
        if isinstance(eta, EtaVector):
            if eta.dims != self.dims:
                raise ValueError(f"eta dims {eta.dims} do not match operator dims {self.dims}")
            if not math.isclose(eta.alpha, self.alpha, rel_tol=1e-12):
                raise ValueError(f"eta alpha {eta.alpha} does not match operator alpha {self.alpha}")

    def residual(self, v: np.ndarray) -> np.ndarray:
        """``[D, alpha E] v`` arranged as an ``n x N`` matrix."""
        n, m, N = self.dims.n, self.dims.m, self.dims.N
        X = v[: N * m].reshape((m, N), order="F")
        g = v[N * m:]
        return self.A @ X + (self.alpha * g)[:, None] * self.Y

    def adjoint(self, M: np.ndarray) -> np.ndarray:
        """``[D, alpha E]^H`` applied to an ``n x N`` residual."""
        top = (self._AH @ M).reshape(-1, order="F")
        bottom = self.alpha * np.einsum("kj,kj->k", self._Yc, M)
        return np.concatenate([top, bottom])

    def apply_B(self, eta) -> np.ndarray:
        self._check_eta(eta)
        v = _data(eta, self.dims)
        return self.adjoint(self.residual(v))

    def apply_G(self, eta) -> np.ndarray:
        if self.beta is None:
            raise ValueError("beta is not set on this operator")
        self._check_eta(eta)
        v = _data(eta, self.dims)
        return self.beta * v - self.adjoint(self.residual(v))

    def dense_blocks(self, cap: int = DENSE_CAP) -> tuple[np.ndarray, np.ndarray]:
        """Explicit ``D`` (``Nn x Nm``) and ``E`` (``Nn x n``), rows grouped by sensor."""
        n, m, N = self.dims.n, self.dims.m, self.dims.N
        if self.dims.size > cap:
            raise ValueError(f"dense size {self.dims.size} exceeds cap {cap}")
        I_N = np.eye(N)
        D = np.vstack([np.kron(I_N, self.A[k][None, :]) for k in range(n)])
        E = np.zeros((N * n, n), dtype=np.complex128)
        for k in range(n):
            E[k * N:(k + 1) * N, k] = self.Y[k]
        return D, E

    def dense_B(self, cap: int = DENSE_CAP) -> np.ndarray:
        D, E = self.dense_blocks(cap)
        F = np.hstack([D, self.alpha * E])
        return F.conj().T @ F

    def dense_G(self, cap: int = DENSE_CAP) -> np.ndarray:
        if self.beta is None:
            raise ValueError("beta is not set on this operator")
        return self.beta * np.eye(self.dims.size) - self.dense_B(cap)


def apply_B(op: CalibrationOperator, eta) -> np.ndarray:
    return op.apply_B(eta)


def apply_G(op: CalibrationOperator, eta) -> np.ndarray:
    return op.apply_G(eta)


def dense_B(op: CalibrationOperator, cap: int = DENSE_CAP) -> np.ndarray:
    return op.dense_B(cap)


def estimate_beta(op: CalibrationOperator, iters: int = 60, tol: float = 1e-6, seed: int = 0) -> float:
    """Rayleigh-quotient estimate of ``||B||`` by power iteration on ``B``.

    The start vector is a fixed-seed complex Gaussian, so the estimate is
    deterministic.  It never exceeds the true norm; callers add a margin.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.default_rng(seed)
    size = op.dims.size
    v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = op.apply_B(v)
        new = float(np.vdot(v, w).real)
        nw = np.linalg.norm(w)
        if nw == 0:
            return est
        v = w / nw
        if est > 0 and abs(new - est) <= tol * new:
            est = new
            break
        est = new
    return est


def resolve_beta(op: CalibrationOperator, beta="estimated") -> float:
    """Turn a beta setting (``"estimated"``, ``"theory"`` or a number) into a value."""
    if beta == "estimated" or beta is None:
        est = estimate_beta(op)
        if est <= 0:
            raise ValueError("B is the zero operator; cannot choose beta")
        return BETA_SAFETY * est
    if beta == "theory":
        return THEORY_BETA
    beta = float(beta)
    if not beta > 0:
        raise ValueError("beta must be positive")
    return beta


def expected_Bs(lam, X, alpha: float | None = None) -> np.ndarray:
    """Closed-form expectation of the noiseless ``B`` over Gaussian ``A``.

    Valid for ``||X||_F = 1`` and ``alpha = sqrt(n)``::

        [[I_Nm,                 x lam^T / sqrt(n)],
         [conj(lam) x^H / sqrt(n), diag(|lam|^2)  ]]
    """
    lam = np.asarray(lam, dtype=np.complex128).reshape(-1)
    X = as_cmatrix(X, "X")
    n = lam.shape[0]
    if alpha is not None and not math.isclose(alpha, math.sqrt(n), rel_tol=1e-12):
        raise ValueError("the closed form holds only for alpha = sqrt(n)")
    fro = np.linalg.norm(X)
    if abs(fro - 1.0) > 1e-9:
        raise ValueError(f"X must have unit Frobenius norm, got {fro:.12g}")
    x = X.reshape(-1, order="F")
    Nm = x.shape[0]
    off = np.outer(x, lam) / math.sqrt(n)
    top = np.hstack([np.eye(Nm, dtype=np.complex128), off])
    bottom = np.hstack([off.conj().T, np.diag(np.abs(lam) ** 2).astype(np.complex128)])
    return np.vstack([top, bottom])
