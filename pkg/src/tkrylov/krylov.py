"""T-global Arnoldi and T-global Golub-Kahan bidiagonalization.

Both work on any operator object exposing ``apply`` (and ``apply_transpose``
for Golub-Kahan); a bare callable is accepted for Arnoldi. Bases are stored
as stacks of shape ``(k, n1, n2, n3)``.

Breakdown is declared when a new normalization constant falls below
``BREAKDOWN_RTOL`` times the largest operator image norm seen so far.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .tensor_core import as_tensor3, frob_norm

__all__ = [
    "BREAKDOWN_RTOL",
    "ArnoldiDecomposition",
    "GolubKahanDecomposition",
    "GolubKahanProcess",
    "t_global_arnoldi",
    "t_global_golub_kahan",
]

log = logging.getLogger(__name__)

BREAKDOWN_RTOL = 1e-13
# second Gram-Schmidt pass when the vector keeps less than this share of its norm
REORTH_RATIO = 0.7


@dataclass
class ArnoldiDecomposition:
    """Result of ``m`` Arnoldi steps.

    ``V`` holds ``m + 1`` blocks; after a breakdown the last block is zero and
    the last row of ``H_tilde`` is zero, so ``M(V_j) = V ⊛ H_tilde[:, j]`` still
    holds column by column.
    """

    V: np.ndarray
    H_tilde: np.ndarray
    beta: float
    m: int
    breakdown: Optional[int] = None

    @property
    def H(self):
        return self.H_tilde[:-1, :]


@dataclass
class GolubKahanDecomposition:
    """Result of ``m`` bidiagonalization steps: ``M(U_m) = V_{m+1} ⊛ C_tilde``."""

    U: np.ndarray
    V: np.ndarray
    C_tilde: np.ndarray
    beta1: float
    m: int
    breakdown: Optional[int] = None

    @property
    def C(self):
        return self.C_tilde[:-1, :]

    @property
    def alphas(self):
        return np.diag(self.C_tilde).copy()

    @property
    def betas(self):
        """``beta_2 .. beta_{m+1}``."""
        return np.diag(self.C_tilde, -1).copy()


def _forward(op):
    return op.apply if hasattr(op, "apply") else op


def _orthogonalize(w, basis, coeffs=None):
    """Modified Gram-Schmidt of flat ``w`` against the rows of ``basis``, in place."""
    for i in range(basis.shape[0]):
        h = float(basis[i] @ w)
        w -= h * basis[i]
        if coeffs is not None:
            coeffs[i] += h
    return w


def t_global_arnoldi(op, seed, m, reorth=True):
    """Run up to ``m`` steps of T-global Arnoldi on ``op`` started at ``seed``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    seed = as_tensor3(seed, "seed")
    shape = seed.shape
    beta = frob_norm(seed)
    if beta == 0.0:
        raise ValueError("Arnoldi seed is the zero tensor")
    fwd = _forward(op)
    V = np.zeros((m + 1, seed.size))
    H = np.zeros((m + 1, m))
    V[0] = seed.ravel() / beta
    scale = 0.0
    for j in range(m):
        w = np.asarray(fwd(V[j].reshape(shape)), dtype=np.float64)
        if w.shape != shape:
            raise ValueError(f"operator maps {shape} to {w.shape}; Arnoldi needs a square map")
        w = w.ravel().copy()
        norm0 = np.linalg.norm(w)
        scale = max(scale, norm0)
        _orthogonalize(w, V[:j + 1], H[:j + 1, j])
        if reorth and np.linalg.norm(w) < REORTH_RATIO * norm0:
            _orthogonalize(w, V[:j + 1], H[:j + 1, j])
        h = np.linalg.norm(w)
        if h <= BREAKDOWN_RTOL * scale:
            k = j + 1
            log.debug("Arnoldi breakdown at step %d (h=%.3e)", k, h)
            V = V[:k + 1]
            V[k] = 0.0
            return ArnoldiDecomposition(
                V.reshape((k + 1,) + shape), H[:k + 1, :k].copy(), beta, k, breakdown=k)
        H[j + 1, j] = h
        V[j + 1] = w / h
    return ArnoldiDecomposition(V.reshape((m + 1,) + shape), H, beta, m)


class GolubKahanProcess:
    """Incremental T-global Golub-Kahan bidiagonalization.

    Starts from ``V_1 = C / ||C||`` and ``U_1 = M^T(V_1) / ||M^T(V_1)||``.
    Each :meth:`step` adds ``U_k, alpha_k`` and then ``V_{k+1}, beta_{k+1}``.
    With ``reorth`` the new blocks are reorthogonalized against all earlier
    ones, which keeps the computed bases orthonormal on ill-posed operators.
    """

    def __init__(self, op, C, reorth=True):
        C = as_tensor3(C, "C")
        self.op = op
        self.shape_v = C.shape
        self.shape_u = None
        self.reorth = reorth
        self.beta1 = frob_norm(C)
        if self.beta1 == 0.0:
            raise ValueError("Golub-Kahan start tensor is the zero tensor")
        # bases live in the leading rows of arrays that grow by doubling
        self._V = np.empty((8, C.size))
        self._V[0] = C.ravel() / self.beta1
        self._nv = 1
        self._U = None
        self._nu = 0
        self.alphas = []
        self.betas = []
        self.breakdown = None
        self._scale = 0.0

    @property
    def m(self):
        return self._nu

    @staticmethod
    def _push(store, count, row):
        if count == store.shape[0]:
            grown = np.empty((2 * count, store.shape[1]))
            grown[:count] = store[:count]
            store = grown
        store[count] = row
        return store

    def _clean(self, w, basis):
        norm0 = np.linalg.norm(w)
        self._scale = max(self._scale, norm0)
        if self.reorth and basis.shape[0]:
            _orthogonalize(w, basis)
            if np.linalg.norm(w) < REORTH_RATIO * norm0:
                _orthogonalize(w, basis)
        return w, np.linalg.norm(w)

    def step(self):
        """Advance one step; returns False once the process has broken down."""
        if self.breakdown is not None:
            return False
        k = self.m + 1
        Vk = self._V[self._nv - 1]
        u = np.asarray(self.op.apply_transpose(Vk.reshape(self.shape_v)), dtype=np.float64)
        if self.shape_u is None:
            self.shape_u = u.shape
            self._U = np.empty((8, u.size))
        u = u.ravel().copy()
        if self._nu:
            u -= self.betas[-1] * self._U[self._nu - 1]
        u, alpha = self._clean(u, self._U[: self._nu])
        if alpha <= BREAKDOWN_RTOL * self._scale:
            self.breakdown = k
            log.debug("Golub-Kahan breakdown: alpha_%d = %.3e", k, alpha)
            return False
        self._U = self._push(self._U, self._nu, u / alpha)
        self._nu += 1
        self.alphas.append(alpha)
        v = np.asarray(self.op.apply(self._U[self._nu - 1].reshape(self.shape_u)), dtype=np.float64)
        v = v.ravel() - alpha * Vk
        v, beta = self._clean(v, self._V[: self._nv])
        if beta <= BREAKDOWN_RTOL * self._scale:
            self.breakdown = k + 1
            log.debug("Golub-Kahan breakdown: beta_%d = %.3e", k + 1, beta)
            self.betas.append(0.0)
            self._V = self._push(self._V, self._nv, np.zeros_like(Vk))
            self._nv += 1
            return True
        self.betas.append(beta)
        self._V = self._push(self._V, self._nv, v / beta)
        self._nv += 1
        return True

    def bidiagonal(self):
        """The (m+1)×m lower bidiagonal ``C_tilde`` after the completed steps."""
        m = self.m
        Ct = np.zeros((m + 1, m))
        Ct[np.arange(m), np.arange(m)] = self.alphas[:m]
        Ct[np.arange(1, m + 1), np.arange(m)] = self.betas[:m]
        return Ct

    def decomposition(self):
        m = self.m
        if m == 0:
            raise RuntimeError("no Golub-Kahan step has completed")
        U = self._U[:m].reshape((m,) + self.shape_u).copy()
        V = self._V[:m + 1].reshape((m + 1,) + self.shape_v).copy()
        return GolubKahanDecomposition(U, V, self.bidiagonal(), self.beta1, m, self.breakdown)


def t_global_golub_kahan(op, C, m, reorth=True):
    """Run up to ``m`` Golub-Kahan steps started from ``C``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    proc = GolubKahanProcess(op, C, reorth=reorth)
    while proc.m < m and proc.step():
        if proc.breakdown is not None:
            break
    return proc.decomposition()
