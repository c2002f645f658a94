"""Small dense kernels for the projected problems (sizes of order m <= ~200)."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = ["RankDeficientError", "OpCounter", "givens", "qr_hessenberg", "svd_small", "lsq_tall"]


class RankDeficientError(np.linalg.LinAlgError):
    """A triangular factor has a negligible diagonal entry."""


@dataclass
class OpCounter:
    """Counts scalar rotation updates (each touches two entries)."""

    count: int = 0


def givens(a, b):
    """Return ``(c, s, r)`` with ``[[c, s], [-s, c]] @ [a, b] = [r, 0]``."""
    if b == 0.0:
        return (1.0, 0.0, a) if a >= 0 else (-1.0, 0.0, -a)
    r = np.hypot(a, b)
    return a / r, b / r, r


def qr_hessenberg(H, counter=None):
    """QR factorization of an upper Hessenberg ``(p, m)`` matrix by Givens rotations.

    Returns ``(Q, U)`` with ``Q`` orthogonal ``(p, p)`` and ``U`` upper
    triangular ``(p, m)``. No pivoting; ``counter`` (an :class:`OpCounter`)
    accumulates the O(m^2) rotation work.
    """
    H = np.array(H, dtype=np.float64)
    p, m = H.shape
    if p < m or np.any(np.tril(H, -2) != 0.0):
        raise ValueError("qr_hessenberg expects an upper Hessenberg matrix with rows >= cols")
    U = H
    Qt = np.eye(p)
    for j in range(min(m, p - 1)):
        c, s, r = givens(U[j, j], U[j + 1, j])
        G = np.array([[c, s], [-s, c]])
        U[j:j + 2, j:] = G @ U[j:j + 2, j:]
        U[j + 1, j] = 0.0
        U[j, j] = r
        Qt[j:j + 2, :] = G @ Qt[j:j + 2, :]
        if counter is not None:
            counter.count += m - j
    return Qt.T, U


def svd_small(M):
    """Full SVD ``M = U @ Sigma @ V.T`` with nonincreasing singular values.

    Returns ``(U, s, V)`` where ``s`` holds the ``min(M.shape)`` singular values.
    """
    U, s, Vt = np.linalg.svd(np.asarray(M, dtype=np.float64), full_matrices=True)
    return U, s, Vt.T


def lsq_tall(A, b, rtol=1e-14):
    """Minimize ``||A y - b||_2`` for a tall full-rank ``A`` via Householder QR."""
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    p, q = A.shape
    if p < q:
        raise ValueError(f"lsq_tall needs rows >= cols, got {A.shape}")
    Q, R = np.linalg.qr(A, mode="reduced")
    scale = np.linalg.norm(A)
    if scale == 0.0 or np.min(np.abs(np.diag(R))) < rtol * scale:
        raise RankDeficientError("least-squares matrix is numerically rank deficient")
    return scipy.linalg.solve_triangular(R, Q.T @ b)
