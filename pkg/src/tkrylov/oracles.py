"""Dense, slow reference computations that share no code path with the solvers.

Everything here materializes full matrices and is meant for desk-scale
checks (a few hundred unknowns).
"""

import mpmath
import numpy as np

from .tensor_core import bcirc, fold, unfold

__all__ = [
    "one_sided_matrix",
    "vec_unfold",
    "unvec_unfold",
    "dense_solve_one_sided",
    "gcv_trace_form",
    "tikhonov_inverse_mu_residual",
    "dft_matrix",
]


def dft_matrix(n):
    """``F_n[j, k] = exp(-2 pi i j k / n)``."""
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n)


def vec_unfold(X):
    """Column-stacked ``unfold(X)``."""
    return unfold(X).reshape(-1, order="F")


def unvec_unfold(x, shape):
    n1, s, n3 = shape
    return fold(np.asarray(x).reshape(n1 * n3, s, order="F"), n3)


def one_sided_matrix(A, s):
    """Matrix of ``X -> A ⋆ X`` on n2×s×n3 tensors in the :func:`vec_unfold` basis."""
    return np.kron(np.eye(s), bcirc(A))


def dense_solve_one_sided(A, C):
    """Solve ``A ⋆ X = C`` through the unfolded block-circulant system."""
    n1, s, n3 = C.shape
    x = np.linalg.solve(one_sided_matrix(A, s), vec_unfold(C))
    return unvec_unfold(x, (A.shape[1], s, n3))


def gcv_trace_form(H_tilde, beta, mu, dps=40):
    """GCV as ``||(I - H Hmu^{-1} H') beta e1||^2 / tr(I - H Hmu^{-1} H')^2``.

    ``Hmu = H'H + mu^2 I``; identities are (m+1)-dimensional. Evaluated
    literally in ``dps``-digit arithmetic since ``I - H Hmu^{-1} H'`` cancels
    badly in double precision when ``mu`` is small.
    """
    H = np.asarray(H_tilde, dtype=float)
    p, m = H.shape
    with mpmath.workdps(dps):
        Hm = mpmath.matrix(H.tolist())
        Hmu = Hm.T * Hm + mpmath.mpf(mu) ** 2 * mpmath.eye(m)
        P = mpmath.eye(p) - Hm * (mpmath.inverse(Hmu) * Hm.T)
        r = P[:, 0] * mpmath.mpf(beta)
        num = sum(r[i] ** 2 for i in range(p))
        tr = sum(P[i, i] for i in range(p))
        return float(num / tr**2)


def tikhonov_inverse_mu_residual(M, c, mu):
    """``||M x - c||^2`` for ``x = argmin ||M x - c||^2 + ||x||^2 / mu``."""
    n = M.shape[1]
    x = np.linalg.solve(M.T @ M + np.eye(n) / mu, M.T @ c)
    return float(np.sum((M @ x - c) ** 2))
