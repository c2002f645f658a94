"""Linear tensor operators ``X -> A ⋆ X`` and ``X -> A ⋆ X ⋆ B``, and the blur models.

The cross-channel model blurs each channel with ``A2 @ X_k @ A1.T`` and mixes
channels with a 3×3 circulant matrix. In the stacked-vector picture this is
``kron(Acolor, A1, A2)`` applied to ``[vec(X_1); vec(X_2); vec(X_3)]`` where
``vec`` stacks columns, so ``A2`` blurs along columns and ``A1`` along rows.
"""

from dataclasses import dataclass, field

import numpy as np

from .tensor_core import SizeGuardError, as_tensor3, t_transpose
from .tproduct_fft import dft_mode3, idft_mode3, spectral_product

__all__ = [
    "TensorLinearOperator",
    "BlurModel",
    "gaussian_band_matrix",
    "circulant3",
    "build_cross_channel_blur",
    "build_within_channel_video_blur",
    "kron_oracle_apply",
    "apply",
    "apply_transpose",
]


class TensorLinearOperator:
    """``M(X) = A ⋆ X`` (one-sided) or ``M(X) = A ⋆ X ⋆ B`` (two-sided).

    Spectral forms of ``A`` and ``B`` (and of their T-transposes, which are
    elementwise conjugates in the Fourier domain) are computed once.
    """

    def __init__(self, A, B=None):
        self.A = as_tensor3(A, "A").copy()
        self.B = None if B is None else as_tensor3(B, "B").copy()
        if self.B is not None:
            if self.B.shape[2] != self.A.shape[2]:
                raise ValueError("A and B need the same number of frontal slices")
            self.B.setflags(write=False)
        self.A.setflags(write=False)
        self._A_hat = dft_mode3(self.A)
        self._At_hat = dft_mode3(t_transpose(self.A))
        if self.B is not None:
            self._B_hat = dft_mode3(self.B)
            self._Bt_hat = dft_mode3(t_transpose(self.B))

    @property
    def kind(self):
        return "one-sided" if self.B is None else "two-sided"

    @property
    def n3(self):
        return self.A.shape[2]

    def domain_shape(self, s=None):
        """Shape of admissible ``X``; ``s`` is the free width for one-sided operators."""
        if self.B is None:
            return (self.A.shape[1], s, self.n3)
        return (self.A.shape[1], self.B.shape[0], self.n3)

    def codomain_shape(self, s=None):
        if self.B is None:
            return (self.A.shape[0], s, self.n3)
        return (self.A.shape[0], self.B.shape[1], self.n3)

    def _check(self, X, rows, cols):
        X = as_tensor3(X, "X")
        ok = X.shape[0] == rows and X.shape[2] == self.n3 and (cols is None or X.shape[1] == cols)
        if not ok:
            raise ValueError(f"operator cannot act on a tensor of shape {X.shape}")
        return X

    def apply(self, X):
        cols = None if self.B is None else self.B.shape[0]
        X = self._check(X, self.A.shape[1], cols)
        Y_hat = spectral_product(self._A_hat, dft_mode3(X))
        if self.B is not None:
            Y_hat = spectral_product(Y_hat, self._B_hat)
        return idft_mode3(Y_hat)

    def apply_transpose(self, Y):
        cols = None if self.B is None else self.B.shape[1]
        Y = self._check(Y, self.A.shape[0], cols)
        X_hat = spectral_product(self._At_hat, dft_mode3(Y))
        if self.B is not None:
            X_hat = spectral_product(X_hat, self._Bt_hat)
        return idft_mode3(X_hat)

    __call__ = apply

    def __repr__(self):
        b = "" if self.B is None else f", B{self.B.shape}"
        return f"TensorLinearOperator(A{self.A.shape}{b})"


def apply(op, X):
    return op.apply(X)


def apply_transpose(op, Y):
    return op.apply_transpose(Y)


def gaussian_band_matrix(n, sigma, r):
    """Symmetric Toeplitz band with ``exp(-(k-l)**2 / (2 sigma**2)) / (sigma sqrt(2 pi))``.

    Entries with ``|k - l| > r`` are zero. Rows are deliberately not normalized.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if not 0 <= r < n:
        raise ValueError("band radius must satisfy 0 <= r < n")
    d = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    vals = np.exp(-d.astype(float) ** 2 / (2.0 * sigma**2)) / (sigma * np.sqrt(2.0 * np.pi))
    vals[d > r] = 0.0
    return vals


def circulant3(alpha, beta, gamma):
    """The cross-channel matrix ``[[a, g, b], [b, a, g], [g, b, a]]``."""
    return np.array([[alpha, gamma, beta], [beta, alpha, gamma], [gamma, beta, alpha]], dtype=float)


@dataclass
class BlurModel:
    """Gaussian within-channel blur plus circulant cross-channel mixing."""

    n: int
    sigma: float
    r: int
    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 0.0
    A1: np.ndarray = field(init=False, repr=False)
    A2: np.ndarray = field(init=False, repr=False)
    Acolor: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.A1 = gaussian_band_matrix(self.n, self.sigma, self.r)
        self.A2 = gaussian_band_matrix(self.n, self.sigma, self.r)
        self.Acolor = circulant3(self.alpha, self.beta, self.gamma)
        if abs(self.alpha + self.beta + self.gamma - 1.0) > 1e-12:
            raise ValueError("cross-channel rows must sum to one")


def _is_circulant3(M):
    M = np.asarray(M, dtype=float)
    return M.shape == (3, 3) and np.array_equal(M, circulant3(M[0, 0], M[1, 0], M[2, 0]))


def build_cross_channel_blur(model):
    """Two-sided operator on n×n×3 tensors reproducing ``kron(Acolor, A1, A2)``."""
    if not _is_circulant3(model.Acolor):
        raise ValueError("cross-channel matrix is not circulant")
    a, b, g = model.Acolor[0, 0], model.Acolor[1, 0], model.Acolor[2, 0]
    A = np.stack([a * model.A2, b * model.A2, g * model.A2], axis=2)
    B = np.zeros((model.n, model.n, 3))
    B[:, :, 0] = model.A1.T
    return TensorLinearOperator(A, B)


def build_within_channel_video_blur(n, frames, sigma, r):
    """Two-sided operator on n×n×(3 frames) tensors blurring every slice alike."""
    if frames < 1:
        raise ValueError("frames must be positive")
    A1 = gaussian_band_matrix(n, sigma, r)
    A2 = gaussian_band_matrix(n, sigma, r)
    p = 3 * frames
    A = np.zeros((n, n, p))
    B = np.zeros((n, n, p))
    A[:, :, 0] = A2
    B[:, :, 0] = A1.T
    return TensorLinearOperator(A, B)


def stacked_vec(X):
    """``[vec(X_1); vec(X_2); ...]`` with column-stacking ``vec``."""
    X = as_tensor3(X)
    return X.reshape(-1, order="F")


def unstack_vec(x, shape):
    return np.asarray(x, dtype=float).reshape(shape, order="F")


def kron_oracle_apply(model, X, max_n=32):
    """Apply the explicit ``kron(Acolor, A1, A2)`` matrix; desk scale only."""
    if model.n > max_n:
        raise SizeGuardError(f"Kronecker oracle limited to n <= {max_n}")
    X = as_tensor3(X)
    if X.shape != (model.n, model.n, 3):
        raise ValueError(f"expected a {model.n}x{model.n}x3 tensor, got {X.shape}")
    K = np.kron(model.Acolor, np.kron(model.A1, model.A2))
    return unstack_vec(K @ stacked_vec(X), X.shape)
