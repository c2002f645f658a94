"""Mode-3 DFT and the FFT-based T-product.

The DFT follows ``F_n[j, k] = w**(j*k)`` with ``w = exp(-2*pi*1j/n)``, which
is numpy's forward FFT convention. For a real tensor the transformed slices
obey ``S[:, :, i] = conj(S[:, :, n3 - i])`` (0-based), so only the first
``n3 // 2 + 1`` slice products are formed and the rest are conjugates.
"""

import numpy as np

from .tensor_core import as_tensor3

__all__ = ["dft_mode3", "idft_mode3", "t_product", "t_product_spectral_cached", "half_count", "spectral_product"]


def dft_mode3(A):
    """Apply the DFT to every mode-3 tube; returns a complex array."""
    return np.fft.fft(np.asarray(A, dtype=np.float64), axis=2)


def idft_mode3(S, real=True):
    """Inverse of :func:`dft_mode3`.

    With ``real=True`` the (roundoff-level) imaginary part is dropped.
    """
    out = np.fft.ifft(S, axis=2)
    return out.real.copy() if real else out


def half_count(n3):
    """Number of slices computed directly: ``ceil((n3 + 1) / 2)``.

    For even n3 this includes the self-conjugate Nyquist slice. Slice ``i``
    beyond it (1-based) is ``conj`` of slice ``n3 - i + 2``.
    """
    return n3 // 2 + 1


def spectral_product(A_hat, B_hat):
    n3 = A_hat.shape[2]
    h = half_count(n3)
    # slice-batched matmul over the first h frequencies; contiguous operands let BLAS do the work
    head = np.matmul(np.ascontiguousarray(A_hat[:, :, :h].transpose(2, 0, 1)),
                     np.ascontiguousarray(B_hat[:, :, :h].transpose(2, 0, 1)))
    C_hat = np.empty((A_hat.shape[0], B_hat.shape[1], n3), dtype=np.complex128)
    C_hat[:, :, :h] = head.transpose(1, 2, 0)
    for i in range(h, n3):
        C_hat[:, :, i] = np.conj(C_hat[:, :, n3 - i])
    return C_hat


def _check(shape_a, shape_b):
    if shape_a[1] != shape_b[0] or shape_a[2] != shape_b[2]:
        raise ValueError(f"nonconforming shapes {shape_a} and {shape_b}")


def t_product(A, B):
    """T-product ``A ⋆ B`` of an n1×n2×n3 and an n2×m×n3 tensor."""
    A = as_tensor3(A, "A")
    B = as_tensor3(B, "B")
    _check(A.shape, B.shape)
    return idft_mode3(spectral_product(dft_mode3(A), dft_mode3(B)))


def t_product_spectral_cached(A_hat, B):
    """T-product with the left factor already transformed by :func:`dft_mode3`."""
    B = as_tensor3(B, "B")
    _check(A_hat.shape, B.shape)
    return idft_mode3(spectral_product(A_hat, dft_mode3(B)))
