"""Dense third-order tensors and the T-product algebra that needs no FFT.

Tensors are plain ``numpy.ndarray`` objects of shape ``(n1, n2, n3)`` and
dtype float64; frontal slice ``k`` is ``A[:, :, k]``. A stack of same-shape
tensors (a Krylov basis) is an array of shape ``(m, n1, n2, n3)`` or any
sequence of tensors that ``numpy.asarray`` can stack.

``bcirc``, ``unfold`` and ``fold`` materialize large matrices and are meant
for oracles and tests; they refuse big inputs unless ``force=True``.
"""

import struct

import numpy as np

__all__ = [
    "SizeGuardError",
    "as_tensor3",
    "unfold",
    "fold",
    "bcirc",
    "t_transpose",
    "inner",
    "frob_norm",
    "identity_tensor",
    "zeros_like",
    "stack_combine",
    "stack_combine_matrix",
    "diamond",
    "block_concat",
    "bcirc_product",
    "save_t3",
    "load_t3",
]

# n1 * n2 * n3**2 above this is refused by the dense oracle helpers
DENSE_GUARD = 10**7

T3_MAGIC = b"T3TN"


class SizeGuardError(ValueError):
    """Raised when a dense oracle helper is asked to build a huge matrix."""


def as_tensor3(A, name="tensor"):
    """Return ``A`` as a float64 array with exactly three axes."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 3:
        raise ValueError(f"{name} must have 3 axes, got shape {A.shape}")
    return A


def _guard(shape, force):
    n1, n2, n3 = shape
    if not force and n1 * n2 * n3 * n3 > DENSE_GUARD:
        raise SizeGuardError(
            f"refusing dense block-circulant work on shape {shape}; pass force=True")


def unfold(A, force=False):
    """Stack the frontal slices vertically into an ``(n1*n3, n2)`` matrix."""
    A = as_tensor3(A)
    _guard(A.shape, force)
    n1, n2, n3 = A.shape
    return np.ascontiguousarray(A.transpose(2, 0, 1)).reshape(n3 * n1, n2)


def fold(M, n3):
    """Inverse of :func:`unfold`: split the rows of ``M`` into ``n3`` slices."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] % n3:
        raise ValueError(f"cannot fold a {M.shape} matrix into {n3} slices")
    n1 = M.shape[0] // n3
    return M.reshape(n3, n1, M.shape[1]).transpose(1, 2, 0).copy()


def bcirc(A, force=False):
    """Block-circulant matrix of size ``(n1*n3, n2*n3)``.

    The first block column is ``[A_1; A_2; ...; A_n3]`` and block ``(i, j)``
    is ``A_{(i - j) mod n3}``.
    """
    A = as_tensor3(A)
    _guard(A.shape, force)
    n1, n2, n3 = A.shape
    out = np.empty((n1 * n3, n2 * n3))
    for i in range(n3):
        for j in range(n3):
            out[i * n1:(i + 1) * n1, j * n2:(j + 1) * n2] = A[:, :, (i - j) % n3]
    return out


def bcirc_product(A, B, force=False):
    """T-product by the definition ``fold(bcirc(A) @ unfold(B))``.

    Slow reference used to check the FFT path.
    """
    A = as_tensor3(A)
    B = as_tensor3(B)
    if A.shape[1] != B.shape[0] or A.shape[2] != B.shape[2]:
        raise ValueError(f"nonconforming shapes {A.shape} and {B.shape}")
    return fold(bcirc(A, force) @ unfold(B, force), A.shape[2])


def t_transpose(A):
    """Transpose every frontal slice and reverse the order of slices 2..n3."""
    A = as_tensor3(A)
    order = [0] + list(range(A.shape[2] - 1, 0, -1))
    return A.transpose(1, 0, 2)[:, :, order].copy()


def inner(A, B):
    """Scalar inner product: the sum of elementwise products."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    return float(np.vdot(A, B))


def frob_norm(A):
    return float(np.linalg.norm(np.asarray(A, dtype=np.float64).ravel()))


def identity_tensor(n, p):
    """Identity for the T-product: first slice ``I_n``, the rest zero."""
    if n < 1 or p < 1:
        raise ValueError("identity_tensor needs n >= 1 and p >= 1")
    out = np.zeros((n, n, p))
    out[:, :, 0] = np.eye(n)
    return out


def zeros_like(A):
    return np.zeros_like(np.asarray(A, dtype=np.float64))


def _as_stack(V):
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 4:
        raise ValueError(f"a tensor stack must have 4 axes, got shape {V.shape}")
    return V


def stack_combine(V, y):
    """The ⊛ product ``sum_j y[j] * V[j]``."""
    V = _as_stack(V)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (V.shape[0],):
        raise ValueError(f"coefficient vector of shape {y.shape} for {V.shape[0]} blocks")
    return np.tensordot(y, V, axes=(0, 0))


def stack_combine_matrix(V, M):
    """Column-wise ⊛: block ``k`` of the result is ``V ⊛ M[:, k]``."""
    V = _as_stack(V)
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != V.shape[0]:
        raise ValueError(f"matrix of shape {M.shape} for {V.shape[0]} blocks")
    return np.tensordot(M, V, axes=(0, 0))


def diamond(A, B):
    """The ◊ product: the matrix of pairwise inner products ``<A_i, B_j>``."""
    A = _as_stack(A)
    B = _as_stack(B)
    if A.shape[1:] != B.shape[1:]:
        raise ValueError(f"block shapes differ: {A.shape[1:]} vs {B.shape[1:]}")
    return A.reshape(A.shape[0], -1) @ B.reshape(B.shape[0], -1).T


def block_concat(parts):
    """Compose ``[[A, B], [C, D]]`` slice by slice into one tensor."""
    (a, b), (c, d) = [[as_tensor3(t) for t in row] for row in parts]
    n3 = a.shape[2]
    if any(t.shape[2] != n3 for t in (b, c, d)):
        raise ValueError("all blocks need the same number of frontal slices")
    if a.shape[0] != b.shape[0] or c.shape[0] != d.shape[0]:
        raise ValueError("blocks in a block row need equal row counts")
    if a.shape[1] != c.shape[1] or b.shape[1] != d.shape[1]:
        raise ValueError("blocks in a block column need equal column counts")
    return np.concatenate(
        [np.concatenate([a, b], axis=1), np.concatenate([c, d], axis=1)], axis=0)


def save_t3(path, A):
    """Write ``A`` in the T3 binary format.

    Layout: ``b"T3TN"``, then n1, n2, n3 as little-endian uint64, then the
    entries as little-endian float64, slice-major and column-major within a
    slice (Fortran order of the ``(n1, n2, n3)`` array).
    """
    A = as_tensor3(A)
    with open(path, "wb") as fh:
        fh.write(T3_MAGIC)
        fh.write(struct.pack("<3Q", *A.shape))
        fh.write(A.astype("<f8").tobytes(order="F"))


def load_t3(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != T3_MAGIC or len(raw) < 28:
        raise ValueError(f"{path}: not a T3 tensor file")
    shape = struct.unpack("<3Q", raw[4:28])
    count = shape[0] * shape[1] * shape[2]
    if len(raw) != 28 + 8 * count:
        raise ValueError(f"{path}: expected {count} entries for shape {shape}")
    data = np.frombuffer(raw, dtype="<f8", offset=28)
    return data.reshape(shape, order="F").astype(np.float64)
