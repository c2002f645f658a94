import numpy as np
import pytest

from tkrylov.krylov import GolubKahanProcess, t_global_arnoldi, t_global_golub_kahan
from tkrylov.oracles import one_sided_matrix
from tkrylov.operators import TensorLinearOperator
from tkrylov.tensor_core import diamond, frob_norm, identity_tensor, inner, stack_combine_matrix


def _random_op(rng, n=8, p=3):
    return TensorLinearOperator(rng.standard_normal((n, n, p)))


def test_arnoldi_identity_breaks_down(rng):
    seed = rng.standard_normal((4, 2, 3))
    dec = t_global_arnoldi(TensorLinearOperator(identity_tensor(4, 3)), seed, 5)
    assert dec.breakdown == 1 and dec.m == 1
    assert dec.H_tilde[0, 0] == pytest.approx(1.0)
    assert dec.H_tilde[1, 0] == 0.0
    np.testing.assert_allclose(dec.V[0], seed / frob_norm(seed))


def test_arnoldi_relations(rng):
    op = _random_op(rng)
    dec = t_global_arnoldi(op, rng.standard_normal((8, 8, 3)), 5)
    MV = np.stack([op.apply(v) for v in dec.V[:5]])
    assert np.abs(diamond(dec.V, dec.V) - np.eye(6)).max() < 1e-10
    assert frob_norm(MV - stack_combine_matrix(dec.V, dec.H_tilde)) < 1e-10
    assert np.abs(diamond(dec.V[:5], MV) - dec.H).max() < 1e-10
    assert np.all(np.tril(dec.H_tilde, -2) == 0)


def test_arnoldi_first_entry(rng):
    op = _random_op(rng)
    dec = t_global_arnoldi(op, rng.standard_normal((8, 2, 3)), 1)
    assert dec.H_tilde[0, 0] == pytest.approx(inner(dec.V[0], op.apply(dec.V[0])), rel=1e-13)


def test_arnoldi_accepts_callable(rng):
    op = _random_op(rng)
    seed = rng.standard_normal((8, 2, 3))
    a = t_global_arnoldi(op, seed, 4)
    b = t_global_arnoldi(op.apply, seed, 4)
    np.testing.assert_array_equal(a.H_tilde, b.H_tilde)


def test_arnoldi_errors(rng):
    op = _random_op(rng)
    with pytest.raises(ValueError):
        t_global_arnoldi(op, np.zeros((8, 2, 3)), 3)
    with pytest.raises(ValueError):
        t_global_arnoldi(op, rng.standard_normal((8, 2, 3)), 0)


def test_golub_kahan_identity(rng):
    dec = t_global_golub_kahan(TensorLinearOperator(identity_tensor(3, 2)), rng.standard_normal((3, 2, 2)), 4)
    assert dec.m == 1
    assert dec.alphas[0] == pytest.approx(1.0)
    assert dec.betas[0] == 0.0
    assert dec.breakdown == 2


def test_golub_kahan_relations(rng):
    op = TensorLinearOperator(rng.standard_normal((8, 6, 3)))
    C = rng.standard_normal((8, 4, 3))
    dec = t_global_golub_kahan(op, C, 7)
    m = dec.m
    np.testing.assert_allclose(dec.V[0], C / frob_norm(C))
    MU = np.stack([op.apply(u) for u in dec.U])
    MtV = np.stack([op.apply_transpose(v) for v in dec.V[:m]])
    assert frob_norm(MU - stack_combine_matrix(dec.V, dec.C_tilde)) < 1e-10
    assert frob_norm(MtV - stack_combine_matrix(dec.U, dec.C.T)) < 1e-10
    assert np.abs(diamond(dec.U, dec.U) - np.eye(m)).max() < 1e-10
    assert np.abs(diamond(dec.V, dec.V) - np.eye(m + 1)).max() < 1e-10
    assert np.all(dec.alphas > 0) and np.all(dec.betas > 0)


def test_golub_kahan_singular_values_full_dimension(rng):
    A = rng.standard_normal((4, 4, 2))
    op = TensorLinearOperator(A)
    dec = t_global_golub_kahan(op, rng.standard_normal((4, 1, 2)), 8)
    ref = np.linalg.svd(one_sided_matrix(A, 1), compute_uv=False)
    got = np.linalg.svd(dec.C_tilde, compute_uv=False)
    assert np.abs(got[: ref.size] - ref).max() < 1e-6


def test_golub_kahan_incremental_matches_batch(rng):
    op = TensorLinearOperator(rng.standard_normal((6, 6, 2)))
    C = rng.standard_normal((6, 2, 2))
    proc = GolubKahanProcess(op, C)
    for _ in range(5):
        proc.step()
    np.testing.assert_array_equal(proc.decomposition().C_tilde, t_global_golub_kahan(op, C, 5).C_tilde)
