import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tkrylov import oracles
from tkrylov.krylov import t_global_golub_kahan
from tkrylov.operators import TensorLinearOperator
from tkrylov.regularization import (
    GcvContext,
    NoRegularizationNeeded,
    QuadratureContext,
    discrepancy_accept,
    gauss_radau_rule,
    gauss_rule,
    gauss_rule_derivative,
    gcv_minimize,
    gcv_value,
    newton_discrepancy,
    solve_ggkb_tikhonov_projected,
    solve_projected_tikhonov,
)


def _bidiag(rng, m):
    Ct = np.zeros((m + 1, m))
    Ct[np.arange(m), np.arange(m)] = rng.uniform(0.1, 2.0, m)
    Ct[np.arange(1, m + 1), np.arange(m)] = rng.uniform(0.1, 2.0, m)
    return Ct


def test_gcv_toy_value():
    ctx = GcvContext(sigma=np.array([1.0]), g_tilde=np.array([1.0, 0.0]))
    assert gcv_value(ctx, 1.0) == pytest.approx(1.0)


def test_gcv_large_mu_limit(rng):
    H = np.triu(rng.standard_normal((5, 4)), -1)
    ctx = GcvContext.from_hessenberg(H, 1.3)
    limit = np.sum(ctx.g_tilde**2) / ctx.m**2
    assert gcv_value(ctx, 1e8) == pytest.approx(limit, rel=1e-6)


def test_gcv_svd_form_matches_trace_form(rng):
    for m in (1, 3, 8):
        H = np.triu(rng.standard_normal((m + 1, m)), -1)
        ctx = GcvContext.from_hessenberg(H, 0.7)
        for mu in (1e-2, 0.5, 3.0):
            ref = oracles.gcv_trace_form(H, 0.7, mu)
            assert gcv_value(ctx, mu) == pytest.approx(ref, rel=1e-9)


def test_gcv_minimize_noiseless():
    # data entirely along a large singular value: the scan bottoms out at the grid start
    ctx = GcvContext(sigma=np.array([10.0, 1.0, 0.0]), g_tilde=np.array([1.0, 0.0, 0.0]))
    assert gcv_minimize(ctx) <= 1e-10


def test_gcv_minimize_interior(rng):
    H = np.triu(rng.standard_normal((9, 8)), -1)
    H[np.arange(8), np.arange(8)] *= np.logspace(0, -6, 8)
    ctx = GcvContext.from_hessenberg(H, 1.0)
    mu = gcv_minimize(ctx)
    grid = np.logspace(-12, 2, 2000) * ctx.sigma[0]
    assert gcv_value(ctx, mu) <= min(gcv_value(ctx, g) for g in grid) * (1 + 1e-6)


def test_projected_tikhonov(rng):
    H = np.triu(rng.standard_normal((4, 4)), -1) + 3 * np.eye(4)
    rhs = np.array([2.0, 0, 0, 0])
    np.testing.assert_allclose(solve_projected_tikhonov(H, 2.0, 0.0), np.linalg.solve(H, rhs), atol=1e-12)
    assert np.linalg.norm(solve_projected_tikhonov(H, 1.0, 1e8)) < 1e-6
    H = np.triu(rng.standard_normal((5, 4)), -1)
    b = np.zeros(5)
    b[0] = 1.5
    mu = 0.3
    ref = np.linalg.solve(H.T @ H + mu**2 * np.eye(4), H.T @ b)
    assert np.abs(solve_projected_tikhonov(H, 1.5, mu) - ref).max() < 1e-9


def test_rules_at_zero(rng):
    ctx = QuadratureContext(_bidiag(rng, 4), 1.7, 0.1)
    assert gauss_rule(ctx, 0.0) == pytest.approx(1.7**2)
    assert gauss_radau_rule(ctx, 0.0) == pytest.approx(1.7**2)


def test_gauss_scalar():
    ctx = QuadratureContext(np.array([[2.0], [0.5]]), 3.0, 0.1)
    mu = 0.7
    assert gauss_rule(ctx, mu) == pytest.approx(9.0 / (mu * 4.0 + 1) ** 2)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**31 - 1), st.floats(-4, 3))
def test_gauss_below_radau_and_decreasing(m, seed, logmu):
    rng = np.random.default_rng(seed)
    ctx = QuadratureContext(_bidiag(rng, m), 1.0, 0.1)
    mu = 10.0**logmu
    assert gauss_rule(ctx, mu) <= gauss_radau_rule(ctx, mu) * (1 + 1e-12)
    assert gauss_rule_derivative(ctx, mu) < 0


def test_bracketing_dense(rng):
    A = rng.standard_normal((6, 6, 2))
    C = rng.standard_normal((6, 2, 2))
    Mdense, c = oracles.one_sided_matrix(A, 2), oracles.vec_unfold(C)
    dec = t_global_golub_kahan(TensorLinearOperator(A), C, 3)
    ctx = QuadratureContext(dec.C_tilde, dec.beta1, 0.1)
    for mu in np.logspace(-4, 2, 25):
        phi = oracles.tikhonov_inverse_mu_residual(Mdense, c, mu)
        assert gauss_rule(ctx, mu) <= phi + 1e-10
        assert phi <= gauss_radau_rule(ctx, mu) + 1e-10


def test_newton_scalar_closed_form():
    alpha, beta1, eps = 1.5, 2.0, 0.4
    ctx = QuadratureContext(np.array([[alpha], [0.3]]), beta1, eps)
    assert newton_discrepancy(ctx) == pytest.approx((beta1 / eps - 1) / alpha**2, rel=1e-8)


def test_newton_no_regularization_needed(rng):
    with pytest.raises(NoRegularizationNeeded):
        newton_discrepancy(QuadratureContext(_bidiag(rng, 3), 1.0, 2.0))


def test_newton_residual_and_derivative(rng):
    ctx = QuadratureContext(_bidiag(rng, 6), 2.0, 0.05)
    res = newton_discrepancy(ctx, full_output=True)
    assert abs(gauss_rule(ctx, res.mu) - 0.05**2) <= 1e-8 * 0.05**2
    assert res.iterations <= 30
    h = 1e-5 * res.mu
    fd = (gauss_rule(ctx, res.mu + h) - gauss_rule(ctx, res.mu - h)) / (2 * h)
    assert gauss_rule_derivative(ctx, res.mu) == pytest.approx(fd, rel=1e-6)


def test_accept_with_huge_eta(rng):
    ctx = QuadratureContext(_bidiag(rng, 3), 1.0, 0.1, eta=1e8)
    assert discrepancy_accept(ctx, 1e-3)


def test_ggkb_projected_solution(rng):
    Ct = _bidiag(rng, 5)
    b = np.zeros(6)
    b[0] = 1.2
    ls = np.linalg.lstsq(Ct, b, rcond=None)[0]
    assert np.abs(solve_ggkb_tikhonov_projected(Ct, 1.2, 1e10) - ls).max() < 1e-5
    mu = 0.8
    ref = np.linalg.solve(Ct.T @ Ct + np.eye(5) / mu, Ct.T @ b)
    assert np.abs(solve_ggkb_tikhonov_projected(Ct, 1.2, mu) - ref).max() < 1e-9
    # scalar case with beta2 = 0
    y = solve_ggkb_tikhonov_projected(np.array([[2.0], [0.0]]), 3.0, 0.5)
    assert y[0] == pytest.approx(3.0 * 0.5 * 2.0 / (0.5 * 4.0 + 1))
