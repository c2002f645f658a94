"""Cross-module oracle checks run by ``tkrylov validate``.

Each check compares a fast path against an independent dense computation at
a fixed seed and reports the observed residual next to its tolerance.
"""

from dataclasses import dataclass

import numpy as np

from . import oracles
from .krylov import t_global_arnoldi, t_global_golub_kahan
from .matrix_kernels import lsq_tall
from .operators import BlurModel, TensorLinearOperator, build_cross_channel_blur, kron_oracle_apply
from .regularization import (
    GcvContext,
    QuadratureContext,
    gauss_radau_rule,
    gauss_rule,
    gcv_value,
)
from .solvers import gmres_residual_norm
from .tensor_core import (
    bcirc_product,
    diamond,
    frob_norm,
    inner,
    stack_combine,
    stack_combine_matrix,
    t_transpose,
)
from .tproduct_fft import dft_mode3, t_product

__all__ = ["CheckResult", "run_validation", "CHECKS"]


@dataclass
class CheckResult:
    name: str
    observed: float
    tol: float

    @property
    def passed(self):
        return bool(np.isfinite(self.observed) and self.observed <= self.tol)


def check_tproduct(rng, **_):
    worst = 0.0
    for _ in range(100):
        n1, n2, m = rng.integers(1, 9, size=3)
        n3 = int(rng.integers(1, 7))
        A = rng.standard_normal((n1, n2, n3))
        B = rng.standard_normal((n2, m, n3))
        diff = frob_norm(t_product(A, B) - bcirc_product(A, B))
        worst = max(worst, diff / (1 + frob_norm(A) * frob_norm(B)))
    return CheckResult("tproduct_vs_bcirc", worst, 1e-10)


def check_algebra(rng, **_):
    worst = 0.0
    for _ in range(20):
        A, B, C = (rng.standard_normal((3, 3, 4)) for _ in range(3))
        assoc = frob_norm(t_product(t_product(A, B), C) - t_product(A, t_product(B, C)))
        trans = frob_norm(t_transpose(t_product(A, B)) - t_product(t_transpose(B), t_transpose(A)))
        spectral = np.linalg.norm(dft_mode3(A)) / np.sqrt(A.shape[2])
        worst = max(worst, assoc, trans, abs(frob_norm(A) - spectral))
    return CheckResult("tproduct_algebra", worst, 1e-10)


def check_adjoint(rng, **_):
    worst = 0.0
    for B in (None, rng.standard_normal((5, 5, 4))):
        A = rng.standard_normal((6, 5, 4))
        op = TensorLinearOperator(A, B)
        X = rng.standard_normal((5, 5, 4))
        Y = rng.standard_normal((6, 5, 4))
        lhs, rhs = inner(op.apply(X), Y), inner(X, op.apply_transpose(Y))
        worst = max(worst, abs(lhs - rhs) / (abs(lhs) + abs(rhs)))
    return CheckResult("operator_adjoint", worst, 1e-10)


def check_kron(rng, **_):
    worst = 0.0
    for n in (2, 4, 8):
        model = BlurModel(n, 1.3, min(2, n - 1), 0.8, 0.1, 0.1)
        X = rng.standard_normal((n, n, 3))
        ref = kron_oracle_apply(model, X)
        worst = max(worst, frob_norm(build_cross_channel_blur(model).apply(X) - ref) / frob_norm(ref))
    return CheckResult("blur_vs_kronecker", worst, 1e-10)


def check_arnoldi(rng, perturb_hessenberg=False, **_):
    op = TensorLinearOperator(rng.standard_normal((8, 8, 3)))
    dec = t_global_arnoldi(op, rng.standard_normal((8, 4, 3)), 12)
    H = dec.H_tilde.copy()
    if perturb_hessenberg:
        H[1, 0] += 1e-6
    m = dec.m
    MV = np.stack([op.apply(v) for v in dec.V[:m]])
    rel = frob_norm(MV - stack_combine_matrix(dec.V, H))
    ortho = np.abs(diamond(dec.V[:m], dec.V[:m]) - np.eye(m)).max()
    proj = np.abs(diamond(dec.V, MV) - H).max()
    return CheckResult("arnoldi_relations", max(rel, ortho, proj), 1e-10)


def check_golub_kahan(rng, **_):
    op = TensorLinearOperator(rng.standard_normal((8, 6, 3)))
    dec = t_global_golub_kahan(op, rng.standard_normal((8, 5, 3)), 10)
    m = dec.m
    MU = np.stack([op.apply(u) for u in dec.U])
    MtV = np.stack([op.apply_transpose(v) for v in dec.V[:m]])
    r1 = frob_norm(MU - stack_combine_matrix(dec.V, dec.C_tilde))
    r2 = frob_norm(MtV - stack_combine_matrix(dec.U, dec.C.T))
    ou = np.abs(diamond(dec.U, dec.U) - np.eye(m)).max()
    ov = np.abs(diamond(dec.V, dec.V) - np.eye(m + 1)).max()
    return CheckResult("golub_kahan_relations", max(r1, r2, ou, ov), 1e-10)


def check_residual(rng, **_):
    op = TensorLinearOperator(rng.standard_normal((8, 8, 3)))
    C = rng.standard_normal((8, 4, 3))
    full = t_global_arnoldi(op, C, 15)
    worst = 0.0
    for m in range(1, full.m + 1):
        dec = type(full)(full.V[: m + 1], full.H_tilde[: m + 1, :m], full.beta, m)
        rhs = np.zeros(m + 1)
        rhs[0] = dec.beta
        y = lsq_tall(dec.H_tilde, rhs)
        explicit = frob_norm(C - op.apply(stack_combine(dec.V[:m], y)))
        lsq = np.linalg.norm(rhs - dec.H_tilde @ y)
        gamma = gmres_residual_norm(dec, y)
        worst = max(worst, abs(explicit - gamma) / explicit, abs(lsq - gamma) / explicit)
    return CheckResult("gmres_residual_three_way", worst, 1e-9)


def check_gcv(rng, **_):
    worst = 0.0
    for _ in range(20):
        m = int(rng.integers(1, 21))
        H = np.triu(rng.standard_normal((m + 1, m)), -1)
        beta = float(rng.uniform(0.5, 2.0))
        ctx = GcvContext.from_hessenberg(H, beta)
        for mu in (1e-3, 1e-1, 1.0, 10.0):
            ref = oracles.gcv_trace_form(H, beta, mu)
            worst = max(worst, abs(gcv_value(ctx, mu) - ref) / ref)
    return CheckResult("gcv_svd_vs_trace", worst, 1e-9)


def check_quadrature(rng, **_):
    A = rng.standard_normal((6, 6, 2))
    Mdense = oracles.one_sided_matrix(A, 3)
    op = TensorLinearOperator(A)
    C = rng.standard_normal((6, 3, 2))
    C /= frob_norm(C)
    c = oracles.vec_unfold(C)
    worst = 0.0
    for m in (2, 4, 6):
        dec = t_global_golub_kahan(op, C, m)
        ctx = QuadratureContext(dec.C_tilde, dec.beta1, 0.1)
        for mu in np.logspace(-4, 2, 25):
            phi = oracles.tikhonov_inverse_mu_residual(Mdense, c, mu)
            worst = max(worst, gauss_rule(ctx, mu) - phi, phi - gauss_radau_rule(ctx, mu))
    return CheckResult("quadrature_bracketing", max(worst, 0.0), 1e-10)


CHECKS = [
    check_tproduct,
    check_algebra,
    check_adjoint,
    check_kron,
    check_arnoldi,
    check_golub_kahan,
    check_residual,
    check_gcv,
    check_quadrature,
]


def run_validation(seed=20240501, perturb_hessenberg=False):
    results = []
    for check in CHECKS:
        rng = np.random.default_rng(seed)
        results.append(check(rng, perturb_hessenberg=perturb_hessenberg))
    return results
