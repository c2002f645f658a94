"""Restarted T-global GMRES with GCV-Tikhonov and T-global Golub-Kahan with the
discrepancy principle."""

import logging
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .krylov import GolubKahanProcess, t_global_arnoldi
from .matrix_kernels import qr_hessenberg
from .regularization import (
    GcvContext,
    QuadratureContext,
    discrepancy_accept,
    gauss_radau_rule,
    gauss_rule,
    gcv_minimize,
    newton_discrepancy,
    solve_ggkb_tikhonov_projected,
    solve_projected_tikhonov,
)
from .tensor_core import as_tensor3, frob_norm, stack_combine

__all__ = [
    "NumericalError",
    "GmresConfig",
    "GgkbConfig",
    "SolveReport",
    "gmres_restarted",
    "gmres_residual_norm",
    "ggkb_tikhonov",
]

log = logging.getLogger(__name__)


class NumericalError(RuntimeError):
    """A solver produced non-finite values or failed to meet its stopping rule."""


@dataclass
class GmresConfig:
    """``mu`` is ``"gcv"`` or a fixed nonnegative float."""

    m: int = 10
    iter_max: int = 10
    tol: float = 1e-6
    mu: Union[str, float] = "gcv"

    def __post_init__(self):
        if self.m < 1 or self.iter_max < 1 or not self.tol > 0:
            raise ValueError("need m >= 1, iter_max >= 1 and tol > 0")
        if self.mu != "gcv" and not float(self.mu) >= 0:
            raise ValueError("fixed mu must be nonnegative")


@dataclass
class GgkbConfig:
    epsilon: float
    eta: float = 1.1
    m_max: int = 200

    def __post_init__(self):
        if not self.epsilon > 0 or self.eta < 1 or self.m_max < 2:
            raise ValueError("need epsilon > 0, eta >= 1 and m_max >= 2")


@dataclass
class SolveReport:
    X: np.ndarray
    method: str
    mu: list = field(default_factory=list)
    m_used: int = 0
    restarts: int = 0
    residual_history: list = field(default_factory=list)
    gamma_check: list = field(default_factory=list)
    wall_time: float = 0.0
    gauss: Optional[float] = None
    radau: Optional[float] = None
    residual_norm: Optional[float] = None
    breakdown: Optional[int] = None

    @property
    def mu_final(self):
        return self.mu[-1] if self.mu else None


def gmres_residual_norm(decomp, y_unreg=None):
    """``|gamma_{m+1}|``: last entry of ``beta Q' e1`` from the Hessenberg QR.

    Equals the residual norm of the unregularized GMRES update; ``y_unreg`` is
    accepted for symmetry with the explicit check but is not needed.
    """
    Q, _ = qr_hessenberg(decomp.H_tilde)
    return abs(decomp.beta * Q[0, -1])


def gmres_restarted(op, C, X0=None, cfg=None):
    """Restarted T-global GMRES(m) with Tikhonov regularization of the projected problem."""
    cfg = cfg or GmresConfig()
    C = as_tensor3(C, "C")
    X = np.zeros_like(C) if X0 is None else as_tensor3(X0, "X0").copy()
    report = SolveReport(X=X, method="gmres")
    t0 = time.perf_counter()
    mu_prev = None
    R = C - op.apply(X)
    for k in range(1, cfg.iter_max + 1):
        r0 = frob_norm(R)
        if r0 == 0.0:
            break
        dec = t_global_arnoldi(op, R, cfg.m)
        if cfg.mu == "gcv":
            mu = gcv_minimize(GcvContext.from_hessenberg(dec.H_tilde, dec.beta), center=mu_prev)
        else:
            mu = float(cfg.mu)
        y = solve_projected_tikhonov(dec.H_tilde, dec.beta, mu)
        X = X + stack_combine(dec.V[: dec.m], y)
        R = C - op.apply(X)
        res = frob_norm(R)
        if not np.isfinite(res):
            raise NumericalError(f"non-finite residual at restart {k}")
        report.mu.append(mu)
        report.residual_history.append(res)
        report.gamma_check.append(gmres_residual_norm(dec))
        report.m_used = dec.m
        report.restarts = k
        mu_prev = mu
        log.info("restart %d: m=%d mu=%.3e residual=%.3e", k, dec.m, mu, res)
        if res < cfg.tol:
            break
        if dec.breakdown is not None:
            report.breakdown = dec.breakdown
            break
    report.X = X
    report.residual_norm = frob_norm(R)
    report.wall_time = time.perf_counter() - t0
    return report


def ggkb_tikhonov(op, C, cfg):
    """T-global Golub-Kahan with Gauss-quadrature discrepancy-principle Tikhonov."""
    C = as_tensor3(C, "C")
    t0 = time.perf_counter()
    proc = GolubKahanProcess(op, C)
    if not cfg.epsilon < proc.beta1:
        raise ValueError("noise bound must be smaller than ||C||")
    report = SolveReport(X=None, method="ggkb")
    mu = None
    while True:
        proc.step()
        m = proc.m
        stalled = proc.breakdown is not None
        if m == 0:
            raise NumericalError("M^T(C) vanishes; Golub-Kahan cannot start")
        if m < 2 and not stalled:
            continue
        ctx = QuadratureContext(proc.bidiagonal(), proc.beta1, cfg.epsilon, cfg.eta)
        mu = newton_discrepancy(ctx)
        radau = gauss_radau_rule(ctx, mu)
        report.mu.append(mu)
        report.residual_history.append(np.sqrt(radau))
        if discrepancy_accept(ctx, mu):
            break
        if stalled:
            warnings.warn(f"Golub-Kahan broke down at step {proc.breakdown}; accepting m={m}")
            report.breakdown = proc.breakdown
            break
        if m >= cfg.m_max:
            raise NumericalError(f"discrepancy principle not met within m_max={cfg.m_max} steps")
    dec = proc.decomposition()
    y = solve_ggkb_tikhonov_projected(dec.C_tilde, dec.beta1, mu)
    X = stack_combine(dec.U, y)
    if not np.all(np.isfinite(X)):
        raise NumericalError("non-finite restored tensor")
    report.X = X
    report.m_used = dec.m
    report.gauss = gauss_rule(ctx, mu)
    report.radau = radau
    report.residual_norm = frob_norm(op.apply(X) - C)
    report.wall_time = time.perf_counter() - t0
    log.info("ggkb accepted m=%d mu=%.3e", dec.m, mu)
    return report
