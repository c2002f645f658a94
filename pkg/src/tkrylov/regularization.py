"""Regularization-parameter selection and projected Tikhonov solves.

Two parametrizations are used:

* GMRES branch: ``min ||H y - beta e1||^2 + mu^2 ||y||^2`` with ``mu`` from GCV.
* Golub-Kahan branch: ``min ||C y - beta1 e1||^2 + mu^{-1} ||y||^2`` with ``mu``
  from the discrepancy principle, using the Gauss and Gauss-Radau rules

      G(mu) = beta1^2 e1' (mu C_m C_m' + I)^{-2} e1
      R(mu) = beta1^2 e1' (mu C~_m C~_m' + I)^{-2} e1

  which bracket the true residual functional: ``G <= phi <= R``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .matrix_kernels import lsq_tall, svd_small

__all__ = [
    "NoRegularizationNeeded",
    "GcvContext",
    "QuadratureContext",
    "gcv_value",
    "gcv_minimize",
    "solve_projected_tikhonov",
    "gauss_rule",
    "gauss_radau_rule",
    "gauss_rule_derivative",
    "newton_discrepancy",
    "NewtonResult",
    "discrepancy_accept",
    "solve_ggkb_tikhonov_projected",
]

log = logging.getLogger(__name__)


class NoRegularizationNeeded(ValueError):
    """The data norm is already within the noise bound (``beta1 <= eps``)."""


@dataclass
class GcvContext:
    """Singular values and rotated data of the projected Hessenberg matrix.

    ``sigma`` is padded with a zero so that ``len(sigma) == m + 1`` matches
    ``g_tilde``; the padded term carries the part of ``beta e1`` outside the
    range of ``H_tilde``. With this convention the SVD form of GCV coincides
    with the trace form over the (m+1)-dimensional projected space.
    """

    sigma: np.ndarray
    g_tilde: np.ndarray
    U: np.ndarray = None
    V: np.ndarray = None

    @classmethod
    def from_hessenberg(cls, H_tilde, beta):
        U, s, V = svd_small(H_tilde)
        p = H_tilde.shape[0]
        sigma = np.zeros(p)
        sigma[: s.size] = s
        return cls(sigma=sigma, g_tilde=beta * U[0, :], U=U, V=V)

    @property
    def m(self):
        return self.sigma.size


def gcv_value(ctx, mu):
    """``sum (g_i / (s_i^2 + mu^2))^2 / (sum 1 / (s_i^2 + mu^2))^2`` over ``ctx.sigma``."""
    s2 = ctx.sigma**2
    d = s2 + mu * mu
    g = ctx.g_tilde[: s2.size]
    if mu > 0:
        # numerator and denominator multiplied by mu^4 so a zero singular value stays finite
        w = (mu * mu) / d
        return float(np.sum((w * g) ** 2) / np.sum(w) ** 2)
    return float(np.sum((g / d) ** 2) / np.sum(1.0 / d) ** 2)


def gcv_minimize(ctx, center=None, n_grid=200, lo=1e-12, hi=1e2, rtol=1e-3):
    """Minimize GCV over ``mu`` in ``[lo, hi] * sigma_1``.

    A log-spaced scan locates the basin, then a bounded Brent search on
    ``log mu`` between the neighbouring grid points refines it. ``center`` (the
    previous restart's value) is added as an extra candidate.
    """
    s1 = float(ctx.sigma[0]) if ctx.sigma[0] > 0 else 1.0
    grid = np.logspace(np.log10(lo * s1), np.log10(hi * s1), n_grid)
    if center is not None and center > 0:
        grid = np.unique(np.append(grid, center))
    vals = np.array([gcv_value(ctx, mu) for mu in grid])
    k = int(np.argmin(vals))
    best_mu, best_val = grid[k], vals[k]
    if 0 < k < grid.size - 1:
        res = scipy.optimize.minimize_scalar(
            lambda t: gcv_value(ctx, np.exp(t)),
            bounds=(np.log(grid[k - 1]), np.log(grid[k + 1])),
            method="bounded",
            options={"xatol": rtol},
        )
        if res.fun <= best_val:
            best_mu, best_val = float(np.exp(res.x)), float(res.fun)
    return float(best_mu)


def solve_projected_tikhonov(H_tilde, beta, mu):
    """Solve ``[H_tilde; mu I] y ~ [beta e1; 0]`` in the least-squares sense."""
    H_tilde = np.asarray(H_tilde, dtype=np.float64)
    p, m = H_tilde.shape
    rhs = np.zeros(p + m)
    rhs[0] = beta
    A = np.vstack([H_tilde, mu * np.eye(m)])
    return lsq_tall(A, rhs)


@dataclass
class QuadratureContext:
    """Bidiagonal data after ``m`` Golub-Kahan steps plus the noise bound.

    The rules are evaluated from the SVDs of ``C_m`` and ``C~_m``:
    ``beta1^2 e1' (mu C C' + I)^{-2} e1 = beta1^2 sum_i u_1i^2 / (1 + mu s_i^2)^2``
    with ``s`` padded by zeros to the row count. Every term is positive, so
    the sums keep full relative accuracy even where ``mu C C' + I`` is
    numerically singular.
    """

    C_tilde: np.ndarray
    beta1: float
    epsilon: float
    eta: float = 1.1
    _spectra: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.C_tilde = np.asarray(self.C_tilde, dtype=np.float64)
        if self.beta1 <= 0:
            raise ValueError("beta1 must be positive")
        if self.eta < 1:
            raise ValueError("safety factor eta must be >= 1")

    @property
    def C(self):
        return self.C_tilde[:-1, :]

    @property
    def m(self):
        return self.C_tilde.shape[1]

    def spectrum(self, which):
        """``(u1^2, s^2)`` for ``which`` in ``{"gauss", "radau"}``."""
        if which not in self._spectra:
            Cmat = self.C if which == "gauss" else self.C_tilde
            U, s, _ = scipy.linalg.svd(Cmat, lapack_driver="gesvd")
            s2 = np.zeros(Cmat.shape[0])
            s2[: s.size] = s**2
            self._spectra[which] = (U[0, :] ** 2, s2)
        return self._spectra[which]


def _rule(ctx, which, mu):
    u2, s2 = ctx.spectrum(which)
    return ctx.beta1**2 * float(np.sum(u2 / (1.0 + mu * s2) ** 2))


def gauss_rule(ctx, mu):
    """Lower bound ``G_m f_mu`` built from the square bidiagonal ``C_m``."""
    return _rule(ctx, "gauss", mu)


def gauss_radau_rule(ctx, mu):
    """Upper bound ``R_{m+1} f_mu`` built from the rectangular ``C~_m``."""
    return _rule(ctx, "radau", mu)


def gauss_rule_derivative(ctx, mu):
    """``dG/dmu = -2 beta1^2 e1' (mu K + I)^{-3} K e1`` with ``K = C_m C_m'``."""
    u2, s2 = ctx.spectrum("gauss")
    return -2.0 * ctx.beta1**2 * float(np.sum(u2 * s2 / (1.0 + mu * s2) ** 3))


@dataclass
class NewtonResult:
    mu: float
    iterations: int
    residual: float


def newton_discrepancy(ctx, rtol=1e-9, maxiter=100, full_output=False):
    """Solve ``G_m f_mu = eps^2`` for ``mu > 0``.

    Newton's method is run on ``t = log mu`` for ``F(t) = log G(e^t) - 2 log eps``
    (derivative from the analytic ``dG/dmu`` by the chain rule), safeguarded by
    a bracket: steps leaving it become bisections. ``G`` decreases from
    ``beta1^2`` at ``mu = 0`` to zero, so a bracket exists whenever
    ``beta1 > eps``; its upper end is found by doubling.
    """
    eps2 = ctx.epsilon**2
    if ctx.beta1**2 <= eps2:
        raise NoRegularizationNeeded("beta1 <= epsilon: no regularization needed")
    target = np.log(eps2)

    def F(t):
        return np.log(gauss_rule(ctx, np.exp(t))) - target

    # bracket in log mu: F(lo) > 0 > F(hi)
    cn = np.linalg.norm(ctx.C, 2)
    hi = np.log(1.0 / max(cn * cn, 1e-300))
    lo = None
    for _ in range(2000):
        if F(hi) < 0:
            break
        lo = hi
        hi += np.log(2.0)
    else:
        raise RuntimeError("could not bracket the discrepancy equation")
    if lo is None:
        lo = hi - np.log(2.0)
        for _ in range(2000):
            if F(lo) > 0:
                break
            hi = lo
            lo -= np.log(2.0)
        else:
            raise RuntimeError("could not bracket the discrepancy equation")

    t = hi
    for it in range(1, maxiter + 1):
        mu = np.exp(t)
        G = gauss_rule(ctx, mu)
        resid = G - eps2
        if abs(resid) <= rtol * eps2:
            out = NewtonResult(float(mu), it - 1, abs(resid))
            return out if full_output else out.mu
        if resid > 0:
            lo = t
        else:
            hi = t
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(t)):
            # bracket exhausted: G cannot be resolved more finely in double precision
            log.warning("discrepancy equation solved only to %.1e relative", abs(resid) / eps2)
            out = NewtonResult(float(mu), it, abs(resid))
            return out if full_output else out.mu
        dF = mu * gauss_rule_derivative(ctx, mu) / G
        step_ok = dF < 0 and np.isfinite(dF)
        t_new = t - (np.log(G) - target) / dF if step_ok else None
        if t_new is None or not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        t = t_new
    raise RuntimeError(f"Newton did not converge in {maxiter} iterations")


def discrepancy_accept(ctx, mu):
    """True when the Gauss-Radau bound satisfies ``R(mu) <= eta^2 eps^2``."""
    return gauss_radau_rule(ctx, mu) <= ctx.eta**2 * ctx.epsilon**2


def solve_ggkb_tikhonov_projected(C_tilde, beta1, mu):
    """Minimize ``|| [sqrt(mu) C~; I] y - [beta1 sqrt(mu) e1; 0] ||``."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    C_tilde = np.asarray(C_tilde, dtype=np.float64)
    p, m = C_tilde.shape
    r = np.sqrt(mu)
    A = np.vstack([r * C_tilde, np.eye(m)])
    rhs = np.zeros(p + m)
    rhs[0] = beta1 * r
    return lsq_tall(A, rhs)
