"""Numerical checks of the Krylov behaviour the parameter rule relies on.

These run at desk scale: anything that needs singular values of the full
operator materializes it densely and refuses ``N > MAX_DIAG_DIM``.
"""
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .arnoldi import arnoldi
from .errors import InvalidReference, RankDeficient, SizeLimit
from .linalg import lstsq, singular_values, solve_dense
from .tikhonov import gmres_residual_norm

__all__ = ['MAX_DIAG_DIM', 'DecayReport', 'StagnationReport',
           'fom_residual_norm', 'peak_plateau_violation', 'gmres_fom_history',
           'subdiag_decay', 'noise_revealing_curve', 'residual_stagnation',
           'projected_singular_values', 'default_lambda_grid',
           'oracle_lambda', 'relative_error']

MAX_DIAG_DIM = 512


@dataclass
class DecayReport:
    """Per-step ``h_{m+1,m}``, ``sigma_m`` and ``h_{m+1,m} / (m^1.5 sigma_m)``."""

    h: List[float] = field(default_factory=list)
    sigma: List[float] = field(default_factory=list)
    ratio: List[float] = field(default_factory=list)
    breakdown: bool = False

    def rows(self):
        for m, (h, s, r) in enumerate(zip(self.h, self.sigma, self.ratio), 1):
            yield m, h, s, r


@dataclass
class StagnationReport:
    residuals: List[float]
    noise_norm: float
    min_rel_distance: float
    argmin_m: int


def _dense(A, max_dim=MAX_DIAG_DIM):
    if A.shape[0] > max_dim:
        raise SizeLimit('diagnostics need N <= %d, got %d'
                        % (max_dim, A.shape[0]))
    return A.todense()


def fom_residual_norm(Hm, h_sub, c):
    """FOM residual norm ``h_sub * |e_m^T Hm^{-1} c|``."""
    if h_sub == 0:
        return 0.0
    z = solve_dense(Hm, c)
    return abs(h_sub) * abs(z[-1])


def gmres_fom_history(A, b, steps):
    """GMRES and FOM residual norms for ``m = 1..steps`` from one Arnoldi run.

    Returns two lists ``(r, rho)``; FOM entries are ``inf`` when the
    square Hessenberg block is singular.
    """
    state = arnoldi(A, b, steps)
    r, rho = [], []
    for m in range(1, state.m + 1):
        Hbar = state._H[:m + 1, :m]
        c = np.zeros(m + 1)
        c[0] = state.b_norm
        r.append(gmres_residual_norm(Hbar, c))
        try:
            rho.append(fom_residual_norm(Hbar[:m], Hbar[m, m - 1], c[:m]))
        except ArithmeticError:
            rho.append(math.inf)
    return r, rho


def peak_plateau_violation(r_norms, rho_norms):
    """Largest relative defect in ``1/r_m^2 = 1/rho_m^2 + 1/r_{m-1}^2``.

    Parameters
    ----------
    r_norms, rho_norms : sequence of float
        GMRES and FOM residual norms aligned by step.
    """
    worst = 0.0
    for m in range(1, min(len(r_norms), len(rho_norms))):
        lhs = 1.0 / r_norms[m] ** 2
        rhs = 1.0 / rho_norms[m] ** 2 + 1.0 / r_norms[m - 1] ** 2
        worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return worst


def subdiag_decay(A, b, steps):
    """Compare the Arnoldi subdiagonal against the singular values of ``A``."""
    sigma = singular_values(_dense(A))
    state = arnoldi(A, b, steps)
    report = DecayReport(breakdown=state.breakdown)
    for m, h in enumerate(state.subdiag, 1):
        s = sigma[m - 1]
        report.h.append(h)
        report.sigma.append(s)
        report.ratio.append(h / (m ** 1.5 * s) if s > 0 else math.inf)
    return report


def noise_revealing_curve(A, b, b_ex, e, K):
    """``||A^k b/||A^k b|| - A^k b_ex/||A^k b_ex|| || / ||e||`` for k = 1..K.

    Powers are normalized after every multiplication. If either sequence
    underflows to zero the list stops at the previous ``k``.
    """
    e_norm = float(np.linalg.norm(e))
    if e_norm == 0:
        raise ValueError('noise vector must be nonzero')
    if K < 1:
        raise ValueError('K must be at least 1')
    u = np.asarray(b, dtype=np.float64)
    v = np.asarray(b_ex, dtype=np.float64)
    out = []
    for _ in range(K):
        u = A @ u
        v = A @ v
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if not (nu > 0 and nv > 0 and np.isfinite(nu) and np.isfinite(nv)):
            break
        u /= nu
        v /= nv
        out.append(float(np.linalg.norm(u - v)) / e_norm)
    return out


def residual_stagnation(A, b, noise_norm, steps):
    """GMRES residual history and its closest approach to ``||e||``.

    With ``noise_norm == 0`` the relative distance is undefined and reported
    as 1 (the residual can at best reach zero).
    """
    if steps < 2:
        raise ValueError('steps must be at least 2')
    state = arnoldi(A, b, steps)
    res = []
    for m in range(1, state.m + 1):
        Hbar = state._H[:m + 1, :m]
        c = np.zeros(m + 1)
        c[0] = state.b_norm
        res.append(gmres_residual_norm(Hbar, c))
    if noise_norm > 0:
        dist = [abs(r - noise_norm) / noise_norm for r in res]
        k = int(np.argmin(dist))
        return StagnationReport(res, noise_norm, dist[k], k + 1)
    return StagnationReport(res, 0.0, 1.0, len(res))


def projected_singular_values(Hbar):
    return singular_values(Hbar)


def default_lambda_grid(lo=1e-12, hi=1e2, per_decade=4):
    decades = math.log10(hi / lo)
    return np.logspace(math.log10(lo), math.log10(hi),
                       int(round(decades * per_decade)) + 1)


def oracle_lambda(A_dense, b, L, x_ex, grid=None):
    """Best Tikhonov parameter on a grid, judged by distance to ``x_ex``.

    Each grid point solves ``min ||A x - b||^2 + lam ||L x||^2`` in full
    dimension through the stacked least-squares system. Grid points where
    the stacked matrix is numerically rank deficient are skipped.

    Returns
    -------
    lambda_opt : float
    err_opt : float
        Relative error ``||x_lam - x_ex|| / ||x_ex||`` at ``lambda_opt``.
    """
    A_dense = np.asarray(A_dense, dtype=np.float64)
    N = A_dense.shape[1]
    if N > MAX_DIAG_DIM:
        raise SizeLimit('oracle_lambda needs N <= %d' % MAX_DIAG_DIM)
    Ld = L.todense() if hasattr(L, 'todense') else np.asarray(L)
    grid = default_lambda_grid() if grid is None else np.atleast_1d(grid)
    rhs = np.concatenate([b, np.zeros(Ld.shape[0])])
    best = (math.inf, math.nan)
    for lam in grid:
        try:
            x = lstsq(np.vstack([A_dense, math.sqrt(lam) * Ld]), rhs)
        except RankDeficient:
            continue
        err = relative_error(x, x_ex)
        if err < best[0]:
            best = (err, float(lam))
    return best[1], best[0]


def relative_error(x, x_ex):
    """``||x - x_ex|| / ||x_ex||``."""
    ref = float(np.linalg.norm(x_ex))
    if ref == 0:
        raise InvalidReference('reference vector is zero')
    return float(np.linalg.norm(np.asarray(x) - x_ex)) / ref
