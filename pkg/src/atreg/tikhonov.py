"""Arnoldi-Tikhonov solver with discrepancy-based parameter updates.

At step ``m`` the projected problem

    min_y ||Hbar_m y - c||^2 + lam ||L_m y||^2,   L_m = W_m^T L W_m,

is solved as a stacked least-squares problem. The regularization
parameter is refreshed after each step by a one-step secant solve of
``phi_m(lam) = target``; the embedded rule takes the previous GMRES
residual as the target, so no noise estimate is required.
"""
import math
from dataclasses import dataclass, field, asdict
from typing import List, Optional

import numpy as np

from .arnoldi import arnoldi_init, arnoldi_step
from .errors import DimensionMismatch, MonotonicityViolation
from .linalg import lstsq
from .operators import RegOperator

__all__ = ['SolverConfig', 'IterationRecord', 'SolveResult', 'ProjectedReg',
           'project_reg', 'solve_projected', 'discrepancy',
           'gmres_residual_norm', 'update_lambda_secant',
           'update_lambda_embedded', 'should_stop', 'at_solve', 'MODES']

MODES = ('embedded', 'secant', 'gmres_switch')

#: A secant slope below this fraction of phi_m(0) leaves lambda unchanged.
FLAT_TOL = 1e-14
#: Relative slack allowed in the GMRES residual monotonicity check.
MONO_TOL = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of :func:`at_solve`.

    ``noise_norm`` is required by the ``secant`` and ``gmres_switch``
    modes and ignored by ``embedded``.
    """

    lambda0: float = 1.0
    eta: float = 1.02
    tau_res: float = 5e-2
    tau_discr: float = 5e-2
    max_iter: int = 50
    mode: str = 'embedded'
    noise_norm: Optional[float] = None
    lambda_floor: float = 1e-12

    def __post_init__(self):
        if not self.lambda0 > 0:
            raise ValueError('lambda0 must be positive')
        if not self.eta > 1:
            raise ValueError('eta must exceed 1')
        if not (self.tau_res > 0 and self.tau_discr > 0):
            raise ValueError('stopping thresholds must be positive')
        if self.max_iter < 1:
            raise ValueError('max_iter must be at least 1')
        if self.mode not in MODES:
            raise ValueError('mode must be one of %s' % (MODES,))
        if self.mode != 'embedded' and not (self.noise_norm is not None
                                            and self.noise_norm > 0):
            raise ValueError('mode %r needs a positive noise_norm' % self.mode)


@dataclass
class IterationRecord:
    m: int
    lambda_prev: float
    phi0: float
    phi_lambda: float
    lambda_new: float
    res_change: float = math.nan
    discr_change: float = math.nan
    rel_error: Optional[float] = None

    def as_dict(self):
        return asdict(self)


@dataclass
class SolveResult:
    x: np.ndarray
    lambda_final: float
    lambda_last: float
    iterations: int
    stop_reason: str
    history: List[IterationRecord] = field(default_factory=list)
    state: object = None


class ProjectedReg:
    """Incrementally maintained ``L_m = W_m^T L W_m``.

    ``L w_k`` is cached for every basis vector so each step costs one
    application of ``L`` plus ``O(N m)`` inner products.
    """

    def __init__(self, L):
        self.L = L
        self.m = 0
        self._LW = []
        self._Lm = np.zeros((0, 0))

    def extend(self, W):
        """Bring ``L_m`` up to the number of columns of ``W``."""
        k = W.shape[1]
        if W.shape[0] != self.L.shape[1]:
            raise DimensionMismatch('basis of dimension %d for L of shape %s'
                                    % (W.shape[0], self.L.shape))
        if getattr(self.L, 'is_identity', False):
            self.m = k
            self._Lm = np.eye(k)
            return self._Lm
        while self.m < k:
            j = self.m
            w = W[:, j]
            self._LW.append(self.L @ w)
            Lm = np.zeros((j + 1, j + 1))
            Lm[:j, :j] = self._Lm
            LW = np.column_stack(self._LW)
            Lm[:, j] = W[:, :j + 1].T @ self._LW[j]   # new column
            Lm[j, :j] = w @ LW[:, :j]                 # new row
            self._Lm = Lm
            self.m = j + 1
        return self._Lm

    @property
    def matrix(self):
        return self._Lm


def project_reg(L, W):
    """``W^T L W`` for a basis with orthonormal columns."""
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2:
        raise DimensionMismatch('basis must be a 2-D array')
    return ProjectedReg(L).extend(W).copy()


def solve_projected(Hbar, Lm, lam, c):
    """Minimizer of ``||Hbar y - c||^2 + lam ||Lm y||^2``.

    Solved as the stacked least-squares problem
    ``[Hbar; sqrt(lam) Lm] y = [c; 0]``.
    """
    Hbar = np.asarray(Hbar, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if lam < 0:
        raise ValueError('lambda must be nonnegative')
    m = Hbar.shape[1]
    if lam == 0:
        return lstsq(Hbar, c)
    Lm = np.asarray(Lm, dtype=np.float64)
    if Lm.shape != (m, m):
        raise DimensionMismatch('L_m has shape %s, expected (%d, %d)'
                                % (Lm.shape, m, m))
    M = np.vstack([Hbar, math.sqrt(lam) * Lm])
    rhs = np.concatenate([c, np.zeros(m)])
    return lstsq(M, rhs)


def discrepancy(Hbar, y, c):
    """``||Hbar y - c||``."""
    return float(np.linalg.norm(np.asarray(Hbar) @ y - c))


def gmres_residual_norm(Hbar, c):
    """GMRES residual norm ``phi_m(0) = min_y ||Hbar y - c||``.

    Reduces the Hessenberg matrix to triangular form with Givens
    rotations; the residual is the magnitude of the last rotated
    right-hand side entry. Unlike ``solve_projected(.., 0, ..)`` this
    needs no rank condition, and because the rotations for step ``m`` are
    a prefix of those for step ``m + 1`` the sequence is non-increasing
    in floating point too.
    """
    R = np.array(Hbar, dtype=np.float64)
    g = np.array(c, dtype=np.float64)
    m = R.shape[1]
    if R.shape[0] != m + 1 or g.shape != (m + 1,):
        raise DimensionMismatch('expected (m+1) x m Hessenberg and (m+1,) rhs')
    for k in range(m):
        a, b = R[k, k], R[k + 1, k]
        r = math.hypot(a, b)
        if r == 0.0:
            continue
        cs, sn = a / r, b / r
        rk, rk1 = R[k, k:].copy(), R[k + 1, k:].copy()
        R[k, k:] = cs * rk + sn * rk1
        R[k + 1, k:] = -sn * rk + cs * rk1
        g[k], g[k + 1] = cs * g[k] + sn * g[k + 1], -sn * g[k] + cs * g[k + 1]
    return abs(float(g[m]))


def _secant(target, phi0, phi_lambda, lambda_prev, floor):
    denom = phi_lambda - phi0
    if denom <= FLAT_TOL * phi0:
        return lambda_prev
    lam = abs(target - phi0) / abs(denom) * lambda_prev
    if lam == 0.0:
        lam = floor * lambda_prev
    return lam


def update_lambda_secant(phi0, phi_lambda, lambda_prev, eta_times_noise,
                         lambda_floor=1e-12):
    """Secant step on ``phi_m(lam) = eta ||e||`` with an absolute value
    keeping the parameter positive."""
    return _secant(eta_times_noise, phi0, phi_lambda, lambda_prev,
                   lambda_floor)


def update_lambda_embedded(phi0_prev, phi0, phi_lambda, lambda_prev, eta,
                           lambda_floor=1e-12):
    """Secant step with the noise norm replaced by the previous GMRES
    residual ``phi_{m-1}(0)``.

    Raises
    ------
    MonotonicityViolation
        If ``phi0`` exceeds ``phi0_prev`` beyond rounding.
    """
    if phi0 > phi0_prev * (1 + MONO_TOL):
        raise MonotonicityViolation(
            'GMRES residual grew from %.17g to %.17g' % (phi0_prev, phi0))
    denom = phi_lambda - phi0
    if denom <= FLAT_TOL * phi0:
        return lambda_prev
    lam = (eta * phi0_prev - phi0) / denom * lambda_prev
    if lam <= 0.0:
        lam = lambda_floor * lambda_prev
    return lam


def _rel_change(new, old):
    if old == 0:
        return math.inf if new != 0 else 0.0
    return abs(new - old) / old


def should_stop(history, tau_res, tau_discr):
    """Stop once both the GMRES residual and the discrepancy have settled.

    ``history`` is a sequence of :class:`IterationRecord` (or of
    ``(phi0, phi_lambda)`` pairs). At least three entries are required.
    """
    if len(history) < 3:
        return False
    pairs = [(h.phi0, h.phi_lambda) if isinstance(h, IterationRecord) else h
             for h in history[-2:]]
    (r_old, d_old), (r_new, d_new) = pairs
    return (_rel_change(r_new, r_old) < tau_res
            and _rel_change(d_new, d_old) < tau_discr)


def at_solve(A, b, L, config=None, x_ex=None):
    """Arnoldi-Tikhonov iteration with automatic regularization parameter.

    Parameters
    ----------
    A : LinearOperator
        Square system operator.
    b : ndarray
        Data vector; the initial guess is zero.
    L : RegOperator
        Square regularization matrix.
    config : SolverConfig, optional
    x_ex : ndarray, optional
        Exact solution; only used to record relative errors.

    Returns
    -------
    SolveResult
        ``x = W_m y_{m, lam}`` where ``lam`` is the parameter used at the
        final step (``lambda_final``); ``lambda_last`` is the last value
        produced by the update rule.
    """
    config = config or SolverConfig()
    if not isinstance(L, RegOperator):
        raise TypeError('L must be a RegOperator')
    if L.shape != A.shape:
        raise DimensionMismatch('L has shape %s, A has shape %s'
                                % (L.shape, A.shape))
    state = arnoldi_init(A, b, capacity=min(config.max_iter, 64))
    proj = ProjectedReg(L)
    x_ex_norm = None if x_ex is None else float(np.linalg.norm(x_ex))

    history = []
    lam_used = config.lambda0
    lam_next = config.lambda0
    gmres_phase = config.mode == 'gmres_switch'
    phi0_prev = None
    y = None
    stop_reason = 'max_iter'
    while True:
        arnoldi_step(state, A)
        m = state.m
        Hbar, c = state.Hbar, state.c
        Lm = proj.extend(state.Wm)

        phi0 = gmres_residual_norm(Hbar, c)
        if gmres_phase and phi0 < config.eta * config.noise_norm:
            gmres_phase = False
            lam_next = config.lambda0
        if gmres_phase:
            lam_used = 0.0
        elif m <= 2:
            lam_used = config.lambda0
        else:
            lam_used = lam_next
        y = solve_projected(Hbar, Lm, lam_used, c)
        phi_lam = discrepancy(Hbar, y, c)

        if gmres_phase:
            lam_new = 0.0
        elif m < 2:
            lam_new = lam_used
        elif config.mode == 'embedded':
            lam_new = update_lambda_embedded(phi0_prev, phi0, phi_lam,
                                             lam_used, config.eta,
                                             config.lambda_floor)
        else:
            # gmres_switch after the switch: phi0 < eta ||e|| so no sign issue
            lam_new = update_lambda_secant(phi0, phi_lam, lam_used,
                                           config.eta * config.noise_norm,
                                           config.lambda_floor)
        lam_next = lam_new

        rec = IterationRecord(m, lam_used, phi0, phi_lam, lam_new)
        if history:
            rec.res_change = _rel_change(phi0, history[-1].phi0)
            rec.discr_change = _rel_change(phi_lam, history[-1].phi_lambda)
        if x_ex_norm:
            rec.rel_error = float(np.linalg.norm(state.Wm @ y - x_ex)
                                  / x_ex_norm)
        history.append(rec)
        phi0_prev = phi0

        if not gmres_phase and should_stop(history, config.tau_res,
                                           config.tau_discr):
            stop_reason = 'converged'
            break
        if state.breakdown:
            stop_reason = 'breakdown'
            break
        if m >= config.max_iter or m >= state.N:
            stop_reason = 'max_iter'
            break

    x = state.Wm @ y
    return SolveResult(x=x, lambda_final=lam_used, lambda_last=lam_next,
                       iterations=len(history), stop_reason=stop_reason,
                       history=history, state=state)
