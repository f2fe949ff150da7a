"""Arnoldi process with modified Gram-Schmidt and one reorthogonalization pass."""
import numpy as np

from .errors import BreakdownError, DimensionMismatch, ZeroStartVector

__all__ = ['BREAKDOWN_TOL', 'ArnoldiState', 'arnoldi_init', 'arnoldi_step',
           'arnoldi']

BREAKDOWN_TOL = 1e-12


class ArnoldiState:
    """Incrementally built decomposition ``A W_m = W_{m+1} Hbar_m``.

    Attributes
    ----------
    m : int
        Number of completed steps.
    b_norm : float
        Norm of the start vector.
    breakdown : bool
        True once an invariant subspace has been found; ``W`` then holds
        only ``m`` columns and the last row of ``Hbar`` is zero.
    subdiag : list of float
        History of ``h_{k+1,k}``.
    """

    def __init__(self, w1, b_norm, capacity):
        N = w1.shape[0]
        capacity = min(capacity, N)
        self.N = N
        self.m = 0
        self.b_norm = b_norm
        self.breakdown = False
        self.subdiag = []
        self._W = np.zeros((N, capacity + 1))
        self._H = np.zeros((capacity + 1, capacity))
        self._W[:, 0] = w1

    def _grow(self):
        cap = self._H.shape[1]
        new = min(2 * cap, self.N)
        W = np.zeros((self.N, new + 1))
        H = np.zeros((new + 1, new))
        W[:, :cap + 1] = self._W
        H[:cap + 1, :cap] = self._H
        self._W, self._H = W, H

    @property
    def W(self):
        """Basis ``W_{m+1}`` (or ``W_m`` after breakdown), shape (N, k)."""
        k = self.m if self.breakdown else self.m + 1
        return self._W[:, :k]

    @property
    def Wm(self):
        return self._W[:, :self.m]

    @property
    def Hbar(self):
        """Upper Hessenberg ``(m+1) x m`` matrix."""
        return self._H[:self.m + 1, :self.m]

    @property
    def H(self):
        """Leading square block ``H_m``."""
        return self._H[:self.m, :self.m]

    @property
    def c(self):
        """``||b|| e_1`` of length ``m + 1``."""
        c = np.zeros(self.m + 1)
        c[0] = self.b_norm
        return c

    def relation_residual(self, A):
        """``||A W_m - W_{m+1} Hbar_m||_F`` (uses ``W_m H_m`` after breakdown)."""
        AW = np.column_stack([A @ self._W[:, k] for k in range(self.m)])
        if self.breakdown:
            return np.linalg.norm(AW - self.Wm @ self.H)
        return np.linalg.norm(AW - self.W @ self.Hbar)

    def copy(self):
        other = object.__new__(ArnoldiState)
        other.__dict__.update(self.__dict__)
        other._W = self._W.copy()
        other._H = self._H.copy()
        other.subdiag = list(self.subdiag)
        return other


def arnoldi_init(A, b, capacity=32):
    """Start the process with ``w_1 = b / ||b||``."""
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 1 or b.shape[0] != A.shape[1]:
        raise DimensionMismatch('start vector of shape %s for operator of '
                                'shape %s' % (b.shape, A.shape))
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        raise ZeroStartVector('Arnoldi start vector is zero')
    return ArnoldiState(b / b_norm, b_norm, capacity)


def arnoldi_step(state, A):
    """Extend the basis by one vector in place and return ``state``."""
    if state.breakdown:
        raise BreakdownError('Arnoldi already broke down at m=%d' % state.m)
    if state.m >= state.N:
        raise BreakdownError('Krylov space already spans R^%d' % state.N)
    if state.m == state._H.shape[1]:
        state._grow()
    j = state.m
    W, H = state._W, state._H
    v = A @ W[:, j]
    av_norm = np.linalg.norm(v)
    for _ in range(2):
        for i in range(j + 1):
            coef = W[:, i] @ v
            H[i, j] += coef
            v -= coef * W[:, i]
    h = float(np.linalg.norm(v))
    state.m = j + 1
    if h <= BREAKDOWN_TOL * av_norm:
        H[j + 1, j] = 0.0
        state.subdiag.append(0.0)
        state.breakdown = True
    else:
        H[j + 1, j] = h
        W[:, j + 1] = v / h
        state.subdiag.append(h)
    return state


def arnoldi(A, b, steps):
    """Run up to ``steps`` Arnoldi steps, stopping early on breakdown."""
    state = arnoldi_init(A, b, capacity=steps)
    while state.m < steps and not state.breakdown and state.m < state.N:
        arnoldi_step(state, A)
    return state
