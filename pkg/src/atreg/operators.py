"""Linear operators: dense matrices, the separable Gaussian blur and the
finite-difference regularization matrices.

Images are vectorized by stacking columns (Fortran order), so for an
``n x n`` image ``X`` we have ``vec(X) = X.reshape(-1, order='F')`` and
``kron(B, C) @ vec(X) == vec(C @ X @ B.T)``.
"""
import math

import numpy as np

from .errors import DimensionMismatch, InvalidSize, SizeLimit
from .linalg import as_matrix

__all__ = ['MAX_DENSE', 'LinearOperator', 'DenseOperator',
           'KroneckerBlurOperator', 'RegOperator', 'dense_operator',
           'identity', 'deriv1', 'deriv2', 'grad2d', 'blur_operator',
           'toeplitz_gaussian']

#: Largest dimension N for which an N x N operator is materialized densely.
MAX_DENSE = 4096


def _vec(X):
    return X.reshape(-1, order='F')


def _unvec(x, n):
    return x.reshape((n, n), order='F')


class LinearOperator:
    """Square or rectangular real operator given by its action.

    Subclasses implement :meth:`_matvec`. ``A @ x`` and ``A(x)`` both
    call :meth:`matvec`.
    """

    def __init__(self, shape):
        self.shape = tuple(int(s) for s in shape)

    @property
    def dim_out(self):
        return self.shape[0]

    @property
    def dim_in(self):
        return self.shape[1]

    def matvec(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim_in,):
            raise DimensionMismatch('operator of shape %s applied to vector '
                                    'of shape %s' % (self.shape, x.shape))
        return self._matvec(x)

    apply = matvec
    __call__ = matvec

    def __matmul__(self, x):
        return self.matvec(x)

    def _matvec(self, x):
        raise NotImplementedError

    def todense(self, max_dim=MAX_DENSE):
        """Materialize the operator column by column."""
        if max(self.shape) > max_dim:
            raise SizeLimit('refusing to materialize a %dx%d operator '
                            '(cap %d)' % (self.shape + (max_dim,)))
        out = np.empty(self.shape)
        e = np.zeros(self.dim_in)
        for j in range(self.dim_in):
            e[j] = 1.0
            out[:, j] = self._matvec(e)
            e[j] = 0.0
        return out

    def __repr__(self):
        return '<%s shape=%s>' % (type(self).__name__, self.shape)


class DenseOperator(LinearOperator):
    """Operator backed by an explicit matrix."""

    def __init__(self, matrix):
        self.matrix = as_matrix(matrix)
        self.matrix.setflags(write=False)
        super().__init__(self.matrix.shape)

    def _matvec(self, x):
        return self.matrix @ x

    def todense(self, max_dim=MAX_DENSE):
        return self.matrix.copy()


def dense_operator(M):
    """Wrap a square matrix as a :class:`DenseOperator`."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch('system operator must be square, got %dx%d'
                                % M.shape)
    return DenseOperator(M)


def toeplitz_gaussian(n, band, sigma):
    """Symmetric banded Toeplitz factor of the separable Gaussian blur."""
    k = np.arange(band)
    t = np.exp(-k ** 2 / (2.0 * sigma ** 2)) / (sigma * math.sqrt(2 * math.pi))
    col = np.zeros(n)
    col[:band] = t
    idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    return col[idx]


class KroneckerBlurOperator(LinearOperator):
    """Blur ``A = T (x) T`` acting on column-stacked ``n x n`` images.

    ``T`` is symmetric, so ``A vec(X) = vec(T X T)``.
    """

    def __init__(self, n, band, sigma):
        self.n = int(n)
        self.band = int(band)
        self.sigma = float(sigma)
        self.T = toeplitz_gaussian(self.n, self.band, self.sigma)
        self.T.setflags(write=False)
        N = self.n * self.n
        super().__init__((N, N))

    def _matvec(self, x):
        X = _unvec(x, self.n)
        return _vec(self.T @ X @ self.T)

    def todense(self, max_dim=MAX_DENSE):
        if self.shape[0] > max_dim:
            raise SizeLimit('blur operator with N=%d exceeds dense cap %d'
                            % (self.shape[0], max_dim))
        return np.kron(self.T, self.T)


def blur_operator(n, band, sigma):
    """Gaussian blur on ``n x n`` images with half-bandwidth ``band``.

    ``sigma`` is used as the standard deviation inside the Gaussian.
    """
    if n < 1:
        raise InvalidSize('image side must be positive')
    if not 1 <= band <= n:
        raise InvalidSize('need 1 <= band <= n, got band=%d, n=%d' % (band, n))
    if not sigma > 0:
        raise ValueError('sigma must be positive')
    return KroneckerBlurOperator(n, band, sigma)


class RegOperator(LinearOperator):
    """Square regularization matrix ``L`` (zero rows appended at the bottom).

    ``kind`` is one of ``'identity'``, ``'d1'``, ``'d2'``, ``'grad2d'``.
    The 1-D kinds hold their dense matrix; ``grad2d`` is applied by
    stencil and only materialized on request.
    """

    def __init__(self, kind, N, matrix=None, n=None):
        super().__init__((N, N))
        self.kind = kind
        self.n = n
        self._matrix = matrix
        if matrix is not None:
            matrix.setflags(write=False)

    @property
    def is_identity(self):
        return self.kind == 'identity'

    @property
    def matrix(self):
        if self._matrix is None:
            self._matrix = self.todense()
            self._matrix.setflags(write=False)
        return self._matrix

    def _matvec(self, x):
        if self.kind == 'identity':
            return x.copy()
        if self.kind == 'grad2d':
            X = _unvec(x, self.n)
            D = np.zeros_like(X)
            # (I (x) L1) vec(X) = vec(L1 X); (L1 (x) I) vec(X) = vec(X L1^T)
            D[:-1, :] += X[:-1, :] - X[1:, :]
            D[:, :-1] += X[:, :-1] - X[:, 1:]
            return _vec(D)
        return self._matrix @ x

    def todense(self, max_dim=MAX_DENSE):
        if self._matrix is not None:
            return self._matrix.copy()
        if self.kind == 'identity':
            return np.eye(self.shape[0])
        if self.shape[0] > max_dim:
            raise SizeLimit('grad2d with N=%d exceeds dense cap %d'
                            % (self.shape[0], max_dim))
        L1 = deriv1(self.n).matrix
        eye = np.eye(self.n)
        return np.kron(eye, L1) + np.kron(L1, eye)


def identity(N):
    return RegOperator('identity', N)


def deriv1(n):
    """First-difference matrix with rows ``(1, -1)`` and a final zero row."""
    if n < 2:
        raise InvalidSize('deriv1 needs n >= 2')
    M = np.zeros((n, n))
    i = np.arange(n - 1)
    M[i, i] = 1.0
    M[i, i + 1] = -1.0
    return RegOperator('d1', n, M)


def deriv2(n):
    """Second-difference matrix with rows ``(1, -2, 1)`` and two zero rows."""
    if n < 3:
        raise InvalidSize('deriv2 needs n >= 3')
    M = np.zeros((n, n))
    i = np.arange(n - 2)
    M[i, i] = 1.0
    M[i, i + 1] = -2.0
    M[i, i + 2] = 1.0
    return RegOperator('d2', n, M)


def grad2d(n, max_dim=None):
    """Kronecker sum ``I (x) L1 + L1 (x) I`` for ``n x n`` images."""
    if n < 2:
        raise InvalidSize('grad2d needs n >= 2')
    N = n * n
    if max_dim is not None and N > max_dim:
        raise SizeLimit('grad2d with N=%d exceeds cap %d' % (N, max_dim))
    return RegOperator('grad2d', N, n=n)
