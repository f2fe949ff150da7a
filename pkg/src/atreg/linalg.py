"""Small dense kernels used on the projected problems.

Everything works on float64 numpy arrays. ``lstsq`` goes through a
Householder QR (LAPACK ``geqrf``) and never forms the normal equations.
"""
import warnings

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NumericalFailure, RankDeficient, Singular

__all__ = ['RANK_TOL', 'as_matrix', 'as_vector', 'lstsq', 'solve_dense',
           'singular_values']

#: Relative threshold on the factor diagonal used for rank/singularity tests.
RANK_TOL = 1e-12


def as_matrix(M):
    """Return ``M`` as a finite 2-D float64 array."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise DimensionMismatch('expected a non-empty 2-D matrix, got shape %s'
                                % (M.shape,))
    if not np.all(np.isfinite(M)):
        raise ValueError('matrix has non-finite entries')
    return M


def as_vector(v):
    """Return ``v`` as a finite 1-D float64 array."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise DimensionMismatch('expected a non-empty vector, got shape %s'
                                % (v.shape,))
    if not np.all(np.isfinite(v)):
        raise ValueError('vector has non-finite entries')
    return v


def lstsq(M, rhs, tol=RANK_TOL):
    """Solve ``min ||M y - rhs||`` for a tall matrix of full column rank.

    Parameters
    ----------
    M : array_like, shape (p, q)
        Coefficient matrix with ``p >= q``.
    rhs : array_like, shape (p,)
    tol : float
        A diagonal entry of R smaller than ``tol * max|R_ii|`` counts as
        rank loss.

    Returns
    -------
    y : ndarray, shape (q,)

    Raises
    ------
    RankDeficient
        If the triangular factor reveals numerical rank below ``q``.
    """
    M = as_matrix(M)
    rhs = as_vector(rhs)
    p, q = M.shape
    if rhs.shape[0] != p:
        raise DimensionMismatch('rhs has length %d, expected %d'
                                % (rhs.shape[0], p))
    if p < q:
        raise DimensionMismatch('lstsq needs rows >= cols, got %dx%d' % (p, q))
    Q, R = np.linalg.qr(M, mode='reduced')
    diag = np.abs(np.diag(R))
    scale = diag.max()
    rank = int(np.count_nonzero(diag > tol * scale)) if scale > 0 else 0
    if rank < q:
        raise RankDeficient('numerical rank %d < %d columns' % (rank, q), rank)
    return scipy.linalg.solve_triangular(R, Q.T @ rhs, lower=False)


def solve_dense(M, rhs, tol=RANK_TOL):
    """Solve the square system ``M y = rhs`` by LU with partial pivoting.

    Raises :class:`Singular` when a pivot falls below ``tol`` times the
    largest pivot magnitude.
    """
    M = as_matrix(M)
    rhs = as_vector(rhs)
    m = M.shape[0]
    if M.shape[1] != m:
        raise DimensionMismatch('solve_dense needs a square matrix')
    if rhs.shape[0] != m:
        raise DimensionMismatch('rhs has length %d, expected %d'
                                % (rhs.shape[0], m))
    with warnings.catch_warnings():
        # exact zero pivots are reported below as Singular
        warnings.simplefilter('ignore', scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.max() == 0 or pivots.min() <= tol * pivots.max():
        raise Singular('matrix is singular to working precision')
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def singular_values(M):
    """Singular values of ``M`` in descending order."""
    M = as_matrix(M)
    try:
        s = np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    return s
