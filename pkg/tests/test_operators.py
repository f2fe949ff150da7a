import math

import numpy as np
import pytest

from atreg.errors import DimensionMismatch, InvalidSize, SizeLimit
from atreg.operators import (blur_operator, dense_operator, deriv1, deriv2,
                             grad2d, identity)


def _linearity(op, rng):
    x, y = rng.standard_normal((2, op.dim_in))
    a = rng.standard_normal()
    lhs = op @ (a * x + y)
    rhs = a * (op @ x) + op @ y
    scale = np.linalg.norm(op @ x) + np.linalg.norm(op @ y) + 1.0
    return np.linalg.norm(lhs - rhs) / scale


def test_dense_operator_examples(rng):
    np.testing.assert_array_equal(dense_operator(np.eye(2)) @ np.array([1., 2.]),
                                  [1, 2])
    shift = dense_operator([[0., 1.], [0., 0.]])
    np.testing.assert_array_equal(shift @ np.array([0., 1.]), [1, 0])
    M = rng.standard_normal((10, 10))
    x = rng.standard_normal(10)
    oracle = np.array([sum(M[i, j] * x[j] for j in range(10)) for i in range(10)])
    np.testing.assert_allclose(dense_operator(M) @ x, oracle, atol=1e-14 * 10)


def test_dense_operator_rejects_nonsquare():
    with pytest.raises(DimensionMismatch):
        dense_operator(np.ones((2, 3)))


def test_deriv1_matrix():
    np.testing.assert_array_equal(deriv1(3).matrix,
                                  [[1, -1, 0], [0, 1, -1], [0, 0, 0]])
    L = deriv1(3)
    np.testing.assert_array_equal(L @ np.ones(3), 0)
    np.testing.assert_array_equal(L @ np.array([0., 1., 2.]), [-1, -1, 0])
    with pytest.raises(InvalidSize):
        deriv1(1)


def test_deriv2_matrix():
    L = deriv2(4)
    np.testing.assert_array_equal(L.matrix[0], [1, -2, 1, 0])
    np.testing.assert_array_equal(L.matrix[2:], 0)
    np.testing.assert_array_equal(L @ np.arange(4.0), 0)
    np.testing.assert_array_equal(L @ np.array([0., 0., 1., 0.]), [1, -2, 0, 0])
    with pytest.raises(InvalidSize):
        deriv2(2)


def test_grad2d_kronecker_oracle():
    L1 = np.array([[1., -1.], [0., 0.]])
    I = np.eye(2)
    oracle = np.zeros((4, 4))
    # explicit Kronecker sum, block by block
    for i in range(2):
        for j in range(2):
            oracle[2 * i:2 * i + 2, 2 * j:2 * j + 2] += I[i, j] * L1 + L1[i, j] * I
    np.testing.assert_array_equal(grad2d(2).todense(), oracle)


@pytest.mark.parametrize('n', [2, 3, 8])
def test_grad2d_stencil_matches_dense(n, rng):
    L = grad2d(n)
    D = L.todense()
    x = rng.standard_normal(n * n)
    np.testing.assert_allclose(L @ x, D @ x, atol=1e-13)
    np.testing.assert_array_equal(L @ np.ones(n * n), 0)
    assert np.all(D[-1] == 0)


def test_grad2d_large_is_matrix_free():
    L = grad2d(256)
    assert L.shape == (65536, 65536)
    np.testing.assert_array_equal(L @ np.ones(65536), 0)
    with pytest.raises(SizeLimit):
        L.todense()
    with pytest.raises(SizeLimit):
        grad2d(100, max_dim=4096)


def test_blur_band_one_is_scaling(rng):
    A = blur_operator(5, 1, 1.5)
    x = rng.random(25)
    c = 1.0 / (1.5 * math.sqrt(2 * math.pi))
    np.testing.assert_allclose(A.T, c * np.eye(5))
    np.testing.assert_allclose(A @ x, c * c * x, rtol=1e-15)


def test_blur_tridiagonal_entries():
    T = blur_operator(3, 2, 1.0).T
    t0 = 1 / math.sqrt(2 * math.pi)
    t1 = math.exp(-0.5) / math.sqrt(2 * math.pi)
    np.testing.assert_allclose(T, [[t0, t1, 0], [t1, t0, t1], [0, t1, t0]],
                               rtol=1e-15)


def test_blur_matches_explicit_kronecker(rng):
    A = blur_operator(4, 3, 1.2)
    T = A.T
    K = np.zeros((16, 16))
    for i in range(4):
        for j in range(4):
            K[4 * i:4 * i + 4, 4 * j:4 * j + 4] = T[i, j] * T
    x = rng.standard_normal(16)
    np.testing.assert_allclose(A @ x, K @ x, atol=1e-13)
    X = x.reshape(4, 4, order='F')
    np.testing.assert_allclose(A @ x, (T @ X @ T).reshape(-1, order='F'),
                               atol=1e-13)


def test_blur_symmetric(rng):
    A = blur_operator(12, 5, 2.0)
    x, y = rng.standard_normal((2, 144))
    assert abs((A @ x) @ y - x @ (A @ y)) <= 1e-12 * np.linalg.norm(x) * np.linalg.norm(y)
    assert np.all(A.T[np.abs(np.subtract.outer(range(12), range(12))) >= 5] == 0)


def test_blur_invalid_band():
    with pytest.raises(InvalidSize):
        blur_operator(4, 5, 1.0)


@pytest.mark.parametrize('make', [
    lambda: dense_operator(np.arange(36.0).reshape(6, 6)),
    lambda: blur_operator(6, 3, 1.0),
    lambda: deriv1(9), lambda: deriv2(9), lambda: grad2d(5), lambda: identity(7),
])
def test_linearity(make, rng):
    assert _linearity(make(), rng) <= 1e-10


def test_null_spaces():
    n = 10
    t = np.arange(n, dtype=float)
    assert np.linalg.norm(deriv1(n) @ np.full(n, 3.0)) <= 1e-12
    assert np.linalg.norm(deriv2(n) @ (2 * t - 5)) <= 1e-12
    assert np.linalg.norm(grad2d(4) @ np.full(16, 0.7)) <= 1e-12
    assert np.all(deriv1(n).matrix[-1:] == 0)
    assert np.all(deriv2(n).matrix[-2:] == 0)


def test_dimension_check():
    with pytest.raises(DimensionMismatch):
        deriv1(3) @ np.ones(4)
