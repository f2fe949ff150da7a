import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from atreg.errors import RankDeficient, Singular
from atreg.linalg import lstsq, singular_values, solve_dense


def test_lstsq_identity():
    np.testing.assert_array_equal(lstsq(np.eye(3), [1., 2., 3.]), [1, 2, 3])


def test_lstsq_mean():
    np.testing.assert_allclose(lstsq([[1.], [1.]], [1., 3.]), [2.0])


def test_lstsq_matches_normal_equations(rng):
    M = rng.standard_normal((6, 3))
    rhs = rng.standard_normal(6)
    oracle = np.linalg.solve(M.T @ M, M.T @ rhs)
    y = lstsq(M, rhs)
    assert np.linalg.norm(y - oracle) <= 1e-10 * np.linalg.norm(oracle)


def test_lstsq_rank_deficient_reports_rank():
    M = np.array([[1., 2.], [2., 4.], [3., 6.]])
    with pytest.raises(RankDeficient) as info:
        lstsq(M, [1., 2., 3.])
    assert info.value.rank == 1


def test_lstsq_minimality_and_orthogonal_residual(rng):
    M = rng.standard_normal((8, 4))
    rhs = rng.standard_normal(8)
    y = lstsq(M, rhs)
    best = np.linalg.norm(M @ y - rhs)
    for _ in range(20):
        d = rng.standard_normal(4) * 10.0 ** rng.uniform(-6, 0)
        assert np.linalg.norm(M @ (y + d) - rhs) >= best - 1e-12
    grad = M.T @ (M @ y - rhs)
    assert np.linalg.norm(grad) <= 1e-8 * np.linalg.norm(M, 2) * np.linalg.norm(rhs)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (7, 3), elements=st.floats(-10, 10)),
       arrays(np.float64, 7, elements=st.floats(-10, 10)))
def test_lstsq_residual_orthogonality_property(M, rhs):
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] < 1e-3 * max(s[0], 1e-300):
        return
    y = lstsq(M, rhs)
    grad = M.T @ (M @ y - rhs)
    assert np.linalg.norm(grad) <= 1e-8 * s[0] * max(np.linalg.norm(rhs), 1e-300)


def test_solve_dense_trivial():
    np.testing.assert_array_equal(solve_dense(np.eye(2), [3., 4.]), [3, 4])
    np.testing.assert_allclose(solve_dense([[2., 0.], [0., 4.]], [2., 4.]),
                               [1, 1])


def test_solve_dense_residual(rng):
    M = rng.standard_normal((5, 5)) + 5 * np.eye(5)
    rhs = rng.standard_normal(5)
    y = solve_dense(M, rhs)
    assert np.linalg.norm(M @ y - rhs) / np.linalg.norm(rhs) < 1e-12


def test_solve_dense_singular():
    with pytest.raises(Singular):
        solve_dense([[1., 2.], [2., 4.]], [1., 1.])


def test_singular_values_trivial():
    np.testing.assert_allclose(singular_values(np.diag([3., 1.])), [3, 1])
    np.testing.assert_allclose(singular_values([[0., 1.], [1., 0.]]), [1, 1])


def test_singular_values_eigen_oracle(rng):
    M = rng.standard_normal((6, 4))
    s = singular_values(M)
    ev = np.sort(np.linalg.eigvalsh(M.T @ M))[::-1]
    np.testing.assert_allclose(s ** 2, ev, atol=1e-8)
    assert s.shape == (4,)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (5, 3), elements=st.floats(-1e3, 1e3)))
def test_singular_values_sorted_and_transpose_invariant(M):
    s = singular_values(M)
    assert np.all(np.diff(s) <= 0) and np.all(s >= 0)
    np.testing.assert_allclose(singular_values(M.T), s,
                               atol=1e-10 * max(s[0], 1.0))


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        lstsq([[np.nan], [1.]], [1., 1.])
