import math

import numpy as np
import pytest

from homobs.errors import DefinitenessError, DimensionError
from homobs.linalg import (
    is_nilpotent,
    is_positive_definite,
    kron,
    mat_exp,
    solve_least_squares,
    sym_eig,
    weighted_norm,
)

from conftest import SHIFT


def test_mat_exp_zero_step_is_identity():
    m = np.random.default_rng(1).standard_normal((3, 3))
    assert np.array_equal(mat_exp(m, 0.0), np.eye(3))


def test_mat_exp_diagonal():
    np.testing.assert_allclose(mat_exp(np.diag([1.0, 2.0]), math.log(2)), np.diag([2.0, 4.0]), rtol=1e-12)


@pytest.mark.parametrize("s", [-3.0, 0.5, 7.0])
def test_mat_exp_nilpotent_series_terminates(s):
    expected = np.eye(3) + s * SHIFT + 0.5 * s * s * SHIFT @ SHIFT
    np.testing.assert_allclose(mat_exp(SHIFT, s), expected, rtol=1e-12, atol=1e-12)


def test_mat_exp_group_property():
    m = np.random.default_rng(2).standard_normal((4, 4))
    np.testing.assert_allclose(mat_exp(m, 0.7) @ mat_exp(m, -0.7), np.eye(4), atol=1e-10)


def test_mat_exp_rejects_non_square():
    with pytest.raises(DimensionError):
        mat_exp(np.ones((2, 3)))


def test_sym_eig_small_cases():
    np.testing.assert_allclose(sym_eig(np.diag([3.0, 1.0, 2.0])).eigenvalues, [1, 2, 3])
    np.testing.assert_allclose(sym_eig([[0.0, 1.0], [1.0, 0.0]]).eigenvalues, [-1, 1], atol=1e-14)


def test_sym_eig_reconstruction_and_orthogonality():
    rng = np.random.default_rng(3)
    b = rng.standard_normal((6, 6))
    s = b + b.T
    res = sym_eig(s)
    v = res.eigenvectors
    np.testing.assert_allclose(res.reconstruct(), s, atol=1e-10)
    np.testing.assert_allclose(v.T @ v, np.eye(6), atol=1e-12)
    assert np.all(np.diff(res.eigenvalues) >= 0)
    np.testing.assert_allclose(res.eigenvalues, np.linalg.eigvalsh(s), atol=1e-10)


def test_sym_eig_tiny_entries_do_not_overflow():
    s = np.diag([1.0, 2.0]) + np.array([[0.0, 1e-310], [1e-310, 0.0]])
    with np.errstate(over="raise", invalid="raise"):
        np.testing.assert_allclose(sym_eig(s).eigenvalues, [1.0, 2.0])


def test_kron_cases():
    assert np.array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    d = np.diag([2.0, 3.0])
    out = kron(swap, d)
    assert out.shape == (4, 4)
    assert np.array_equal(out[:2, 2:], d) and np.array_equal(out[2:, :2], d)
    assert not out[:2, :2].any() and not out[2:, 2:].any()


def test_weighted_norm():
    x = np.array([3.0, -4.0])
    assert weighted_norm(x, np.eye(2)) == pytest.approx(5.0)
    assert weighted_norm(np.zeros(2), np.diag([4.0, 9.0])) == 0.0
    assert weighted_norm([1.0, 1.0], np.diag([4.0, 9.0])) == pytest.approx(math.sqrt(13))


def test_weighted_norm_negative_radicand():
    with pytest.raises(DefinitenessError):
        weighted_norm([1.0, 0.0], np.diag([-1.0, 1.0]))
    assert weighted_norm([1.0, 0.0], np.diag([-1e-14, 1.0])) == 0.0


def test_is_positive_definite():
    r = is_positive_definite(np.eye(3), 0.5)
    assert r.ok and r.min_eigenvalue == pytest.approx(1.0)
    assert not is_positive_definite(np.diag([1.0, -1e-3]), 0.0).ok


def test_least_squares():
    b = np.array([1.0, -2.0, 0.5])
    np.testing.assert_allclose(solve_least_squares(np.eye(3), b).x, b)
    rng = np.random.default_rng(4)
    m = rng.standard_normal((8, 3))
    x0 = rng.standard_normal(3)
    res = solve_least_squares(m, m @ x0)
    np.testing.assert_allclose(res.x, x0, atol=1e-12)
    assert res.residual < 1e-10 and res.consistent
    col = solve_least_squares(np.ones((2, 1)), [1.0, 3.0])
    assert col.x[0] == pytest.approx(2.0)
    assert col.residual == pytest.approx(math.sqrt(2))
    assert not col.consistent


def test_is_nilpotent():
    assert is_nilpotent(SHIFT)
    assert not is_nilpotent(np.eye(2))
    u = np.triu(np.random.default_rng(5).standard_normal((4, 4)), k=1)
    assert is_nilpotent(u)
