import math

import numpy as np
import pytest

from homobs.errors import DilationError, DimensionError
from homobs.homogeneity import (
    Dilation,
    check_field_homogeneity,
    dilate,
    hom_norm,
    hom_norm_bounds,
    hom_norm_gradient,
)

from conftest import SHIFT


def random_dilation(rng, n=3):
    while True:
        g = np.eye(n) + 0.4 * rng.standard_normal((n, n))
        try:
            return Dilation(g, np.eye(n))
        except DilationError:
            continue


def test_invalid_generators():
    with pytest.raises(DilationError):
        Dilation(-np.eye(2), np.eye(2))
    with pytest.raises(DilationError):
        Dilation(np.eye(2), np.diag([1.0, -1.0]))
    # anti-Hurwitz but not monotone in the Euclidean norm
    with pytest.raises(DilationError):
        Dilation(np.array([[1.0, 10.0], [0.0, 1.0]]), np.eye(2))


def test_dilate_cases():
    x = np.array([1.0, -2.0, 0.5])
    np.testing.assert_allclose(dilate(Dilation.euler(3), 0.3, x), math.exp(0.3) * x)
    d = Dilation(np.diag([1.0, 2.0]), np.eye(2))
    np.testing.assert_allclose(dilate(d, math.log(2), [1.0, 1.0]), [2.0, 4.0])
    g = random_dilation(np.random.default_rng(0))
    assert np.array_equal(dilate(g, 0.0, x), x)


def test_hom_norm_closed_forms():
    x = np.array([3.0, 4.0])
    assert hom_norm(Dilation.euler(2), x).value == pytest.approx(5.0, rel=1e-14)
    d = Dilation(np.diag([1.0, 2.0]), np.eye(2))
    for a in (0.01, 3.0, -250.0):
        assert hom_norm(d, [0.0, a]).value == pytest.approx(math.sqrt(abs(a)), rel=1e-10)
    assert hom_norm(d, [0.0, 0.0]).value == 0.0


def test_hom_norm_matches_grid_scan():
    rng = np.random.default_rng(1)
    d = random_dilation(rng)
    x = rng.standard_normal(3)
    s = hom_norm(d, x).s_x
    grid = np.linspace(s - 1e-3, s + 1e-3, 2001)
    phi = [abs(np.linalg.norm(dilate(d, -g, x)) - 1.0) for g in grid]
    assert abs(grid[int(np.argmin(phi))] - s) <= 1.5e-6


def test_canonical_norm_scaling():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        d = random_dilation(rng)
        x = rng.standard_normal(3) * 10 ** rng.uniform(-3, 3)
        s = rng.uniform(-3, 3)
        lhs = hom_norm(d, dilate(d, s, x)).value
        worst = max(worst, abs(lhs - math.exp(s) * hom_norm(d, x).value) / lhs)
    assert worst < 1e-8


def test_bounds_collapse_for_euler():
    d = Dilation.euler(3)
    assert d.exponents() == pytest.approx((1.0, 1.0))
    lo, hi = hom_norm_bounds(d, [1.0, 2.0, 2.0])
    assert lo == pytest.approx(3.0) and hi == pytest.approx(3.0)


def test_bounds_on_unit_sphere_and_random_samples():
    rng = np.random.default_rng(3)
    d = Dilation(np.diag([1.0, 1.5, 2.0]), np.eye(3))
    v = rng.standard_normal(3)
    unit = dilate(d, -hom_norm(d, v).s_x, v)
    assert hom_norm_bounds(d, unit) == pytest.approx((1.0, 1.0), rel=1e-9)
    for _ in range(100):
        hom_norm_bounds(d, rng.standard_normal(3) * 10 ** rng.uniform(-4, 4))


def test_field_homogeneity_examples():
    assert check_field_homogeneity(lambda x: SHIFT @ x, Dilation.euler(3), 0.0) < 1e-14
    assert check_field_homogeneity(lambda x: x**3, Dilation.euler(1), 2.0) < 1e-12
    assert check_field_homogeneity(lambda x: x**3, Dilation.euler(1), 1.0) > 1e-2


def test_gradient_euclidean():
    x = np.array([1.0, -2.0, 2.0])
    np.testing.assert_allclose(hom_norm_gradient(Dilation.euler(3), x), x / 3.0, rtol=1e-12)
    with pytest.raises(DimensionError):
        hom_norm_gradient(Dilation.euler(3), np.zeros(3))


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(4)
    for _ in range(5):
        d = random_dilation(rng)
        x = rng.standard_normal(3)
        grad = hom_norm_gradient(d, x)
        fd = np.array([
            (hom_norm(d, x + 1e-6 * e).value - hom_norm(d, x - 1e-6 * e).value) / 2e-6 for e in np.eye(3)
        ])
        assert np.linalg.norm(grad - fd) <= 1e-5 * np.linalg.norm(grad)
        # derivative along the generator equals the norm itself
        assert grad @ d.G_d @ x == pytest.approx(hom_norm(d, x).value, rel=1e-8)


def test_hom_norm_continuity_at_zero():
    d = Dilation(np.diag([1.0, 2.0, 3.0]), np.eye(3))
    v = np.array([0.3, -0.2, 0.9])
    vals = [hom_norm(d, 10.0**-k * v).value for k in range(0, 13)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-4
