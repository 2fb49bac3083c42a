import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from nlwave.kernels import (bump_kernel, gaussian_kernel, kernel_diagnostics,
                            laplace_kernel, tabulated_kernel)


def _tabulated_from_gaussian(sigma=1.0, half=8.0, rows=801):
    s = np.linspace(-half, half, rows)
    return tabulated_kernel(s, gaussian_kernel(sigma).evaluate(s))


ALL_KERNELS = [
    gaussian_kernel(1.3),
    laplace_kernel(2.0),
    bump_kernel(2.5),
    _tabulated_from_gaussian(),
]


@pytest.mark.parametrize("kernel", ALL_KERNELS, ids=lambda k: k.family)
def test_unit_mass_even_nonnegative(kernel):
    diag = kernel_diagnostics(kernel)
    assert diag["mass_error"] < 1e-5
    assert diag["evenness"] < 1e-10
    assert diag["min_value"] >= 0.0
    assert diag["transform_at_zero_error"] < 1e-8


@pytest.mark.parametrize("kernel", ALL_KERNELS, ids=lambda k: k.family)
def test_transform_matches_quadrature(kernel):
    r = min(kernel.sample_window(), 10.0)
    s = np.linspace(-r, r, 20001)
    j = kernel.evaluate(s)
    for z in (0.4, -0.7 + 0.3j, 1.1j):
        direct = integrate.simpson(j * np.exp(-z * s), x=s)
        assert abs(kernel.transform(np.array([z]))[0] - direct) < 1e-4


@pytest.mark.parametrize("kernel", ALL_KERNELS, ids=lambda k: k.family)
def test_transform_prime_is_derivative(kernel):
    eps = 1e-6
    for z in (0.3, 0.5 - 0.2j):
        fd = (kernel.transform(np.array([z + eps]))[0]
              - kernel.transform(np.array([z - eps]))[0]) / (2 * eps)
        assert abs(kernel.transform_prime(np.array([z]))[0] - fd) < 1e-6


@pytest.mark.parametrize("kernel", ALL_KERNELS, ids=lambda k: k.family)
def test_cdf_monotone_with_correct_limits(kernel):
    r = kernel.sample_window()
    x = np.linspace(-r, r, 501)
    c = np.asarray(kernel.cdf(x), dtype=float)
    assert np.all(np.diff(c) > -1e-12)
    assert abs(c[0]) < 1e-6 and abs(c[-1] - 1.0) < 1e-6
    # symmetry of the CDF about the origin
    assert abs(float(kernel.cdf(np.array([0.0]))[0]) - 0.5) < 1e-6


def test_gaussian_closed_forms():
    k = gaussian_kernel(0.8)
    z = np.array([0.5 + 0.25j])
    assert np.allclose(k.transform(z), np.exp(0.5 * z * z * 0.64))
    with pytest.raises(ValueError):
        gaussian_kernel(0.0)


def test_laplace_transform_domain():
    k = laplace_kernel(1.5)
    assert np.allclose(k.transform(np.array([0.5 + 0j])),
                       1.5 ** 2 / (1.5 ** 2 - 0.25))
    with pytest.raises(ValueError):
        k.transform(np.array([1.6 + 0j]))
    with pytest.raises(ValueError):
        k.transform_prime(np.array([-2.0 + 0j]))


def test_bump_compact_support():
    k = bump_kernel(2.0)
    assert k.support_radius == 2.0
    assert np.all(k.evaluate(np.array([2.0, 2.5, -3.0])) == 0.0)
    assert k.evaluate(np.array([0.0]))[0] > 0.0


def test_tabulated_renormalization_and_validation():
    s = np.linspace(-5, 5, 201)
    j = np.exp(-s * s)          # mass sqrt(pi), not 1
    k = tabulated_kernel(s, j)
    assert abs(k.renormalization - 1.0 / np.sqrt(np.pi)) < 1e-3
    assert abs(k.mass() - 1.0) < 1e-4
    with pytest.raises(ValueError):
        tabulated_kernel(s[:5], j[:4])
    with pytest.raises(ValueError):
        tabulated_kernel(np.array([0, 1, 3, 4, 5.0]), np.ones(5))
    with pytest.raises(ValueError):
        tabulated_kernel(s, -j)


@settings(max_examples=25, deadline=None)
@given(sigma=st.floats(0.3, 3.0), eta=st.floats(-5.0, 5.0))
def test_gaussian_axis_transform_bounded(sigma, eta):
    # |M(i eta)| <= M(0) = 1 for any nonnegative unit-mass kernel
    k = gaussian_kernel(sigma)
    assert abs(k.transform(np.array([1j * eta]))[0]) <= 1.0 + 1e-12
