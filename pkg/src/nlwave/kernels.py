"""Interaction kernels and their two-sided exponential-moment transforms.

A kernel J is an even, nonnegative, unit-mass weight function.  Its
transform is M(z) = integral of J(s) exp(-z s) ds, defined for complex z;
M enters every characteristic-function evaluation, so families with a
closed form (gaussian, laplace) use it and the rest fall back to
quadrature on precomputed nodes.
"""
from __future__ import annotations

import dataclasses
import math
from typing import Callable

import numpy as np
from scipy import integrate, interpolate, special

__all__ = [
    "KernelSpec",
    "gaussian_kernel",
    "laplace_kernel",
    "bump_kernel",
    "tabulated_kernel",
]


@dataclasses.dataclass(frozen=True)
class KernelSpec:
    """An interaction kernel with evaluator, transform and CDF.

    Attributes
    ----------
    family : str
        One of ``gaussian``, ``laplace``, ``bump``, ``tabulated``.
    params : dict
        Family parameters (``sigma``, ``beta``, ``radius`` or the sample
        table).
    evaluate : callable
        ``s -> J(s)``, vectorized.
    transform : callable
        ``z -> M(z) = int J(s) e^{-z s} ds``, vectorized over complex z.
    transform_prime : callable
        ``z -> M'(z) = -int s J(s) e^{-z s} ds``.
    cdf : callable
        ``x -> int_{-inf}^{x} J(s) ds``.
    support_radius : float
        Half-width of the support; ``inf`` for unbounded families.
    renormalization : float
        Factor applied at load time to restore unit mass (1.0 unless the
        input table was off).
    """

    family: str
    params: dict
    evaluate: Callable[[np.ndarray], np.ndarray]
    transform: Callable[[np.ndarray], np.ndarray]
    transform_prime: Callable[[np.ndarray], np.ndarray]
    cdf: Callable[[np.ndarray], np.ndarray]
    support_radius: float
    renormalization: float = 1.0

    def __call__(self, s):
        return self.evaluate(s)

    def mass(self, half_width: float | None = None, n: int = 20001) -> float:
        """Unit-mass check by quadrature on a symmetric window."""
        r = half_width or min(self.support_radius, self._default_window())
        s = np.linspace(-r, r, n)
        return float(np.trapezoid(self.evaluate(s), s))

    def _default_window(self) -> float:
        if self.family == "gaussian":
            return 12.0 * self.params["sigma"]
        if self.family == "laplace":
            return 40.0 / self.params["beta"]
        return self.support_radius

    def sample_window(self) -> float:
        """Half-width beyond which J is numerically negligible."""
        r = self._default_window()
        return r if math.isfinite(r) else self.support_radius


def _quadrature_transform(nodes: np.ndarray, weights: np.ndarray):
    """Build M, M' from fixed quadrature nodes for J with finite window."""

    def transform(z):
        z = np.asarray(z, dtype=complex)
        e = np.exp(-np.multiply.outer(z, nodes))
        return e @ weights

    def transform_prime(z):
        z = np.asarray(z, dtype=complex)
        e = np.exp(-np.multiply.outer(z, nodes))
        return -(e @ (nodes * weights))

    return transform, transform_prime


def gaussian_kernel(sigma: float) -> KernelSpec:
    """Gaussian kernel; M(z) = exp(z^2 sigma^2 / 2) in closed form."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    s2 = sigma * sigma

    def evaluate(s):
        s = np.asarray(s, dtype=float)
        return np.exp(-0.5 * s * s / s2) / (sigma * math.sqrt(2.0 * math.pi))

    def transform(z):
        z = np.asarray(z, dtype=complex)
        return np.exp(0.5 * z * z * s2)

    def transform_prime(z):
        z = np.asarray(z, dtype=complex)
        return s2 * z * np.exp(0.5 * z * z * s2)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (1.0 + special.erf(x / (sigma * math.sqrt(2.0))))

    return KernelSpec("gaussian", {"sigma": sigma}, evaluate, transform,
                      transform_prime, cdf, math.inf)


def laplace_kernel(beta: float) -> KernelSpec:
    """Two-sided exponential kernel; M(z) = beta^2/(beta^2 - z^2), |Re z| < beta."""
    if beta <= 0:
        raise ValueError("beta must be positive")

    def evaluate(s):
        s = np.asarray(s, dtype=float)
        return 0.5 * beta * np.exp(-beta * np.abs(s))

    def transform(z):
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z.real) >= beta):
            raise ValueError(f"laplace transform diverges for |Re z| >= {beta}")
        return beta * beta / (beta * beta - z * z)

    def transform_prime(z):
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z.real) >= beta):
            raise ValueError(f"laplace transform diverges for |Re z| >= {beta}")
        return 2.0 * beta * beta * z / (beta * beta - z * z) ** 2

    def cdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.5 * np.exp(beta * np.minimum(x, 0.0)),
                        1.0 - 0.5 * np.exp(-beta * np.maximum(x, 0.0)))

    return KernelSpec("laplace", {"beta": beta}, evaluate, transform,
                      transform_prime, cdf, math.inf)


def bump_kernel(radius: float, n_nodes: int = 240) -> KernelSpec:
    """Compactly supported C-infinity mollifier on [-radius, radius]."""
    if radius <= 0:
        raise ValueError("radius must be positive")

    def shape(s):
        s = np.asarray(s, dtype=float)
        t = s / radius
        out = np.zeros_like(t)
        inside = np.abs(t) < 1.0
        out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
        return out

    norm, _ = integrate.quad(lambda s: float(shape(np.array([s]))[0]),
                             -radius, radius, limit=200)

    def evaluate(s):
        return shape(s) / norm

    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    nodes = nodes * radius
    weights = weights * radius * evaluate(nodes)
    transform, transform_prime = _quadrature_transform(nodes, weights)

    fine = np.linspace(-radius, radius, 20001)
    cum = integrate.cumulative_simpson(evaluate(fine), x=fine, initial=0.0)
    cum /= cum[-1]
    interp = interpolate.interp1d(fine, cum, kind="cubic",
                                  bounds_error=False, fill_value=(0.0, 1.0))

    def cdf(x):
        return interp(np.asarray(x, dtype=float))

    return KernelSpec("bump", {"radius": radius}, evaluate, transform,
                      transform_prime, cdf, radius)


def tabulated_kernel(samples_s: np.ndarray, samples_j: np.ndarray) -> KernelSpec:
    """Kernel from a two-column table (s, J(s)); renormalized to unit mass.

    The table must be uniformly spaced and cover a symmetric window.
    """
    s = np.asarray(samples_s, dtype=float)
    j = np.asarray(samples_j, dtype=float)
    if s.ndim != 1 or s.shape != j.shape or s.size < 5:
        raise ValueError("tabulated kernel needs matching 1-d columns, >= 5 rows")
    ds = np.diff(s)
    if not np.allclose(ds, ds[0], rtol=1e-8, atol=1e-12):
        raise ValueError("tabulated kernel requires uniform spacing")
    mass = np.trapezoid(j, s)
    if mass <= 0:
        raise ValueError("tabulated kernel has nonpositive mass")
    factor = 1.0 / mass
    j = j * factor

    interp = interpolate.interp1d(s, j, bounds_error=False, fill_value=0.0)

    def evaluate(x):
        return interp(np.asarray(x, dtype=float))

    weights = np.full_like(j, ds[0])
    weights[0] *= 0.5
    weights[-1] *= 0.5
    transform, transform_prime = _quadrature_transform(s, j * weights)

    cum = integrate.cumulative_trapezoid(j, s, initial=0.0)
    cinterp = interpolate.interp1d(s, cum, bounds_error=False,
                                   fill_value=(0.0, 1.0))

    def cdf(x):
        return cinterp(np.asarray(x, dtype=float))

    radius = float(max(abs(s[0]), abs(s[-1])))
    return KernelSpec("tabulated", {"spacing": float(ds[0]), "rows": s.size},
                      evaluate, transform, transform_prime, cdf, radius,
                      renormalization=factor)


def kernel_diagnostics(kernel: KernelSpec, n: int = 2001) -> dict:
    """Evenness / nonnegativity / mass / transform sanity numbers."""
    r = kernel.sample_window()
    s = np.linspace(-r, r, n)
    vals = kernel.evaluate(s)
    evenness = float(np.max(np.abs(vals - vals[::-1])))
    min_value = float(np.min(vals))
    mass_err = abs(kernel.mass() - 1.0)
    m0 = complex(kernel.transform(np.array([0.0 + 0.0j]))[0])
    return {
        "evenness": evenness,
        "min_value": min_value,
        "mass_error": float(mass_err),
        "transform_at_zero_error": abs(m0 - 1.0),
    }
