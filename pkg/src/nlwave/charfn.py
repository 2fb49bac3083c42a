"""Constant-coefficient characteristic functions and their zero structure.

For the operator ``L0 v = d v'' - c v' + a v + b J*v`` (shifted by a
spectral parameter lambda) the characteristic function is

    Delta(z) = d z^2 - c z + (a - lambda) + b M(z),

with M the kernel's exponential-moment transform.  This module locates
the two real roots, counts complex zeros in vertical strips via the
argument principle, and decides hyperbolicity / spectral regions.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy import optimize

from .kernels import KernelSpec

__all__ = [
    "CharFn",
    "RootPair",
    "RegionReport",
    "HypothesisError",
    "BracketError",
    "ContourError",
    "eval_delta",
    "eval_delta_prime",
    "real_roots",
    "count_zeros_in_strip",
    "is_hyperbolic",
    "hyperbolicity_margin",
    "spectrum_regions",
]


class HypothesisError(ValueError):
    """Root-lemma preconditions (a<0<b<-a after shift) violated."""


class BracketError(RuntimeError):
    """No sign change found within the bounded outward search."""


class ContourError(RuntimeError):
    """Contour too close to a zero, or non-integer winding number."""


@dataclasses.dataclass(frozen=True)
class CharFn:
    """One constant-coefficient characteristic function."""

    d: float
    c: float
    a: float
    b: float
    kernel: KernelSpec
    lam: complex = 0.0

    def __call__(self, z):
        return eval_delta(self, z)

    def shifted(self, lam: complex) -> "CharFn":
        return dataclasses.replace(self, lam=lam)

    def adjoint(self) -> "CharFn":
        """Characteristic function of the formal adjoint (c -> -c)."""
        return dataclasses.replace(self, c=-self.c,
                                   lam=np.conj(self.lam))


@dataclasses.dataclass(frozen=True)
class RootPair:
    """The unique negative / positive real zeros of Delta."""

    lambda_s: float
    lambda_u: float
    residual_s: float
    residual_u: float


def eval_delta(cf: CharFn, z):
    """Delta(z) = d z^2 - c z + (a - lambda) + b M(z)."""
    z = np.asarray(z, dtype=complex)
    return cf.d * z * z - cf.c * z + (cf.a - cf.lam) + cf.b * cf.kernel.transform(z)


def eval_delta_prime(cf: CharFn, z):
    """Delta'(z) = 2 d z - c + b M'(z)."""
    z = np.asarray(z, dtype=complex)
    return 2.0 * cf.d * z - cf.c + cf.b * cf.kernel.transform_prime(z)


def real_roots(cf: CharFn, z_max: float = 50.0) -> RootPair:
    """Locate the two real zeros lambda_s < 0 < lambda_u of Delta.

    Requires the shifted constants to satisfy a < 0, b > 0, b < -a so the
    root lemma applies.  Brackets are found by outward doubling from 0,
    then solved by Brent's method and polished with one Newton step that
    is rejected if it escapes the bracket.
    """
    if abs(cf.lam.imag if isinstance(cf.lam, complex) else 0.0) > 1e-12:
        raise HypothesisError("real_roots needs a real spectral shift")
    a_eff = cf.a - (cf.lam.real if isinstance(cf.lam, complex) else cf.lam)
    if not (a_eff < 0.0 and cf.b > 0.0 and cf.b < -a_eff):
        raise HypothesisError(
            f"need a<0<b<-a after shift, got a={a_eff}, b={cf.b}")

    def delta_real(x):
        return float(np.real(eval_delta(cf, complex(x))))

    roots = []
    for direction in (-1.0, 1.0):
        x = direction
        lo = 0.0
        while delta_real(x) < 0.0:
            lo = x
            x *= 2.0
            if abs(x) > z_max:
                raise BracketError(
                    f"no sign change up to |z|={z_max} in direction {direction}")
        bracket = sorted((lo, x))
        root = optimize.brentq(delta_real, *bracket, xtol=1e-14, rtol=1e-15)
        # one Newton polish, kept only inside the bracket
        dp = eval_delta_prime(cf, complex(root)).real
        if dp != 0.0:
            cand = root - delta_real(root) / dp
            if bracket[0] <= cand <= bracket[1]:
                root = cand
        roots.append(root)
    lam_s, lam_u = roots
    return RootPair(lam_s, lam_u,
                    abs(eval_delta(cf, complex(lam_s))),
                    abs(eval_delta(cf, complex(lam_u))))


def _contour_points(re_lo, re_hi, im_max, n_per_edge):
    bottom = re_lo + 1j * -im_max + np.linspace(0, re_hi - re_lo, n_per_edge,
                                                endpoint=False)
    right = re_hi + 1j * np.linspace(-im_max, im_max, n_per_edge,
                                     endpoint=False)
    top = re_hi - np.linspace(0, re_hi - re_lo, n_per_edge, endpoint=False) \
        + 1j * im_max
    left = re_lo + 1j * np.linspace(im_max, -im_max, n_per_edge,
                                    endpoint=False)
    return np.concatenate([bottom, right, top, left])


def count_zeros_in_strip(cf: CharFn, re_lo: float, re_hi: float,
                         im_max: float, n_per_edge: int = 512,
                         max_refine: int = 14) -> int:
    """Winding number of Delta around 0 along a rectangle contour.

    Counts zeros (with multiplicity) in the closed rectangle
    ``[re_lo, re_hi] x [-im_max, im_max]``.  The phase increment along
    the boundary is accumulated on an adaptively refined sampling; a
    boundary point with |Delta| < 1e-8 or a winding more than 0.1 away
    from an integer raises ContourError.
    """
    pts = _contour_points(re_lo, re_hi, im_max, n_per_edge)
    vals = eval_delta(cf, pts)
    for _ in range(max_refine):
        if np.min(np.abs(vals)) < 1e-8:
            raise ContourError("contour passes too close to a zero of Delta")
        phases = np.angle(vals)
        diffs = np.angle(np.exp(1j * (np.roll(phases, -1) - phases)))
        bad = np.where(np.abs(diffs) > 0.8)[0]
        if bad.size == 0:
            break
        mids = 0.5 * (pts[bad] + np.roll(pts, -1)[bad])
        insert_at = bad + 1
        pts = np.insert(pts, insert_at, mids)
        vals = np.insert(vals, insert_at, eval_delta(cf, mids))
    else:
        raise ContourError("contour refinement failed to resolve the phase")
    phases = np.angle(vals)
    diffs = np.angle(np.exp(1j * (np.roll(phases, -1) - phases)))
    winding = float(np.sum(diffs) / (2.0 * math.pi))
    if abs(winding - round(winding)) > 0.1:
        raise ContourError(f"non-integer winding {winding:.4f}; "
                           "enlarge im_max or refine")
    return int(round(winding))


def _scan_window(cf: CharFn, margin: float = 1.0) -> float:
    """eta beyond which |Delta(i eta)| is provably bounded away from 0.

    Uses |M(i eta)| <= M(0) = 1 (kernel nonnegative, unit mass).
    """
    r = abs(cf.a - cf.lam) + abs(cf.b) + margin
    if cf.d > 0:
        return math.sqrt(r / cf.d) + abs(cf.c) / cf.d + 1.0
    if abs(cf.c) > 0:
        return r / abs(cf.c) + 1.0
    # no drift, no diffusion: M(i eta) -> 0, scan a fixed window
    return 50.0


def hyperbolicity_margin(cf: CharFn, n: int = 4001) -> tuple[float, float]:
    """(min |Delta(i eta)|, argmin eta) over the certified scan window."""
    eta_max = _scan_window(cf)
    eta = np.linspace(-eta_max, eta_max, n)
    vals = np.abs(eval_delta(cf, 1j * eta))
    k = int(np.argmin(vals))
    lo = eta[max(k - 1, 0)]
    hi = eta[min(k + 1, n - 1)]
    res = optimize.minimize_scalar(
        lambda e: float(np.abs(eval_delta(cf, complex(0.0, e)))),
        bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-12})
    if res.fun < vals[k]:
        return float(res.fun), float(res.x)
    return float(vals[k]), float(eta[k])


def is_hyperbolic(cf: CharFn, tol: float = 1e-8) -> bool:
    """True iff Delta(i eta) stays away from 0 on the whole axis."""
    margin, _ = hyperbolicity_margin(cf)
    return margin > tol


@dataclasses.dataclass(frozen=True)
class RegionReport:
    """Essential-spectrum strip bounds and the d>0 region predicate.

    The parabola-like region is recorded in two printed variants that
    disagree in the factor multiplying the square root (1 versus c^2);
    both are reported, neither is silently preferred.
    """

    iota_bar: float
    iota_under: float
    d: float
    c: float
    b_min: float

    def in_strip(self, lam: complex, margin: float = 0.0) -> bool:
        return (self.iota_under - margin <= np.real(lam)
                <= self.iota_bar + margin)

    def in_omega_plus(self, lam: complex) -> bool:
        return np.real(lam) > self.iota_bar

    def in_omega_minus(self, lam: complex) -> bool:
        return np.real(lam) < self.iota_under

    def _xi(self, lam: complex, factor: float) -> bool:
        re, im = np.real(lam), np.imag(lam)
        if re > self.iota_bar:
            return True
        return abs(im) > factor * math.sqrt(self.iota_bar - re) + self.b_min

    def in_xi_unit(self, lam: complex) -> bool:
        """Region with unit factor on the square root."""
        return self._xi(lam, 1.0)

    def in_xi_drift(self, lam: complex) -> bool:
        """Region with the c^2 factor on the square root."""
        return self._xi(lam, self.c * self.c)

    def as_dict(self) -> dict:
        return {"iota_bar": self.iota_bar, "iota_under": self.iota_under,
                "d": self.d, "c": self.c, "b_min": self.b_min}


def spectrum_regions(problem, c: float) -> RegionReport:
    """Strip bounds and region parameters from the equilibrium constants."""
    iota_bar = max(problem.a_plus + problem.b_plus,
                   problem.a_minus + problem.b_minus)
    iota_under = min(problem.a_plus - problem.b_plus,
                     problem.a_minus - problem.b_minus)
    return RegionReport(iota_bar, iota_under, problem.d, c,
                        min(problem.b_plus, problem.b_minus))


def char_fn_plus(problem, c: float, lam: complex = 0.0) -> CharFn:
    """Characteristic function of the +infinity limiting operator."""
    return CharFn(problem.d, c, problem.a_plus, problem.b_plus,
                  problem.kernel, lam)


def char_fn_minus(problem, c: float, lam: complex = 0.0) -> CharFn:
    """Characteristic function of the -infinity limiting operator."""
    return CharFn(problem.d, c, problem.a_minus, problem.b_minus,
                  problem.kernel, lam)
