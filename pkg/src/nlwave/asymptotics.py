"""Tail asymptotics of fronts: predicted rates, measured rates, residues.

As xi -> +inf the profile approaches +1 at the rate of the stable real
characteristic root of the +inf limiting operator; as xi -> -inf the
unstable root of the -inf operator governs.  Measured rates come from a
log-linear fit of 1 -/+ U on a tail window; the leading amplitude comes
from the residue of the limiting resolvent at the governing root.
"""
from __future__ import annotations

import dataclasses

import numpy as np
from scipy import integrate

from .charfn import char_fn_minus, char_fn_plus, eval_delta_prime, real_roots
from .models import ModelProblem
from .wave import LatticeConvolution, WaveSolution

__all__ = [
    "DecayFit",
    "ResidueAmplitude",
    "FitQualityError",
    "predicted_rates",
    "fit_tail_rate",
    "residue_amplitude",
    "rates_vs_speed",
    "check_rate_ordering",
]

UNDERFLOW_FLOOR = 1e-14


class FitQualityError(RuntimeError):
    """Tail fit rejected: too few points or R^2 below threshold."""


@dataclasses.dataclass(frozen=True)
class DecayFit:
    """Log-linear tail fit of the approach to an end state."""

    side: int                 # +1 for xi -> +inf, -1 for xi -> -inf
    rate: float               # decay exponent, positive
    amplitude: float
    r_squared: float
    window: tuple
    n_points: int

    def relative_error(self, predicted: float) -> float:
        return abs(self.rate - predicted) / abs(predicted)


def predicted_rates(problem: ModelProblem, c: float) -> dict:
    """Governing tail exponents from the limiting characteristic roots.

    Returns the four real roots: ``rho_s_plus``/``rho_u_plus`` of the
    +inf operator and likewise for -inf.  The profile tails decay at
    ``-rho_s_plus`` (right) and ``rho_u_minus`` (left).
    """
    rp = real_roots(char_fn_plus(problem, c))
    rm = real_roots(char_fn_minus(problem, c))
    return {
        "rho_s_plus": rp.lambda_s, "rho_u_plus": rp.lambda_u,
        "rho_s_minus": rm.lambda_s, "rho_u_minus": rm.lambda_u,
        "rate_right": -rp.lambda_s, "rate_left": rm.lambda_u,
        "residual_max": max(rp.residual_s, rp.residual_u,
                            rm.residual_s, rm.residual_u),
    }


def fit_tail_rate(sol: WaveSolution, side: int,
                  window: tuple | None = None,
                  min_r2: float = 0.999) -> DecayFit:
    """Fit ``log|1 - side*U|`` against ``|xi|`` on a tail window.

    Parameters
    ----------
    sol : WaveSolution
    side : int
        +1 fits the right tail (approach to +1), -1 the left.
    window : (float, float), optional
        Range of |xi| used; defaults to ``(0.3 L, 0.8 L)``.
    min_r2 : float
        Fit-quality gate; a poorer fit raises FitQualityError.
    """
    if side not in (+1, -1):
        raise ValueError("side must be +1 or -1")
    if window is None:
        window = (0.3 * sol.L, 0.8 * sol.L)
    x = side * sol.xi
    y = 1.0 - side * sol.profile
    sel = (x > window[0]) & (x < window[1]) & (np.abs(y) > UNDERFLOW_FLOOR)
    x, y = x[sel], np.abs(y[sel])
    if x.size < 8:
        raise FitQualityError(
            f"only {x.size} usable tail points in window {window}")
    logy = np.log(y)
    slope, intercept = np.polyfit(x, logy, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((logy - pred) ** 2))
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    if r2 < min_r2:
        raise FitQualityError(f"tail fit R^2 = {r2:.6f} below {min_r2}")
    return DecayFit(side, -slope, float(np.exp(intercept)), r2,
                    tuple(window), int(x.size))


@dataclasses.dataclass(frozen=True)
class ResidueAmplitude:
    """Leading tail amplitude of U' from the resolvent residue.

    ``gamma`` uses the derivative of the characteristic function as the
    residue denominator.  A second value computed with the alternative
    printed denominator (the kernel-moment form, without the diffusion
    and coupling contributions) is carried alongside for comparison;
    the two agree only in the drift-dominated regime d = 0, b = 1.
    """

    gamma: float
    gamma_printed: float
    lambda_s: float
    numerator: float
    denominator: float
    denominator_printed: float
    d1: float                  # amplitude for 1 - U itself


def residue_amplitude(problem: ModelProblem, sol: WaveSolution) -> ResidueAmplitude:
    """Residue formula for the right-tail amplitude of U'.

    Differentiating the profile equation gives ``L_plus U' = h`` with
    ``h = -[f_r(U, J*U) - a_plus] U' - [f_s(U, J*U) - b_plus] J*(U')``,
    so the tail of U' is ``gamma * exp(lambda_s_plus * xi)`` with

        gamma = int h(s) exp(-lambda_s_plus s) ds / Delta'_plus(lambda_s_plus).
    """
    cf = char_fn_plus(problem, sol.speed)
    lam = real_roots(cf).lambda_s

    xi = sol.xi
    up = sol.derivative
    # J * U and J * U' with constant-extension closures (U' -> 0 outside)
    lc = LatticeConvolution(problem.kernel, xi.size, sol.h)
    s_conv = lc.apply_front(sol.profile)
    jup = lc.apply(up)
    fr = problem.nonlinearity.partial_r(sol.profile, s_conv)
    fs = problem.nonlinearity.partial_s(sol.profile, s_conv)
    h_vals = -((fr - problem.a_plus) * up + (fs - problem.b_plus) * jup)

    weight = np.exp(-lam * xi)
    numerator = float(integrate.simpson(h_vals * weight, x=xi))
    denominator = float(np.real(eval_delta_prime(cf, complex(lam))))

    # printed variant: first kernel moment minus the speed
    r = problem.kernel.sample_window()
    s_nodes = np.linspace(-r, r, 4001)
    moment = float(np.trapezoid(s_nodes * problem.kernel.evaluate(s_nodes)
                            * np.exp(-lam * s_nodes), s_nodes))
    denominator_printed = moment - sol.speed

    gamma = numerator / denominator
    gamma_printed = numerator / denominator_printed \
        if denominator_printed != 0 else float("inf")
    return ResidueAmplitude(gamma, gamma_printed, lam, numerator,
                            denominator, denominator_printed,
                            d1=-gamma / lam)


def rates_vs_speed(problem: ModelProblem, speeds) -> list:
    """Governing roots (rho_s_plus, rho_u_minus) for each speed."""
    out = []
    for c in speeds:
        r = predicted_rates(problem, c)
        out.append((c, r["rho_s_plus"], r["rho_u_minus"]))
    return out


def check_rate_ordering(entries) -> bool:
    """Both governing roots must increase with the speed.

    ``entries`` is the output of :func:`rates_vs_speed` (or compatible
    triples), ordered by speed.  Verifies

        rho_s(c1) < rho_s(c2) < 0 < rho_u(c1) < rho_u(c2)

    for every consecutive pair with c1 < c2.
    """
    entries = sorted(entries, key=lambda e: e[0])
    for (c1, s1, u1), (c2, s2, u2) in zip(entries, entries[1:]):
        if c1 == c2:
            continue
        if not (s1 < s2 < 0.0 < u1 < u2):
            return False
    return all(s < 0.0 < u for _, s, u in entries)
