"""Figure rendering for the CLI report path.

Every reporting command renders its figures to PNG files next to the
delimited text output.  The Agg backend is forced so plotting works in
headless environments.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = [
    "plot_profile",
    "plot_tails",
    "plot_spectrum",
    "plot_greens",
]


def plot_profile(sol, path):
    """Front profile and its derivative."""
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(sol.xi, sol.profile, lw=1.5, label="U")
    ax.plot(sol.xi, sol.derivative, lw=1.0, label="U'")
    ax.axhline(0.0, color="0.8", lw=0.5)
    ax.set_xlabel(r"$\xi$")
    ax.set_title(f"{sol.problem_name}: c = {sol.speed:.6f}")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def plot_tails(sol, fits, predicted, path):
    """Semilog tails against the fitted and predicted exponentials."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for fit, color in zip(fits, ("C0", "C1")):
        x = fit.side * sol.xi
        y = np.abs(1.0 - fit.side * sol.profile)
        sel = (x > 0) & (y > 1e-16)
        label = "right" if fit.side > 0 else "left"
        ax.semilogy(x[sel], y[sel], color=color, lw=1.0,
                    label=f"{label} tail")
        xs = np.linspace(*fit.window, 50)
        ax.semilogy(xs, fit.amplitude * np.exp(-fit.rate * xs),
                    color=color, ls="--", lw=1.0,
                    label=f"fit rate {fit.rate:.4f}")
    ax.set_title("predicted rates: "
                 + ", ".join(f"{r:.4f}" for r in predicted))
    ax.set_xlabel(r"$|\xi|$")
    ax.set_ylabel(r"$|1 \mp U|$")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def plot_spectrum(rep, regions, path):
    """Eigenvalues in the complex plane with the strip bounds."""
    fig, ax = plt.subplots(figsize=(7, 4))
    lam = rep.eigenvalues
    edge = rep.outer_mass > 0.5
    ax.scatter(lam[~edge].real, lam[~edge].imag, s=6, label="localized")
    if edge.any():
        ax.scatter(lam[edge].real, lam[edge].imag, s=6, marker="x",
                   label="delocalized")
    ax.scatter([rep.lambda0.real], [rep.lambda0.imag], s=40, marker="o",
               facecolors="none", edgecolors="r", label=r"$\lambda_0$")
    for x, ls in ((regions.iota_under, ":"), (regions.iota_bar, ":")):
        ax.axvline(x, color="0.4", ls=ls, lw=0.8)
    ax.set_xlabel(r"Re $\lambda$")
    ax.set_ylabel(r"Im $\lambda$")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def plot_greens(gt, path):
    """G0 on linear and semilog axes."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(gt.xi, gt.values.real, lw=1.0)
    ax1.set_xlabel(r"$\xi$")
    ax1.set_title(r"$G_0$")
    y = np.abs(gt.values.real)
    sel = y > 1e-16
    ax2.semilogy(gt.xi[sel], y[sel], lw=1.0)
    ax2.set_xlabel(r"$\xi$")
    ax2.set_title(rf"decay rates {gt.decay_rate_minus:.3f} / "
                  rf"{gt.decay_rate_plus:.3f}")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
