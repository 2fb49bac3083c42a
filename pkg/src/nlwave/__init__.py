"""Numerical laboratory for traveling fronts of nonlocal bistable
equations ``u_t = d u_xx + f(u, J*u)``.

Modules
-------
kernels
    Interaction kernels and their exponential-moment transforms.
models
    Bistable model problems and hypothesis checks.
charfn
    Characteristic functions, real roots, strip zero counts, regions.
greens
    Constant-coefficient Green's functions and Neumann-series
    perturbations.
wave
    Damped-Newton front solver with unknown speed.
asymptotics
    Tail rates, residue amplitudes, rate ordering.
spectrum
    Discretized linearization, zero mode, adjoint, classification.
cli
    Command-line front end (``nlwave``).
"""

from .charfn import CharFn, RootPair, real_roots, spectrum_regions
from .kernels import (bump_kernel, gaussian_kernel, laplace_kernel,
                      tabulated_kernel)
from .models import (ModelProblem, NonlinearitySpec, builtin_model,
                     check_hypotheses, load_model)
from .wave import SolverConfig, WaveSolution, solve_wave

__version__ = "0.1.0"

__all__ = [
    "CharFn",
    "RootPair",
    "real_roots",
    "spectrum_regions",
    "gaussian_kernel",
    "laplace_kernel",
    "bump_kernel",
    "tabulated_kernel",
    "ModelProblem",
    "NonlinearitySpec",
    "builtin_model",
    "check_hypotheses",
    "load_model",
    "SolverConfig",
    "WaveSolution",
    "solve_wave",
    "__version__",
]
