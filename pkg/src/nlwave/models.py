"""Model problems: kernels plus bistable nonlinearities, and the
numeric checks of the standing hypotheses (H1)-(H5).

A model is the triple (d, J, f) for the evolution equation
``u_t = d u_xx + f(u, J*u)`` with stable equilibria normalized to -1 and
+1.  The built-in catalog carries diffusive variants of three classical
examples (neural field, Ising continuum limit, phase transition).  The
coupling strengths and kernel widths are chosen so the front tails decay
at moderate rates (roughly 0.4 to 0.6): fast enough to be asymptotic
well inside a window of half-width 40, slow enough that the tail stays
above the discretization floor across the fitting range.
"""
from __future__ import annotations

import dataclasses
import math
from typing import Callable

import numpy as np
from scipy import optimize

from .kernels import (KernelSpec, bump_kernel, gaussian_kernel,
                      kernel_diagnostics, laplace_kernel, tabulated_kernel)

__all__ = [
    "NonlinearitySpec",
    "ModelProblem",
    "HypothesisReport",
    "CatalogError",
    "builtin_model",
    "check_hypotheses",
    "equilibrium_constants",
    "load_model",
]

BUILTIN_NAMES = ("neural", "ising", "phase")


class CatalogError(KeyError):
    """Unknown built-in model name."""


class SpecError(ValueError):
    """Degenerate grid or malformed model specification."""


def _fd_partial(f, which, r, s, step=1e-6):
    """Centered finite difference in r (which=0) or s (which=1).

    A secondary step 1e-5 is used for a Richardson refinement when the
    two estimates disagree by more than 1e-6.
    """
    def diff(h):
        if which == 0:
            return (f(r + h, s) - f(r - h, s)) / (2.0 * h)
        return (f(r, s + h) - f(r, s - h)) / (2.0 * h)

    d1 = diff(step)
    d2 = diff(1e-5)
    if np.max(np.abs(np.asarray(d1) - np.asarray(d2))) > 1e-6:
        # Richardson on the two step sizes (orders h^2): eliminate the
        # leading error term.
        h1, h2 = step, 1e-5
        w = h2 * h2 / (h2 * h2 - h1 * h1)
        return w * d1 + (1.0 - w) * d2
    return d1


@dataclasses.dataclass(frozen=True)
class NonlinearitySpec:
    """Bistable nonlinearity f(r, s) with its partial derivatives.

    ``f_r`` / ``f_s`` may be closed forms; when absent they fall back to
    centered finite differences.  ``q`` is the middle zero of the
    diagonal restriction f(s, s).
    """

    f: Callable
    q: float
    f_r: Callable | None = None
    f_s: Callable | None = None
    description: str = ""

    def partial_r(self, r, s):
        if self.f_r is not None:
            return self.f_r(r, s)
        return _fd_partial(self.f, 0, r, s)

    def partial_s(self, r, s):
        if self.f_s is not None:
            return self.f_s(r, s)
        return _fd_partial(self.f, 1, r, s)

    def diagonal(self, s):
        return self.f(s, s)


@dataclasses.dataclass(frozen=True)
class ModelProblem:
    """(d, kernel, nonlinearity) plus the derived linearization constants."""

    d: float
    kernel: KernelSpec
    nonlinearity: NonlinearitySpec
    a_plus: float = dataclasses.field(init=False)
    a_minus: float = dataclasses.field(init=False)
    b_plus: float = dataclasses.field(init=False)
    b_minus: float = dataclasses.field(init=False)
    name: str = ""
    rescale: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        ap, am, bp, bm = equilibrium_constants(self)
        object.__setattr__(self, "a_plus", ap)
        object.__setattr__(self, "a_minus", am)
        object.__setattr__(self, "b_plus", bp)
        object.__setattr__(self, "b_minus", bm)

    @property
    def q(self) -> float:
        return self.nonlinearity.q


def equilibrium_constants(problem) -> tuple[float, float, float, float]:
    """(a+, a-, b+, b-) = partials of f at the limiting equilibria."""
    nl = problem.nonlinearity
    a_plus = float(nl.partial_r(1.0, 1.0))
    a_minus = float(nl.partial_r(-1.0, -1.0))
    b_plus = float(nl.partial_s(1.0, 1.0))
    b_minus = float(nl.partial_s(-1.0, -1.0))
    return a_plus, a_minus, b_plus, b_minus


# ---------------------------------------------------------------------------
# built-in catalog


def _neural_model(d=1.0, gain=1.0, sigma=2.0):
    """Rate model u_t = -u + J * S(u) with S(u) = tanh(gain u)/tanh(gain).

    S is odd with S(+-1) = +-1 and S'(+-1) < 1 < S'(0), so the diagonal
    restriction S(s) - s is bistable with middle zero q = 0.
    """
    t = math.tanh(gain)

    def f(r, s):
        return -r + np.tanh(gain * np.asarray(s)) / t

    def f_r(r, s):
        return -np.ones_like(np.asarray(r, dtype=float))

    def f_s(r, s):
        return gain / t / np.cosh(gain * np.asarray(s)) ** 2

    nl = NonlinearitySpec(f, 0.0, f_r, f_s,
                          description=f"-r + tanh({gain} s)/tanh({gain})")
    return ModelProblem(d, gaussian_kernel(sigma), nl, name="neural",
                        rescale={"gain": gain})


def _ising_model(d=1.0, beta=1.3, radius=3.0):
    """Continuum Ising dynamics u_t = tanh(beta J*u) - u at h = 0.

    The magnetization fixed point m* solves tanh(beta m) = m; states are
    affinely rescaled by 1/m* so the stable equilibria sit at exactly
    +-1.  The kernel is compactly supported.
    """
    if beta <= 1.0:
        raise SpecError("ising model needs beta > 1 for bistability")
    m_star = optimize.brentq(lambda m: math.tanh(beta * m) - m, 1e-6, 1.0,
                             xtol=1e-15)

    def f(r, s):
        return np.tanh(beta * m_star * np.asarray(s)) / m_star - r

    def f_r(r, s):
        return -np.ones_like(np.asarray(r, dtype=float))

    def f_s(r, s):
        return beta / np.cosh(beta * m_star * np.asarray(s)) ** 2

    nl = NonlinearitySpec(f, 0.0, f_r, f_s,
                          description=f"tanh({beta} m* s)/m* - r, m*={m_star:.6f}")
    return ModelProblem(d, bump_kernel(radius), nl, name="ising",
                        rescale={"beta": beta, "m_star": m_star,
                                 "state_scale": m_star})


def _phase_model(d=1.0, epsilon=0.1, mu=0.15, sigma=2.5, detune=0.0):
    """Phase-transition model u_t = d u_xx + eps (J*u - u) + g(u).

    g(u) = mu (u - u^3) + detune (1 - u^2); detune = 0 gives the
    odd-symmetric standing-wave case, detune != 0 keeps the equilibria
    at +-1 but moves the middle zero to q = -detune/mu and makes the
    front travel.
    """
    if abs(detune) >= mu:
        raise SpecError("detune must keep the middle zero inside (-1, 1)")

    def g(u):
        u = np.asarray(u, dtype=float)
        return mu * (u - u ** 3) + detune * (1.0 - u * u)

    def f(r, s):
        return epsilon * (np.asarray(s) - np.asarray(r)) + g(r)

    def f_r(r, s):
        r = np.asarray(r, dtype=float)
        return -epsilon + mu * (1.0 - 3.0 * r * r) - 2.0 * detune * r

    def f_s(r, s):
        return epsilon * np.ones_like(np.asarray(s, dtype=float))

    nl = NonlinearitySpec(f, -detune / mu, f_r, f_s,
                          description=f"{epsilon}(s - r) + {mu}(r - r^3) + "
                                      f"{detune}(1 - r^2)")
    return ModelProblem(d, gaussian_kernel(sigma), nl, name="phase",
                        rescale={"epsilon": epsilon, "mu": mu,
                                 "detune": detune})


def builtin_model(name: str, **overrides) -> ModelProblem:
    """Look up a catalog model: ``neural``, ``ising`` or ``phase``."""
    makers = {"neural": _neural_model, "ising": _ising_model,
              "phase": _phase_model}
    try:
        maker = makers[name]
    except KeyError:
        raise CatalogError(
            f"unknown model {name!r}; catalog has {sorted(makers)}") from None
    return maker(**overrides)


# ---------------------------------------------------------------------------
# hypothesis checks


@dataclasses.dataclass
class HypothesisReport:
    """Pass/fail flags for (H1a), (H1b), (H2)-(H5) with violation witnesses.

    Each entry of ``results`` maps a hypothesis tag to a dict with keys
    ``passed``, ``witness`` (location of the worst violation, or None)
    and ``magnitude``.
    """

    results: dict
    grid: dict

    @property
    def all_passed(self) -> bool:
        return all(v["passed"] for v in self.results.values())

    def failed(self) -> list[str]:
        return [k for k, v in self.results.items() if not v["passed"]]

    def as_dict(self) -> dict:
        return {"grid": self.grid, "results": self.results,
                "all_passed": self.all_passed}


def _entry(passed, witness=None, magnitude=0.0, note=""):
    out = {"passed": bool(passed), "witness": witness,
           "magnitude": float(magnitude)}
    if note:
        out["note"] = note
    if not passed and witness is None:
        out["witness"] = "unspecified"
    return out


def check_hypotheses(problem: ModelProblem, grid_n: int = 201,
                     c: float | None = None,
                     rho_window: float = 2.0) -> HypothesisReport:
    """Sampled verification of (H1a), (H1b), (H2)-(H5).

    A pass is numerical evidence on the sampling grid, not a proof.
    (H1a) ``d + |c| != 0`` needs the wave speed; when ``c`` is unknown it
    passes iff d > 0 and is marked conditional otherwise.
    """
    if grid_n < 3:
        raise SpecError("hypothesis grid needs at least 3 points per axis")
    nl = problem.nonlinearity
    results: dict = {}

    # H1a: d + |c| != 0
    if c is None:
        ok = problem.d > 0
        results["H1a"] = _entry(ok, None if ok else ("d", 0.0),
                                abs(problem.d),
                                note="" if ok else "needs nonzero wave speed")
    else:
        ok = problem.d + abs(c) > 1e-12
        results["H1a"] = _entry(ok, None if ok else ("d+|c|",), problem.d + abs(c))

    # H1b: kernel is even, nonnegative, unit mass, finite exponential moments
    diag = kernel_diagnostics(problem.kernel)
    rho = np.linspace(-rho_window, rho_window, 9)
    try:
        moments = problem.kernel.transform(rho.astype(complex))
        moments_ok = bool(np.all(np.isfinite(moments)))
    except ValueError:
        moments_ok = False
    viol = max(diag["evenness"] - 1e-12, -diag["min_value"],
               diag["mass_error"] - 1e-8, 0.0 if moments_ok else 1.0)
    results["H1b"] = _entry(viol <= 0.0, None if viol <= 0 else diag, viol)

    # H2: f vanishes at the three diagonal equilibria
    zeros = np.array([nl.f(-1.0, -1.0), nl.f(1.0, 1.0), nl.f(nl.q, nl.q)],
                     dtype=float)
    worst = int(np.argmax(np.abs(zeros)))
    results["H2"] = _entry(np.max(np.abs(zeros)) <= 1e-10,
                           ("-1", "+1", "q")[worst], np.max(np.abs(zeros)))

    # H3: f_s > 0 on [-1,1]^2
    u = np.linspace(-1.0, 1.0, grid_n)
    rr, ss = np.meshgrid(u, u, indexing="ij")
    fs = np.asarray(nl.partial_s(rr, ss), dtype=float)
    i = np.unravel_index(int(np.argmin(fs)), fs.shape)
    results["H3"] = _entry(fs[i] > 0.0, (float(rr[i]), float(ss[i])), fs[i])

    # H4: a+- < 0 and a+- < -b+-  (checked exactly on the constants)
    h4 = max(problem.a_plus, problem.a_minus,
             problem.a_plus + problem.b_plus,
             problem.a_minus + problem.b_minus)
    results["H4"] = _entry(h4 < 0.0,
                           {"a+": problem.a_plus, "a-": problem.a_minus,
                            "b+": problem.b_plus, "b-": problem.b_minus}, h4)

    # H5: diagonal restriction is bistable with the monotonicity structure
    results["H5"] = _h5_check(nl, grid_n)

    return HypothesisReport(results, {"grid_n": grid_n,
                                      "rho_window": rho_window})


def _h5_check(nl: NonlinearitySpec, grid_n: int) -> dict:
    s = np.linspace(-1.0, 1.0, max(4 * grid_n, 801))
    fbar = np.asarray(nl.diagonal(s), dtype=float)
    interior = s[1:-1]
    sign = np.sign(fbar)
    # count sign changes strictly inside (-1, 1); the endpoints are zeros
    inner = sign[1:-1]
    nz = inner[inner != 0]
    changes = int(np.sum(nz[1:] != nz[:-1]))
    if changes != 1:
        return _entry(False, {"sign_changes_inside": changes},
                      float(np.max(np.abs(fbar))),
                      note="diagonal f(s,s) must cross zero once inside (-1,1)")
    # middle zero close to q
    crossing = np.where(nz_changes_mask(inner))[0]
    q_est = float(interior[crossing[0]]) if crossing.size else float("nan")
    if abs(q_est - nl.q) > 2e-2:
        return _entry(False, {"middle_zero": q_est, "declared_q": nl.q},
                      abs(q_est - nl.q))
    # slope structure: f' >= 0 exactly on one interval [l, l'] containing q
    fprime = np.gradient(fbar, s)
    pos = fprime >= -1e-10
    blocks = _true_blocks(pos)
    blocks = [b for b in blocks if s[b[1]] - s[b[0]] > 4.0 * (s[1] - s[0])]
    if len(blocks) != 1:
        return _entry(False, {"monotone_blocks": len(blocks)}, float(len(blocks)))
    l, lp = float(s[blocks[0][0]]), float(s[blocks[0][1]])
    if not (l - 1e-6 <= nl.q <= lp + 1e-6):
        return _entry(False, {"interval": (l, lp), "q": nl.q}, 0.0)
    out = _entry(True)
    out["interval"] = (l, lp)
    return out


def nz_changes_mask(inner):
    sign = np.sign(inner)
    mask = np.zeros(inner.shape, dtype=bool)
    prev = 0.0
    for i, v in enumerate(sign):
        if v == 0:
            continue
        if prev != 0 and v != prev:
            mask[i] = True
        prev = v
    return mask


def _true_blocks(mask):
    blocks = []
    start = None
    for i, v in enumerate(mask):
        if v and start is None:
            start = i
        elif not v and start is not None:
            blocks.append((start, i - 1))
            start = None
    if start is not None:
        blocks.append((start, len(mask) - 1))
    return blocks


# ---------------------------------------------------------------------------
# model files


def _kernel_from_config(cfg: dict, base_dir) -> KernelSpec:
    family = cfg.get("family")
    if family == "gaussian":
        return gaussian_kernel(float(cfg["sigma"]))
    if family == "laplace":
        return laplace_kernel(float(cfg["beta"]))
    if family == "bump":
        return bump_kernel(float(cfg["radius"]))
    if family == "tabulated":
        import pathlib
        path = pathlib.Path(cfg["file"])
        if not path.is_absolute():
            path = pathlib.Path(base_dir) / path
        data = np.loadtxt(path)
        return tabulated_kernel(data[:, 0], data[:, 1])
    raise SpecError(f"unknown kernel family {family!r}")


def _broadcasting(fn):
    """Lambdified partials of affine terms collapse to scalars; restore
    the broadcast shape of the inputs."""

    def wrapped(r, s):
        r = np.asarray(r, dtype=float)
        s = np.asarray(s, dtype=float)
        out = np.asarray(fn(r, s), dtype=float)
        return out + np.zeros(np.broadcast(r, s).shape)

    return wrapped


def _nonlinearity_from_config(cfg: dict) -> NonlinearitySpec:
    if "expr" in cfg:
        import sympy

        r, s = sympy.symbols("r s")
        expr = sympy.sympify(cfg["expr"], locals={"r": r, "s": s})
        f = _broadcasting(sympy.lambdify((r, s), expr, "numpy"))
        f_r = _broadcasting(sympy.lambdify((r, s), sympy.diff(expr, r),
                                           "numpy"))
        f_s = _broadcasting(sympy.lambdify((r, s), sympy.diff(expr, s),
                                           "numpy"))
        return NonlinearitySpec(f, float(cfg.get("q", 0.0)), f_r, f_s,
                                description=str(expr))
    raise SpecError("nonlinearity table needs an 'expr' entry")


def load_model(path) -> ModelProblem:
    """Load a model problem from a TOML definition file.

    Schema::

        d = 1.0                       # optional, default 0
        [kernel]
        family = "gaussian"           # gaussian | laplace | bump | tabulated
        sigma = 1.0                   # family parameter
        [nonlinearity]
        expr = "0.1*(s - r) + r - r**3"
        q = 0.0
    """
    import pathlib

    try:
        import tomllib  # py >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib

    path = pathlib.Path(path)
    with open(path, "rb") as fh:
        cfg = tomllib.load(fh)
    if "kernel" not in cfg or "nonlinearity" not in cfg:
        raise SpecError("model file needs [kernel] and [nonlinearity] tables")
    kernel = _kernel_from_config(cfg["kernel"], path.parent)
    nl = _nonlinearity_from_config(cfg["nonlinearity"])
    return ModelProblem(float(cfg.get("d", 0.0)), kernel, nl,
                        name=cfg.get("name", path.stem))
