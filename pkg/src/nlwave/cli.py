"""Command-line front end.

Subcommands: ``check``, ``solve``, ``rates``, ``spectrum``, ``greens``
and ``demo``.  Exit codes follow a scriptable contract: 0 on success,
1 on a numerical or quality failure, 2 on usage or configuration
errors.  Reports are versioned JSON; profiles, kernels and tails are
two-column numeric text; figures are rendered to PNG files alongside
unless ``--no-plots`` is given.
"""
from __future__ import annotations

import argparse
import pathlib
import sys
import time

import numpy as np

from . import asymptotics, charfn, greens, models, report, spectrum, wave
from .kernels import bump_kernel, gaussian_kernel, laplace_kernel

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _load_problem(args) -> models.ModelProblem:
    src = args.model
    if src in models.BUILTIN_NAMES:
        overrides = {}
        if getattr(args, "detune", None):
            overrides["detune"] = args.detune
        return models.builtin_model(src, **overrides)
    path = pathlib.Path(src)
    if not path.exists():
        raise UsageError(f"model {src!r} is neither a builtin "
                         f"({', '.join(models.BUILTIN_NAMES)}) nor a file")
    try:
        return models.load_model(path)
    except Exception as exc:
        raise UsageError(f"cannot parse model file {src}: {exc}") from exc


def _solver_config(args) -> wave.SolverConfig:
    try:
        return wave.SolverConfig(L=args.L, n=args.n, tol=args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _outdir(args) -> pathlib.Path:
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write_probe"
    try:
        probe.touch()
        probe.unlink()
    except OSError as exc:
        raise UsageError(f"output directory {out} not writable: {exc}")
    return out


def _check_gate(problem, args):
    """Hypothesis precondition shared by the solving commands."""
    hrep = models.check_hypotheses(problem)
    if not hrep.all_passed and not args.force:
        print(f"hypothesis check failed: {hrep.failed()} "
              "(use --force to solve anyway)", file=sys.stderr)
        return hrep, False
    return hrep, True


# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    problem = _load_problem(args)
    out = _outdir(args)
    hrep = models.check_hypotheses(problem)
    doc = report.new_report("check", problem.name, {"model": args.model})
    doc["sections"]["hypotheses"] = hrep.as_dict()
    for tag, entry in hrep.results.items():
        report.add_claim(doc, tag, entry["magnitude"], 0.0, entry["passed"])
    report.write_json(out / "check.json", doc,
                      reproducible=args.reproducible)
    for tag in sorted(hrep.results):
        state = "ok" if hrep.results[tag]["passed"] else "FAIL"
        print(f"{tag}: {state}")
    return EXIT_OK if hrep.all_passed else EXIT_NUMERICAL


def cmd_solve(args) -> int:
    problem = _load_problem(args)
    config = _solver_config(args)
    out = _outdir(args)
    hrep, ok = _check_gate(problem, args)
    if not ok:
        return EXIT_NUMERICAL
    guess = None
    if args.init:
        prior = wave.import_solution(args.init)
        xi, _ = config.grid()
        guess = (np.interp(xi, prior.xi, prior.profile,
                           left=-1.0, right=1.0), prior.speed)
    t0 = time.perf_counter()
    try:
        sol = wave.solve_wave(problem, config, guess=guess)
    except wave.ConvergenceError as exc:
        (out / "solve_trace.txt").write_text(
            f"model: {args.model}\nL={config.L} n={config.n} "
            f"tol={config.tol}\nfailure: {exc}\n")
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    elapsed = time.perf_counter() - t0
    wave.export_solution(sol, out / "wave.txt")
    verify = wave.verify_solution(problem, sol, tol=100.0 * config.tol)
    doc = report.new_report("solve", problem.name,
                            {"L": config.L, "n": config.n, "tol": config.tol})
    doc["sections"]["hypotheses"] = hrep.as_dict()
    doc["sections"]["wave"] = {
        "speed": sol.speed, "iterations": sol.iterations,
        "residual_norm": sol.residual_norm,
    }
    report.add_claim(doc, "residual", sol.residual_norm, config.tol, True)
    report.add_claim(doc, "independent_residual", verify["residual_sup"],
                     100.0 * config.tol, verify["passes"])
    doc["timings"]["solve_s"] = elapsed
    report.write_json(out / "solve.json", doc,
                      reproducible=args.reproducible)
    if not args.no_plots:
        from . import plots
        plots.plot_profile(sol, out / "profile.png")
    print(f"c = {sol.speed:.12f}  |F| = {sol.residual_norm:.3e}  "
          f"({sol.iterations} iterations)")
    return EXIT_OK if verify["passes"] else EXIT_NUMERICAL


def cmd_rates(args) -> int:
    problem = _load_problem(args)
    out = _outdir(args)
    if args.wave:
        sol = wave.import_solution(args.wave)
    else:
        config = _solver_config(args)
        _, ok = _check_gate(problem, args)
        if not ok:
            return EXIT_NUMERICAL
        sol = wave.solve_wave(problem, config)
    pred = asymptotics.predicted_rates(problem, sol.speed)
    window = tuple(args.window) if args.window else None
    doc = report.new_report("rates", problem.name,
                            {"window": window, "L": sol.L,
                             "n": int(sol.xi.size)})
    doc["sections"]["predicted"] = pred
    try:
        fit_r = asymptotics.fit_tail_rate(sol, +1, window)
        fit_l = asymptotics.fit_tail_rate(sol, -1, window)
    except asymptotics.FitQualityError as exc:
        doc["sections"]["fit_failure"] = str(exc)
        report.write_json(out / "rates.json", doc,
                          reproducible=args.reproducible)
        print(f"tail fit failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    err_r = fit_r.relative_error(pred["rate_right"])
    err_l = fit_l.relative_error(pred["rate_left"])
    res = asymptotics.residue_amplitude(problem, sol)
    doc["sections"]["fits"] = {
        "right": vars(fit_r) | {"relative_error": err_r},
        "left": vars(fit_l) | {"relative_error": err_l},
    }
    doc["sections"]["residue"] = vars(res)
    report.add_claim(doc, "rate_right", err_r, 0.01, err_r < 0.01)
    report.add_claim(doc, "rate_left", err_l, 0.01, err_l < 0.01)
    report.write_json(out / "rates.json", doc,
                      reproducible=args.reproducible)
    report.write_columns(out / "tails.txt",
                         "xi  1-U  U+1", sol.xi, 1.0 - sol.profile,
                         sol.profile + 1.0)
    if not args.no_plots:
        from . import plots
        plots.plot_tails(sol, (fit_r, fit_l),
                         (pred["rate_right"], pred["rate_left"]),
                         out / "tails.png")
    print(f"right: fitted {fit_r.rate:.6f} vs predicted "
          f"{pred['rate_right']:.6f} ({100 * err_r:.3f}%)")
    print(f"left:  fitted {fit_l.rate:.6f} vs predicted "
          f"{pred['rate_left']:.6f} ({100 * err_l:.3f}%)")
    return EXIT_OK if (err_r < 0.01 and err_l < 0.01) else EXIT_NUMERICAL


def cmd_spectrum(args) -> int:
    problem = _load_problem(args)
    out = _outdir(args)
    config = _solver_config(args)
    _, ok = _check_gate(problem, args)
    if not ok:
        return EXIT_NUMERICAL
    sol = wave.solve_wave(problem, config)
    t0 = time.perf_counter()
    rep = spectrum.eigen_report(problem, sol)
    regions = charfn.spectrum_regions(problem, sol.speed)
    cls = spectrum.classify_vs_regions(rep, regions, sol.h)
    elapsed = time.perf_counter() - t0

    rates = [spectrum.eigenvector_decay_rate(sol.xi, rep.zero_mode)]
    report.write_eigenvalue_csv(out / "eigenvalues.csv", rep.eigenvalues,
                                rep.outer_mass, 0.5)
    report.write_columns(out / "zero_mode.txt", "xi  phi0  psi",
                         sol.xi, rep.zero_mode, rep.psi)
    doc = report.new_report("spectrum", problem.name,
                            {"L": config.L, "n": config.n})
    scale = rep.op_norm
    unstable = rep.unstable_eigenvalues()
    doc["sections"]["zero_mode"] = {
        "lambda0": rep.lambda0, "cosine": rep.zero_mode_cosine,
        "psi_positivity": rep.psi_positivity,
        "simplicity_residual": rep.simplicity_residual,
        "zero_mode_decay_rate": rates[0],
        "duality_defect": rep.duality_defect,
        "op_norm": scale,
    }
    doc["sections"]["classification"] = cls
    doc["sections"]["regions"] = regions.as_dict()
    report.add_claim(doc, "lambda0_small", abs(rep.lambda0), 1e-4 * scale,
                     abs(rep.lambda0) < 1e-4 * scale)
    report.add_claim(doc, "cosine", rep.zero_mode_cosine, 0.999,
                     rep.zero_mode_cosine > 0.999)
    report.add_claim(doc, "psi_positivity", rep.psi_positivity, 0.999,
                     rep.psi_positivity > 0.999)
    report.add_claim(doc, "simplicity", rep.simplicity_residual, 1e-2,
                     rep.simplicity_residual > 1e-2)
    report.add_claim(doc, "no_unstable", len(unstable), 0,
                     len(unstable) == 0)
    report.add_claim(doc, "edge_in_strip", cls["n_edge"], 0,
                     cls["edge_all_in_strip"])
    doc["timings"]["spectrum_s"] = elapsed
    report.write_json(out / "spectrum.json", doc,
                      reproducible=args.reproducible)
    if not args.no_plots:
        from . import plots
        plots.plot_spectrum(rep, regions, out / "spectrum.png")
    passed = all(c["passed"] for c in doc["claims"])
    print(f"lambda0 = {rep.lambda0:.3e}  cosine = "
          f"{rep.zero_mode_cosine:.6f}  simplicity = "
          f"{rep.simplicity_residual:.3e}")
    return EXIT_OK if passed else EXIT_NUMERICAL


def _kernel_from_args(args):
    if args.kernel == "gaussian":
        return gaussian_kernel(args.kernel_param)
    if args.kernel == "laplace":
        return laplace_kernel(args.kernel_param)
    if args.kernel == "bump":
        return bump_kernel(args.kernel_param)
    raise UsageError(f"unknown kernel family {args.kernel!r}")


def cmd_greens(args) -> int:
    out = _outdir(args)
    kernel = _kernel_from_args(args)
    cf = charfn.CharFn(args.d, args.c, args.a, args.b, kernel, args.lam)
    try:
        gt = greens.compute_g0(cf, args.L, args.n)
    except greens.HyperbolicityError as exc:
        print(f"not hyperbolic: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except greens.WindowError as exc:
        print(f"window too small: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    gt.export_text(out / "greens.txt")
    doc = report.new_report("greens", "constant-coefficient",
                            {"d": args.d, "c": args.c, "a": args.a,
                             "b": args.b, "lam": args.lam,
                             "kernel": args.kernel,
                             "kernel_param": args.kernel_param,
                             "L": args.L, "n": args.n})
    doc["sections"]["greens"] = gt.as_dict()
    report.add_claim(doc, "decay_positive",
                     min(gt.decay_rate_plus, gt.decay_rate_minus), 0.0,
                     min(gt.decay_rate_plus, gt.decay_rate_minus) > 0.0)
    report.write_json(out / "greens.json", doc,
                      reproducible=args.reproducible)
    if not args.no_plots:
        from . import plots
        plots.plot_greens(gt, out / "greens.png")
    print(f"jump ({gt.jump_kind}) = {gt.jump:.6f}  rates = "
          f"{gt.decay_rate_minus:.4f} / {gt.decay_rate_plus:.4f}")
    return EXIT_OK


def cmd_demo(args) -> int:
    out = _outdir(args)
    t0 = time.perf_counter()
    doc = report.new_report("demo", "builtins", {"n": args.n, "L": args.L})
    worst = EXIT_OK
    for name in models.BUILTIN_NAMES:
        problem = models.builtin_model(name)
        hrep = models.check_hypotheses(problem)
        sol = wave.solve_wave(problem,
                              wave.SolverConfig(L=args.L, n=args.n))
        pred = asymptotics.predicted_rates(problem, sol.speed)
        fit_r = asymptotics.fit_tail_rate(sol, +1)
        fit_l = asymptotics.fit_tail_rate(sol, -1)
        err = max(fit_r.relative_error(pred["rate_right"]),
                  fit_l.relative_error(pred["rate_left"]))
        rep = spectrum.eigen_report(problem, sol)
        section = {
            "hypotheses_passed": hrep.all_passed,
            "speed": sol.speed,
            "rate_error": err,
            "lambda0": rep.lambda0,
            "cosine": rep.zero_mode_cosine,
            "simplicity": rep.simplicity_residual,
        }
        okay = (hrep.all_passed and err < 0.01
                and abs(rep.lambda0) < 1e-4 * rep.op_norm
                and rep.zero_mode_cosine > 0.999)
        report.add_claim(doc, f"{name}_end_to_end", err, 0.01, okay)
        doc["sections"][name] = section
        if not okay:
            worst = EXIT_NUMERICAL
        print(f"{name}: c = {sol.speed:+.6f}, rate error "
              f"{100 * err:.3f}%, lambda0 {rep.lambda0:.2e}"
              f" -> {'ok' if okay else 'FAIL'}")
    doc["timings"]["total_s"] = time.perf_counter() - t0
    report.write_json(out / "demo.json", doc,
                      reproducible=args.reproducible)
    return worst


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nlwave",
        description="Traveling fronts of nonlocal bistable equations: "
                    "solver, tail asymptotics, Green's functions, spectra.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True, solver=True):
        sp.add_argument("--out", default="nlwave_out",
                        help="output directory (default: nlwave_out)")
        sp.add_argument("--no-plots", action="store_true",
                        help="skip PNG rendering")
        sp.add_argument("--reproducible", action="store_true",
                        help="omit timings for byte-identical reruns")
        sp.add_argument("--seed", type=int, default=0,
                        help="seed for randomized harness runs")
        if model:
            sp.add_argument("--model", required=True,
                            help="builtin name (neural|ising|phase) or "
                                 "TOML model file")
            sp.add_argument("--detune", type=float, default=0.0,
                            help="detuning override for the phase builtin")
            sp.add_argument("--force", action="store_true",
                            help="solve even if hypothesis checks fail")
        if solver:
            sp.add_argument("--L", type=float, default=40.0)
            sp.add_argument("--n", type=int, default=1024)
            sp.add_argument("--tol", type=float, default=1e-10)

    sp = sub.add_parser("check", help="verify hypotheses (H1)-(H5)")
    common(sp, solver=False)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("solve", help="solve for the front (c, U)")
    common(sp)
    sp.add_argument("--init", help="prior wave.txt to seed the solver")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("rates", help="tail rates vs characteristic roots")
    common(sp)
    sp.add_argument("--wave", help="use an exported wave.txt instead of "
                                   "solving")
    sp.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"),
                    help="fit window in |xi|")
    sp.set_defaults(func=cmd_rates)

    sp = sub.add_parser("spectrum", help="discrete spectrum diagnostics")
    common(sp)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("greens", help="constant-coefficient Green's "
                                       "function")
    common(sp, model=False, solver=False)
    sp.add_argument("--d", type=float, required=True)
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--b", type=float, required=True)
    sp.add_argument("--lam", type=float, default=0.0)
    sp.add_argument("--kernel", default="gaussian",
                    choices=("gaussian", "laplace", "bump"))
    sp.add_argument("--kernel-param", type=float, default=1.0,
                    dest="kernel_param")
    sp.add_argument("--L", type=float, default=20.0)
    sp.add_argument("--n", type=int, default=1024)
    sp.set_defaults(func=cmd_greens)

    sp = sub.add_parser("demo", help="all builtins end to end")
    common(sp, model=False)
    sp.set_defaults(func=cmd_demo)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (charfn.HypothesisError, greens.PerturbationError,
            wave.ConvergenceError, asymptotics.FitQualityError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
