import numpy as np
import pytest

from nlwave.models import builtin_model
from nlwave.wave import (ConvergenceError, LatticeConvolution, SolverConfig,
                         WaveSolution, continue_in_speed_parameter,
                         export_solution, import_solution, initial_guess,
                         profile_residual, solve_wave, verify_solution)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(n=1000)
    with pytest.raises(ValueError):
        SolverConfig(n=64)
    with pytest.raises(ValueError):
        SolverConfig(L=5.0)
    with pytest.raises(ValueError):
        SolverConfig(tol=0.0)
    xi, h = SolverConfig(L=20.0, n=256).grid()
    assert xi.size == 256 and abs(h - 40.0 / 256) < 1e-15
    assert abs(xi[0] + 20.0 - 0.5 * h) < 1e-12 and abs(xi[-1] + xi[0]) < 1e-12


def test_lattice_convolution_front_closure(phase_problem):
    # ghosts are -1 on the left, +1 on the right: the states are
    # reproduced exactly where the profile matches them
    n, h = 256, 40.0 / 256
    lc = LatticeConvolution(phase_problem.kernel, n, h)
    ones = np.ones(n)
    assert abs(lc.apply_front(ones)[-1] - 1.0) < 1e-13
    assert abs(lc.apply_front(-ones)[0] + 1.0) < 1e-13
    xi = -20.0 + (np.arange(n) + 0.5) * h
    step = np.where(xi >= 0, 1.0, -1.0)
    out = lc.apply_front(step)
    assert np.max(np.abs(out)) <= 1.0 + 1e-12
    assert np.max(np.abs(out + out[::-1])) < 1e-12    # odd response
    assert abs(out[0] + 1.0) < 1e-12 and abs(out[-1] - 1.0) < 1e-12
    assert abs(lc.mass_defect) < 1e-6


def test_lattice_convolution_matrix_matches_fft(phase_problem, rng):
    lc = LatticeConvolution(phase_problem.kernel, 256, 40.0 / 256)
    u = rng.standard_normal(256)
    assert np.max(np.abs(lc.matrix() @ u - lc.apply(u))) < 1e-12
    # symmetric Toeplitz from an even kernel
    m = lc.matrix()
    assert np.max(np.abs(m - m.T)) < 1e-15
    assert lc.row.size == 2 * 256 - 1


def test_solve_wave_phase_standing(phase_wave):
    assert phase_wave.residual_norm < 1e-10
    assert abs(phase_wave.speed) < 1e-10
    assert phase_wave.monotone_fraction() == 1.0
    assert np.all(np.abs(phase_wave.profile) <= 1.0 + 1e-12)


def test_solve_wave_detuned_travels(phase_detuned_wave, phase_detuned):
    assert phase_detuned_wave.residual_norm < 1e-10
    assert abs(phase_detuned_wave.speed) > 1e-3
    v = verify_solution(phase_detuned, phase_detuned_wave, tol=1e-8)
    assert v["passes"] and v["range_ok"]
    assert v["monotone_fraction"] == 1.0


def test_phase_condition_pins_the_middle_zero(phase_detuned_wave,
                                              phase_detuned):
    u = phase_detuned_wave.profile
    mid = u.size // 2
    assert abs(0.5 * (u[mid - 1] + u[mid]) - phase_detuned.q) < 1e-10


def test_independent_residual_path(phase_detuned_wave, phase_detuned):
    sol = phase_detuned_wave
    res = profile_residual(phase_detuned, sol.xi, sol.h, sol.profile,
                           sol.speed, sol.L)
    assert np.max(np.abs(res)) < 1e-8


def test_initial_guess_hits_gauge(phase_detuned):
    xi, _ = SolverConfig(L=20.0, n=256).grid()
    u, c = initial_guess(phase_detuned, xi)
    assert c == 0.0
    assert abs(np.interp(0.0, xi, u) - phase_detuned.q) < 1e-2
    assert u[0] < -0.99 and u[-1] > 0.99


def test_guess_shape_is_checked(phase_problem):
    with pytest.raises(ValueError):
        solve_wave(phase_problem, SolverConfig(L=20.0, n=256),
                   guess=(np.zeros(128), 0.0))


def test_convergence_error_on_budget(phase_problem):
    cfg = SolverConfig(L=20.0, n=256, tol=1e-10, max_iter=1)
    with pytest.raises(ConvergenceError):
        solve_wave(phase_problem, cfg)


def test_derivative_and_interpolation(phase_wave):
    up = phase_wave.derivative
    assert np.all(up > 0)
    assert phase_wave.interpolate(np.array([-100.0]))[0] == -1.0
    assert phase_wave.interpolate(np.array([100.0]))[0] == 1.0


def test_speed_continuation_in_detune():
    detunes = [0.0, 0.02, 0.04]
    sols = continue_in_speed_parameter(
        lambda t: builtin_model("phase", detune=t), detunes,
        SolverConfig(L=20.0, n=256))
    speeds = [s.speed for s in sols]
    assert all(s.residual_norm < 1e-10 for s in sols)
    # speeds respond monotonically to the detuning
    assert (np.diff(speeds) > 0).all() or (np.diff(speeds) < 0).all()


def test_window_truncation_robustness():
    # same spacing h, doubled window: the speed is already converged
    p = builtin_model("phase", detune=0.05)
    small = solve_wave(p, SolverConfig(L=24.0, n=512, tol=1e-12))
    big = solve_wave(p, SolverConfig(L=48.0, n=1024, tol=1e-12))
    assert abs(small.speed - big.speed) < 1e-7


def test_export_import_roundtrip(phase_detuned_wave, tmp_path):
    path = tmp_path / "wave.txt"
    export_solution(phase_detuned_wave, path)
    back = import_solution(path)
    assert isinstance(back, WaveSolution)
    assert back.speed == phase_detuned_wave.speed
    assert np.array_equal(back.xi, phase_detuned_wave.xi)
    assert np.array_equal(back.profile, phase_detuned_wave.profile)
    assert back.problem_name == "phase"


def test_import_rejects_malformed_files(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("0.0\t0.5\n")
    with pytest.raises(ValueError):
        import_solution(bad)
    bad.write_text('# {"speed": 0, "L": 20, "h": 0.1, "n": 7,'
                   ' "residual_norm": 0, "iterations": 1}\n0.0\t0.5\n')
    with pytest.raises(ValueError):
        import_solution(bad)
