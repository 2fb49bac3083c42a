import numpy as np
import pytest

from nlwave.models import builtin_model
from nlwave.wave import SolverConfig, solve_wave


@pytest.fixture(scope="session")
def phase_problem():
    return builtin_model("phase")


@pytest.fixture(scope="session")
def phase_detuned():
    return builtin_model("phase", detune=0.05)


@pytest.fixture(scope="session")
def phase_wave(phase_problem):
    """Small symmetric phase-model front shared across unit tests."""
    return solve_wave(phase_problem, SolverConfig(L=20.0, n=256))


@pytest.fixture(scope="session")
def phase_detuned_wave(phase_detuned):
    return solve_wave(phase_detuned, SolverConfig(L=20.0, n=256))


@pytest.fixture(scope="session")
def neural_problem():
    return builtin_model("neural")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
