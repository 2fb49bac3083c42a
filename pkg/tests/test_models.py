import pathlib

import numpy as np
import pytest

from nlwave.kernels import tabulated_kernel
from nlwave.models import (BUILTIN_NAMES, CatalogError, ModelProblem,
                           NonlinearitySpec, SpecError, builtin_model,
                           check_hypotheses, equilibrium_constants, load_model)

DATA = pathlib.Path(__file__).parent / "data"


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtin_equilibrium_constants(name):
    p = builtin_model(name)
    assert p.a_plus < 0 and p.a_minus < 0
    assert p.b_plus > 0 and p.b_minus > 0
    assert p.a_plus + p.b_plus < 0
    assert p.a_minus + p.b_minus < 0


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtin_hypotheses_pass(name):
    rep = check_hypotheses(builtin_model(name))
    assert rep.all_passed, rep.failed()
    assert set(rep.results) == {"H1a", "H1b", "H2", "H3", "H4", "H5"}
    d = rep.as_dict()
    assert d["all_passed"] and "grid" in d


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtin_equilibria_are_zeros(name):
    nl = builtin_model(name).nonlinearity
    for s in (-1.0, 1.0, nl.q):
        assert abs(float(nl.f(s, s))) < 1e-12


def test_unknown_builtin():
    with pytest.raises(CatalogError):
        builtin_model("kpp")


def test_phase_detune_moves_middle_zero():
    p = builtin_model("phase", detune=0.05)
    assert abs(p.q - (-0.05 / 0.15)) < 1e-14
    assert abs(float(p.nonlinearity.f(p.q, p.q))) < 1e-14
    # equilibria stay pinned at +-1
    assert abs(float(p.nonlinearity.f(1.0, 1.0))) < 1e-14
    assert abs(float(p.nonlinearity.f(-1.0, -1.0))) < 1e-14
    with pytest.raises(SpecError):
        builtin_model("phase", detune=0.2)


def test_ising_needs_supercritical_beta():
    with pytest.raises(SpecError):
        builtin_model("ising", beta=0.9)


def test_fd_fallback_matches_closed_form():
    ref = builtin_model("phase").nonlinearity
    fd = NonlinearitySpec(ref.f, ref.q)      # no closed-form partials
    r = np.linspace(-0.9, 0.9, 7)
    s = np.linspace(-0.8, 0.8, 7)
    assert np.allclose(fd.partial_r(r, s), ref.partial_r(r, s), atol=1e-7)
    assert np.allclose(fd.partial_s(r, s), ref.partial_s(r, s), atol=1e-7)


def test_h1a_needs_diffusion_or_drift():
    p = builtin_model("phase")
    p0 = ModelProblem(0.0, p.kernel, p.nonlinearity, name="drift-free")
    rep = check_hypotheses(p0)
    assert "H1a" in rep.failed()
    assert check_hypotheses(p0, c=0.7).results["H1a"]["passed"]
    assert not check_hypotheses(p0, c=0.0).results["H1a"]["passed"]


def test_h1b_rejects_signed_kernel():
    s = np.linspace(-4, 4, 401)
    j = np.exp(-s * s) - 0.5 * np.exp(-4.0 * (s - 1) ** 2) \
        - 0.5 * np.exp(-4.0 * (s + 1) ** 2)
    bad = tabulated_kernel(s, j)
    p = builtin_model("phase")
    rep = check_hypotheses(ModelProblem(1.0, bad, p.nonlinearity))
    assert "H1b" in rep.failed()
    assert rep.results["H1b"]["witness"] is not None


def test_h5_rejects_monostable_diagonal():
    nl = NonlinearitySpec(lambda r, s: (1.0 - r) * (1.0 + r) * (2.0 + r),
                          q=0.0)
    p = builtin_model("phase")
    rep = check_hypotheses(ModelProblem(1.0, p.kernel, nl))
    assert "H5" in rep.failed()


def test_load_model_roundtrip():
    p = load_model(DATA / "cubic.toml")
    assert p.name == "cubic"
    assert p.d == 1.0
    assert p.kernel.family == "gaussian"
    ref = builtin_model("phase")
    r = np.linspace(-1, 1, 11)
    assert np.allclose(p.nonlinearity.f(r, 0.3 * r),
                       ref.nonlinearity.f(r, 0.3 * r), atol=1e-14)
    assert check_hypotheses(p).all_passed


def test_load_model_validates_schema(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text('d = 1.0\n[kernel]\nfamily = "gaussian"\nsigma = 1.0\n')
    with pytest.raises(SpecError):
        load_model(bad)
    bad.write_text('[kernel]\nfamily = "sombrero"\nwidth = 1.0\n'
                   '[nonlinearity]\nexpr = "r"\n')
    with pytest.raises(SpecError):
        load_model(bad)


def test_equilibrium_constants_match_direct_partials():
    p = builtin_model("neural")
    ap, am, bp, bm = equilibrium_constants(p)
    assert ap == p.a_plus and bm == p.b_minus
    gain = p.rescale["gain"]
    expected_b = gain / np.tanh(gain) / np.cosh(gain) ** 2
    assert abs(bp - expected_b) < 1e-12 and abs(bp - bm) < 1e-12
