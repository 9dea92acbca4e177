import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semicov.errors import BadParams
from semicov.stability import (EpsilonSpec, bump_phi, perturb_p2, radial_rho,
                               verify_perturbation)

TWO_PI = 2 * np.pi


def test_bump_knot_values():
    assert bump_phi(0.1, 0.05, 0.1) == pytest.approx(0.05)     # t = rho -> rho'
    assert bump_phi(0.1, 0.05, 0.3) == pytest.approx(0.6)      # |t| > 2 rho -> 2t
    assert bump_phi(0.1, 0.05, 0.2) == pytest.approx(0.4)      # t = 2 rho -> 4 rho
    assert bump_phi(0.1, 0.05, 0.0) == 0.0


def test_bump_max_deviation_at_first_knot():
    ts = np.linspace(-1, 1, 200_001)
    dev = np.abs(bump_phi(0.1, 0.05, ts) - 2 * ts)
    assert dev.max() == pytest.approx(2 * 0.1 - 0.05, abs=1e-12)
    assert abs(abs(ts[np.argmax(dev)]) - 0.1) < 1e-5


def test_bump_bad_params():
    with pytest.raises(BadParams):
        bump_phi(0.1, 0.2, 0.0)
    with pytest.raises(BadParams):
        bump_phi(0.1, 0.0, 0.0)


@given(st.floats(1e-4, 0.5), st.floats(0.01, 1.0), st.floats(-2.0, 2.0))
@settings(max_examples=200, deadline=None)
def test_bump_is_increasing_and_odd(rho, frac, t):
    rho_p = rho * frac
    eps = 1e-6 * rho
    assert bump_phi(rho, rho_p, t + eps) > bump_phi(rho, rho_p, t)
    assert bump_phi(rho, rho_p, -t) == pytest.approx(-bump_phi(rho, rho_p, t), rel=1e-12)
    assert abs(bump_phi(rho, rho_p, t) - 2 * t) <= 2 * rho - rho_p + 1e-12


def test_radial_profile_constraints():
    rho = radial_rho(EpsilonSpec("const", 0.1))
    xs = np.exp(np.linspace(np.log(1e-6), np.log(1 - 1e-9), 100_000))
    assert np.max(2 * np.asarray(rho(xs)) / 0.1) < 1.0
    assert float(rho(0.25)) < float(rho(0.5))
    xs_nest = np.exp(np.linspace(np.log(1e-6), np.log(0.5), 1000))
    assert np.all(np.asarray(rho(xs_nest ** 2)) < np.asarray(rho(xs_nest)))


def test_radial_profile_shrinking_epsilon():
    eps = EpsilonSpec("edge_poly", 0.2, 1.0)
    rho = radial_rho(eps)
    xs = np.exp(np.linspace(np.log(1e-5), np.log(1 - 1e-6), 50_000))
    assert np.all(2 * np.asarray(rho(xs)) < np.asarray(eps(xs)))
    xs_nest = np.exp(np.linspace(np.log(1e-5), np.log(0.5), 500))
    assert np.all(np.asarray(rho(xs_nest ** 2)) < np.asarray(rho(xs_nest)))


def test_perturbation_structure():
    spec = perturb_p2(EpsilonSpec("const", 0.1))
    g = spec.g
    assert g.degree == 2
    # the positive ray is fixed by the angular bump
    assert g(0.3, 0.0)[1] == 0.0
    assert g(0.3, 0.0)[0] == pytest.approx(0.09)
    # outside the bump window the map is the squaring map, bit for bit
    for x in (0.2, 0.4, 0.7):
        t = 3.0 * float(np.asarray(spec.rho(x)))
        assert g(x, t / TWO_PI)[1] == 2 * t / TWO_PI
    # epsilon bounded by the declared delta
    xs = np.linspace(1e-4, 1 - 1e-4, 1000)
    assert np.all(np.asarray(spec.epsilon(xs)) < spec.delta)


def test_verify_perturbation_report():
    spec = perturb_p2(EpsilonSpec("const", 0.1))
    rep = verify_perturbation(spec, grid=100_000, r_samples=10_000)
    assert rep["ratio_ok"] and rep["sup_ratio"] < 1.0
    assert rep["invariance_fraction"] == 1.0
    assert rep["injectivity"]["injective_on_sector"]
    assert rep["squaring_noninjective_after"] == 10      # ceil(log2(2 pi / 0.01))
    assert rep["foliation_preserved"]


def test_verify_perturbation_shrinking_profile():
    spec = perturb_p2(EpsilonSpec("edge_poly", 0.2, 1.0))
    rep = verify_perturbation(spec, grid=40_000, r_samples=4_000)
    assert rep["ratio_ok"]
    assert rep["invariance_fraction"] == 1.0
