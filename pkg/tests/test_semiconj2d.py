import math

import numpy as np
import pytest

from semicov.annulus import BaseMap, FiberMap, TauSpec, make_skew_product
from semicov.classify import blow_up
from semicov.errors import (BandNotInvariant, DisplacementDiverges, NotFixed,
                            OutOfDomain)
from semicov.semiconj1d import solve_semiconjugacy
from semicov.semiconj2d import (BandField2D, check_fiber_connector,
                                check_fiber_surjectivity, fixed_point_h_equality,
                                solve_band_semiconjugacy, solve_bounded_semiconjugacy)


def test_product_model_fixed_point(product_z2):
    h = solve_band_semiconjugacy(product_z2, (0.2, 0.8), 1e-10)
    assert h.residual <= 1e-10
    assert h.deviation_bound <= 1e-10


def test_identity_base_translated_fiber_ansatz():
    # H(x,y) = y + tau(x)/(d-1) solves H(x, 2y + 0.1x) = 2 H(x, y)
    m = make_skew_product(BaseMap("identity"), FiberMap(2, tau=TauSpec("linear", 0.1)))
    h = solve_band_semiconjugacy(m, (0.2, 0.8), 1e-8)
    xg, yg = np.meshgrid(np.linspace(0.2, 0.8, 33), np.linspace(0, 2, 41), indexing="ij")
    assert np.max(np.abs(h(xg, yg) - (yg + 0.1 * xg))) <= 1e-6


def test_contracting_base_iteration_budget():
    m = make_skew_product(BaseMap("contraction", (0.5, 0.9)),
                          FiberMap(2, tau=TauSpec("const", 0.2)))
    tol = 1e-8
    h = solve_band_semiconjugacy(m, (0.2, 0.8), tol)
    assert h.residual <= tol
    assert h.iterations <= math.ceil(math.log2(1 / tol)) + 5


def test_band_not_invariant(example_map):
    with pytest.raises(BandNotInvariant):
        solve_band_semiconjugacy(example_map, (0.2, 0.8))


def test_deviation_bound_uniform_over_shifts():
    m = make_skew_product(BaseMap("identity"), FiberMap(2, tau=TauSpec("linear", 0.1)))
    h = solve_band_semiconjugacy(m, (0.2, 0.8), 1e-8)
    xs = np.linspace(0.2, 0.8, 17)
    ys = np.linspace(0, 1, 33)
    xg, yg = np.meshgrid(xs, ys, indexing="ij")
    dev0 = np.max(np.abs(h(xg, yg) - yg))
    for k in (-3, 2):
        dev = np.max(np.abs(h(xg, yg + k) - (yg + k)))
        assert dev == pytest.approx(dev0, abs=1e-12)
    assert dev0 <= h.deviation_bound + 1e-12


def test_bounded_solver_square_base():
    m = make_skew_product(BaseMap("power", (2.0,)), FiberMap(2))
    h = solve_bounded_semiconjugacy(m, (0.2, 0.8), 1e-9)
    assert h.deviation_bound <= 1e-9
    assert h.metadata["interior_residual"] <= 1e-9


def test_bounded_solver_constant_translation():
    m = make_skew_product(BaseMap("power", (2.0,)), FiberMap(2, tau=TauSpec("const", 0.3)))
    h = solve_bounded_semiconjugacy(m, (0.2, 0.8), 1e-9)
    xg, yg = np.meshgrid(h.x_samples, np.linspace(0, 1, 9), indexing="ij")
    assert np.max(np.abs(h(xg, yg) - (yg + 0.3))) <= 1e-7


def test_bounded_solver_rejects_divergent_displacement(example_map):
    with pytest.raises(DisplacementDiverges):
        solve_bounded_semiconjugacy(example_map, (0.2, 0.8))


def test_fiber_surjectivity(product_z2):
    h = solve_band_semiconjugacy(product_z2, (0.2, 0.8), 1e-10)
    assert check_fiber_surjectivity(h, 0.5, 0.01)
    with pytest.raises(OutOfDomain):
        check_fiber_surjectivity(h, 0.95, 0.01)


def test_fiber_surjectivity_fails_on_corrupted_field():
    xs = np.linspace(0.2, 0.8, 9)
    values = np.tile(np.linspace(0, 1, 17), (9, 1))
    values[:, -1] = values[:, 0] + 1.0
    values[4, :] = 0.25          # one fiber collapsed to a constant
    bad = BandField2D((0.2, 0.8), xs, values)
    assert not check_fiber_surjectivity(bad, 0.5, 0.01)


def test_fiber_connector_levels():
    m = make_skew_product(BaseMap("identity"), FiberMap(2, tau=TauSpec("linear", 0.1)))
    h = solve_band_semiconjugacy(m, (0.2, 0.8), 1e-8)
    for z in np.linspace(0, 1, 16, endpoint=False):
        assert check_fiber_connector(h, float(z), 0.01)


def test_fiber_connector_domain_gap(product_z2):
    h = solve_band_semiconjugacy(product_z2, (0.2, 0.5), 1e-8)
    # levels outside the field's half-band count as a domain gap
    assert not check_fiber_connector(h, 0.25, 0.01,
                                     x_levels=np.linspace(0.2, 0.8, 9))


def test_agreement_with_1d_field_on_products(sine2):
    # on a y-grid matching the 1-D field, the discrete fixed points coincide
    prod = make_skew_product(BaseMap("identity"), FiberMap(2, circle=sine2))
    tol = 1e-8
    h2 = solve_band_semiconjugacy(prod, (0.3, 0.7), tol, nx=17, ny=sine2.grid)
    h1 = solve_semiconjugacy(sine2, 1, tol)
    ys = np.linspace(0, 1, 257)
    for x in (0.3, 0.5, 0.7):
        gap = np.max(np.abs(h2(np.full_like(ys, x), ys) - h1(ys)))
        assert gap <= 2 * tol


def test_fixed_point_equality_trivial(product_z2):
    h = solve_band_semiconjugacy(product_z2, (0.2, 0.8), 1e-10)
    rel = fixed_point_h_equality(product_z2, h, (0.5, 0.0), (0.5, 0.0), 1e-8)
    assert rel.equal and rel.lift_witness == 0 and not rel.inconclusive


def test_fixed_point_equality_plateau_endpoints():
    # product with a blown-up fiber: both plateau endpoints are fixed and
    # share the collapse angle, and a translated lift fixes the second one
    circle = blow_up(2, [{"base_angle": 0, "length": 0.1, "kind": "north_south"}])
    m = make_skew_product(BaseMap("identity"), FiberMap(2, circle=circle))
    h = solve_band_semiconjugacy(m, (0.3, 0.7), 1e-9, nx=17, ny=circle.grid)
    p = (0.5, 0.45)
    q = (0.5, 0.55)
    rel = fixed_point_h_equality(m, h, p, q, 1e-3)
    assert rel.equal
    assert rel.lift_witness is not None


def test_fixed_point_equality_rejects_non_fixed(product_z2):
    h = solve_band_semiconjugacy(product_z2, (0.2, 0.8), 1e-10)
    with pytest.raises(NotFixed):
        fixed_point_h_equality(product_z2, h, (0.5, 0.0), (0.5, 1 / 3), 1e-8)
