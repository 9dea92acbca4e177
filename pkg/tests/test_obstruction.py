import numpy as np
import pytest

from semicov.connectors import invariant_connector_from_arc, semiconjugacy_from_connectors
from semicov.errors import BranchAmbiguity, EndpointOutsideK
from semicov.obstruction import (BandModel, FiberLoop, band_model,
                                 counterexample_growth_table, lift_loop_winding,
                                 measure_deviation_bound, star_condition_scan)


def test_single_turn_lifts_to_half_turn(product_z2):
    # one turn lifts under z^2 to half a turn: no connector crossing
    rec = lift_loop_winding(product_z2, FiberLoop(0.5, 0.5), 1, 1,
                            (0.5, 0.25), (0.1, 0.9))
    assert rec.winding == 0
    assert rec.height_gap == pytest.approx(0.5, abs=1e-12)


def test_double_turn_lifts_to_full_turn(product_z2):
    rec = lift_loop_winding(product_z2, FiberLoop(0.5, 0.5), 1, 2,
                            (0.5, 0.25), (0.1, 0.9))
    assert rec.winding == 1
    assert rec.height_gap == pytest.approx(1.0, abs=1e-12)


def test_lift_pushforward_reproduces_loop(product_z2):
    rec = lift_loop_winding(product_z2, FiberLoop(0.5, 0.5), 2, 3,
                            (0.5, 0.125), (0.1, 0.9), path_samples=129)
    ts, path = rec.path
    fwd = path.copy()
    for _ in range(2):
        fwd = np.asarray(product_z2.fiber(np.full_like(fwd, 0.5), fwd))
    assert np.max(np.abs(fwd - (fwd[0] + 3 * ts))) <= 1e-8


def test_lift_endpoint_outside_band(product_z2):
    with pytest.raises(EndpointOutsideK):
        lift_loop_winding(product_z2, FiberLoop(0.5, 0.5), 1, 1,
                          (0.95, 0.25), (0.1, 0.9))


def test_lift_rejects_wrong_start_fiber(example_map):
    # the start column must be an n-th base preimage of the loop fiber
    with pytest.raises(BranchAmbiguity):
        lift_loop_winding(example_map, FiberLoop(0.9, 0.0), 1, 1,
                          (0.5, 0.0), (0.1, 0.9))


def test_star_scan_product_bounded(product_z2):
    report = star_condition_scan(product_z2, (0.1, 0.9), 5)
    assert report.max_winding <= 1
    assert set(report.max_per_n()) == {1, 2, 3, 4, 5}


def test_star_scan_example_within_bound(example_map):
    c = invariant_connector_from_arc(example_map, (0.5, 0.0),
                                     n_back=9, n_fwd=16, margin=1e-5)
    c.value = 0.0
    field = semiconjugacy_from_connectors(example_map, [c], depth=8,
                                          band=(0.1, 0.9), nx=65, ny=128)
    report = star_condition_scan(example_map, (0.1, 0.9), 6, h_field=field)
    assert report.deviation_bound == measure_deviation_bound(field, (0.1, 0.9))
    assert report.implied_bound == 2 * report.deviation_bound + 1
    assert report.satisfied
    # every record's endpoints sit on the anchor column inside the band
    assert all(0.1 <= r.start[0] <= 0.9 for r in report.records)


def test_star_scan_covers_all_branches(product_z2):
    report = star_condition_scan(product_z2, (0.1, 0.9), 4)
    counts = {}
    for r in report.records:
        counts[(r.n, r.j)] = counts.get((r.n, r.j), 0) + 1
    for (n, _), k in counts.items():
        assert k == 2 ** n


def test_band_model_invariants():
    for n in range(2, 9):
        model = band_model(n)
        model.verify()
        assert model.winding_lower_bound == n - 1
        assert model.y_prime_height - model.x_prime_height > n - 1
        assert model.alpha_end_height == n
        assert model.x_prime_height < 0.5
        assert model.y_prime_height > n


def test_band_model_rejects_bad_data():
    good = band_model(3)
    bad = BandModel(3, good.radii, 0.0, 2.0, 0.5, good.x_prime_height,
                    good.y_prime_height, good.j_max)
    with pytest.raises(ValueError):
        bad.verify()


def test_growth_table():
    rows = counterexample_growth_table(8)
    assert [r["n"] for r in rows] == list(range(2, 9))
    assert [r["lower_bound"] for r in rows] == [n - 1 for n in range(2, 9)]
    bounds = [r["lower_bound"] for r in rows]
    assert all(b2 > b1 for b1, b2 in zip(bounds, bounds[1:]))
    assert all(r["invariants_verified"] for r in rows)
    assert all(r["height_separation"] > r["n"] - 1 for r in rows)


def test_growth_table_requires_two():
    with pytest.raises(ValueError):
        counterexample_growth_table(1)
