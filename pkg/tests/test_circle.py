import numpy as np
import pytest

from semicov.circle import find_periodic_points, from_function, model_lift
from semicov.classify import blow_up
from semicov.errors import DegreeTooSmall, NonIntegerDegree, NotACovering


def test_make_lift_linear_model(m2):
    assert m2.degree == 2
    assert m2.is_covering


def test_make_lift_sine_small_is_covering():
    m = from_function(lambda x: 2 * x + 0.1 * np.sin(2 * np.pi * x))
    assert m.degree == 2
    # oracle: the sampled slope on a 1e4 grid stays positive
    xs = np.linspace(0, 1, 10_000)
    slopes = np.diff(m(xs)) / np.diff(xs)
    assert slopes.min() > 0
    assert m.is_covering


def test_make_lift_sine_large_not_covering():
    m = from_function(lambda x: 2 * x + 0.6 * np.sin(2 * np.pi * x))
    assert m.degree == 2
    # oracle: sampled slope changes sign near x = 1/2
    xs = np.linspace(0, 1, 10_000)
    slopes = np.diff(m(xs)) / np.diff(xs)
    assert slopes.min() < 0 < slopes.max()
    assert not m.is_covering


def test_make_lift_rejects_non_integer_degree():
    with pytest.raises(NonIntegerDegree):
        from_function(lambda x: 1.5 * x)


def test_make_lift_rejects_degree_one():
    with pytest.raises(DegreeTooSmall):
        from_function(lambda x: x + 0.1 * np.sin(2 * np.pi * x))


def test_evaluate_equivariance_examples(m2):
    assert m2(1.25) == pytest.approx(2.5, abs=1e-12)
    assert m2(-0.5) == pytest.approx(-1.0, abs=1e-12)


def test_evaluate_sine_closed_form(sine2):
    # 2*0.25 + 0.1*sin(pi/2) = 0.6
    assert sine2(0.25) == pytest.approx(0.6, abs=1e-10)


def test_equivariance_on_random_points(sine2):
    # the extension shares the stored samples, so the only deviation from
    # F(x+1) = F(x) + d is the rounding of x+1 itself
    rng = np.random.default_rng(7)
    xs = rng.uniform(-3, 3, 1000)
    assert np.max(np.abs(sine2(xs + 1.0) - sine2(xs) - 2.0)) < 1e-11
    grid = np.linspace(0, 1, sine2.grid + 1)
    assert np.array_equal(sine2(grid + 1.0), sine2(grid) + 2.0)


def test_covering_monotone_on_dense_sample(sine2):
    xs = np.linspace(0, 1, 1000)
    assert np.all(np.diff(sine2(xs)) > 0)


def test_periodic_points_model_fixed(m2):
    pts = find_periodic_points(m2, 1)
    assert len(pts) == 1
    assert pts[0][0] == pytest.approx(0.0, abs=1e-9)
    assert pts[0][1] == 1


def test_periodic_points_model_period_two(m2):
    # oracle: solve 4x = x mod 1 -> x in {0, 1/3, 2/3}
    pts = find_periodic_points(m2, 2)
    angles = [a for a, _ in pts]
    assert angles == pytest.approx([0.0, 1 / 3, 2 / 3], abs=1e-9)
    assert [p for _, p in pts] == [1, 2, 2]


@pytest.mark.parametrize("d,n", [(2, 4), (3, 3)])
def test_periodic_point_count(d, n):
    pts = find_periodic_points(model_lift(d), n)
    assert len(pts) == d ** n - 1
    for angle, _ in pts:
        g = model_lift(d).iterate(angle, n) - angle
        assert abs(g - round(g)) <= 1e-9


def test_periodic_points_blow_up_interval():
    # interval opened at the fixed angle 0; the inserted return map has
    # fixed endpoints and an interior fixed point
    m = blow_up(2, [{"base_angle": 0, "length": 0.1, "kind": "north_south"}])
    pts = find_periodic_points(m, 1, tol=1e-9)
    angles = np.array([a for a, _ in pts])
    # oracle: sign changes of F(x) - x on a 1e5 grid
    xs = np.linspace(0, 1, 100_001)
    g = m(xs) - xs
    brackets = np.nonzero(g[:-1] * g[1:] < 0)[0]
    exact_zeros = int(np.count_nonzero(g == 0.0))   # 0.5 is fixed exactly on-grid
    assert len(angles) == len(brackets) + exact_zeros
    # construction places the plateau at [0.45, 0.55]
    assert angles == pytest.approx([0.45, 0.5, 0.55], abs=1e-3)


def test_periodic_points_negative_degree():
    # -2x = x mod 1 has the three solutions k/3
    pts = find_periodic_points(model_lift(-2), 1)
    assert [a for a, _ in pts] == pytest.approx([0.0, 1 / 3, 2 / 3], abs=1e-9)


def test_periodic_points_requires_covering():
    m = from_function(lambda x: 2 * x + 0.6 * np.sin(2 * np.pi * x))
    with pytest.raises(NotACovering):
        find_periodic_points(m, 1)
