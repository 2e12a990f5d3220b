import numpy as np
import pytest

from cctrends.basis.design import default_K, k_grid
from cctrends.errors import DimensionError
from cctrends.mc.dgp import rng_for, simulate_dgp
from cctrends.models.types import DgpConfig
from cctrends.trends.misspec import misspec_diagnostic, pivotal_tau, stripe_bounds


def test_tau_order():
    np.testing.assert_allclose(pivotal_tau([0.99, 0.9, 0.1], 2), [0.1, 0.01])


def test_stripe_bounds_one_dimension():
    low, high = stripe_bounds(np.array([1.5]), 0.4, "infinity", 100)
    assert low == pytest.approx(1.5 - np.log(100) - 0.4)
    assert high == pytest.approx(1.5 - np.log(100) + 0.4)


def test_stripe_bounds_trace():
    low, _ = stripe_bounds(np.log([2.0, 3.0]), 0.0, "one", 1)
    assert low == pytest.approx(np.log(5.0))


@pytest.mark.parametrize("norm", ["one", "infinity"])
def test_stripe_bounds_are_attained(norm):
    center, delta, K = np.log([0.5, 2.0, 7.0]), 0.3, 50
    low, high = stripe_bounds(center, delta, norm, K)
    reduce = np.sum if norm == "one" else np.max
    for sign, bound in ((-1, low), (1, high)):
        corner = np.exp(center + sign * delta) / K
        assert np.log(reduce(corner)) == pytest.approx(bound)
    inside = np.exp(center + np.random.default_rng(0).uniform(-delta, delta, (200, 3))) / K
    values = np.log(reduce(inside, axis=1))
    assert np.all((values >= low) & (values <= high))


@pytest.fixture(scope="module")
def two_trends():
    return simulate_dgp(DgpConfig(p=4, s=2, a=0.5, T=1000, seed=4))


def test_diagnostic(two_trends, small_tables):
    grid = k_grid(default_K(1000), 1, 2)
    diag = misspec_diagnostic(two_trends, 2, grid, "infinity", small_tables.table(2), eta=0.05)
    assert [K for K in grid.values] == [178, 356, 534]
    assert len(diag.log_points) == 3
    np.testing.assert_allclose([x for x, _ in diag.log_points], np.log(grid.values))
    assert all(t.shape == (2,) for t in diag.tau)
    assert diag.fitted_slope < 0
    assert diag.stripe_delta == small_tables.table(2).delta(0.05)
    assert diag.inside_stripe == (diag.stripe_distance < diag.stripe_delta)


def test_single_K_has_no_slope(two_trends, small_tables):
    diag = misspec_diagnostic(two_trends, 1, k_grid(100), "one", small_tables.table(1), location="median")
    assert diag.fitted_slope is None
    np.testing.assert_array_equal(diag.stripe_center, small_tables.table(1).median_log)


def test_no_trends(two_trends, small_tables):
    with pytest.raises(DimensionError):
        misspec_diagnostic(two_trends, 0, k_grid(100), "one", small_tables.table(1))


def test_table_dimension_must_match(two_trends, small_tables):
    with pytest.raises(DimensionError):
        misspec_diagnostic(two_trends, 2, k_grid(100), "one", small_tables.table(1))


@pytest.mark.slow
def test_slope_near_minus_one(small_tables):
    slopes = []
    for rep in range(40):
        cfg = DgpConfig(p=4, s=2, a=1.0, T=4000)
        panel = simulate_dgp(cfg, rng_for(100, rep))
        diag = misspec_diagnostic(panel, 2, k_grid(default_K(4000), 1, 3), "infinity", small_tables.table(2))
        slopes.append(diag.fitted_slope)
    inside = np.mean([-1.35 <= s <= -0.65 for s in slopes])
    assert inside >= 0.85
