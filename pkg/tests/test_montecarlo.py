import numpy as np
import pytest

from bwldp.montecarlo import (
    binomial_oracle,
    exact_log_tail,
    rate_slope,
    simulate_distances,
    tail_estimate,
    two_point_scalar,
)
from bwldp.population import DiscretePopulation

from conftest import RATE_AT_04


class TestBinomialOracle:
    def test_small_cases(self):
        assert binomial_oracle(0.5, 2, 0.5) == pytest.approx(0.5)
        assert binomial_oracle(0.5, 10, 0.2) == pytest.approx(0.34375, abs=1e-15)

    def test_large_n_rate(self):
        rate = -exact_log_tail(DiscretePopulation([[[1.0]], [[9.0]]], [0.5, 0.5]), 2000, 0.4) / 2000
        assert abs(rate - RATE_AT_04) / RATE_AT_04 <= 0.02

    def test_log_space_is_stable(self):
        assert np.isfinite(exact_log_tail(DiscretePopulation([[[1.0]], [[9.0]]], [0.5, 0.5]), 10000, 0.4))

    def test_bad_probability(self):
        with pytest.raises(ValueError):
            binomial_oracle(1.5, 3, 0.1)

    def test_pattern(self, two_point):
        assert two_point_scalar(two_point) == (1.0, 3.0, 0.5)
        assert two_point_scalar(DiscretePopulation([np.eye(2), 2 * np.eye(2)], [0.5, 0.5])) is None


class TestSimulate:
    def test_point_mass(self):
        P = DiscretePopulation([np.diag([1.0, 2.0])], [1.0])
        assert np.all(simulate_distances(P, 5, 50, 1).distances <= 1e-12)

    def test_single_draw(self, two_point):
        np.testing.assert_allclose(simulate_distances(two_point, 1, 200, 3).distances, 1.0, atol=1e-12)

    def test_two_draws(self, two_point):
        d = simulate_distances(two_point, 2, 100000, 7).distances
        assert set(np.round(d, 9)) <= {0.0, 1.0}
        est = tail_estimate(d, 0.5)
        assert 0.494 <= est.p_hat <= 0.506

    def test_reproducible_per_seed(self, two_point):
        a = simulate_distances(two_point, 6, 300, 11).distances
        b = simulate_distances(two_point, 6, 300, 11, chunk=7, workers=2).distances
        np.testing.assert_array_equal(a, b)
        assert simulate_distances(two_point, 6, 300, 11).failures == 0

    def test_median_shrinks(self, rng):
        from bwldp.synth import random_population
        P = random_population(rng, 2, 4)
        small = np.median(simulate_distances(P, 25, 400, 5).distances)
        large = np.median(simulate_distances(P, 400, 400, 5).distances)
        assert large < small


class TestTailEstimate:
    def test_extremes(self):
        d = np.array([0.1, 0.2, 0.3])
        assert tail_estimate(d, 0.0).p_hat == 1.0
        est = tail_estimate(d, 5.0)
        assert est.p_hat == 0.0 and est.wilson_lo == 0.0 and 0 < est.wilson_hi < 1

    def test_empty(self):
        with pytest.raises(ValueError):
            tail_estimate([], 0.1)

    def test_wilson_coverage(self, two_point):
        exact = binomial_oracle(0.5, 10, 0.2)
        covered = 0
        for seed in range(100):
            est = tail_estimate(simulate_distances(two_point, 10, 1000, seed).distances, 0.4)
            covered += est.wilson_lo <= exact <= est.wilson_hi
        assert covered >= 93


class TestRateSlope:
    def test_degenerate(self):
        P = DiscretePopulation([[[4.0]]], [1.0])
        fit = rate_slope(P, 0.1, [10, 20], 100, 0)
        assert fit.status == "degenerate" and np.isnan(fit.slope)

    def test_insufficient_hits(self, two_point):
        # exact tails are 1.7e-2 and 4.5e-4, so 300 replicates give a handful of hits at most
        fit = rate_slope(two_point, 0.4, [40, 80], 300, 0)
        assert fit.status == "insufficient"
        assert not any(row["used"] for row in fit.table)
        assert any(row["hits"] > 0 for row in fit.table)

    def test_grid_must_increase(self, two_point):
        with pytest.raises(ValueError):
            rate_slope(two_point, 0.4, [20, 10], 10, 0)

    def test_larger_radius_decays_faster(self, two_point):
        n_grid = [20, 40, 60]
        a = rate_slope(two_point, 0.4, n_grid, 20000, 3)
        b = rate_slope(two_point, 0.5, n_grid, 20000, 3)
        assert a.status == b.status == "ok"
        assert b.slope > a.slope
