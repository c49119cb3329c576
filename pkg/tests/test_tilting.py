import numpy as np
import pytest

from bwldp.barycenter import barycenter
from bwldp.exceptions import AnchorSingular, InfeasibleAnchor, SupportViolation
from bwldp.population import DiscretePopulation, pi_norm_stats
from bwldp.spd import bw_distance, exp_map, m_inner, transport_map
from bwldp.synth import random_feasible_anchor, random_population, random_spd
from bwldp.tilting import (
    cgf,
    rate_function,
    relative_entropy,
    solve_dual,
    tilt,
    tilt_interpolation_path,
)

from conftest import RATE_AT_225, legendre_1d


class TestCGF:
    def test_zero_tilt(self, rng):
        P = random_population(rng, 2, 3)
        assert cgf(P, random_spd(rng, 2), np.zeros((2, 2))) == pytest.approx(0.0, abs=1e-15)

    def test_point_mass_is_linear(self, rng):
        S, M = random_spd(rng, 2), random_spd(rng, 2)
        A = rng.normal(size=(2, 2))
        A = A + A.T
        P = DiscretePopulation([S], [1.0])
        expected = m_inner(M, A, transport_map(M, S) - np.eye(2))
        assert cgf(P, M, A) == pytest.approx(expected, rel=1e-12)

    def test_scalar_log_cosh(self, two_point):
        assert cgf(two_point, [[4.0]], [[0.5]]) == pytest.approx(np.log(np.cosh(1.0)), rel=1e-14)

    def test_no_overflow(self, two_point):
        assert np.isfinite(cgf(two_point, [[4.0]], [[400.0]]))

    def test_singular_anchor(self, two_point):
        with pytest.raises(AnchorSingular):
            cgf(two_point, [[0.0]], [[1.0]])


class TestTilt:
    def test_zero_returns_base(self, rng):
        P = random_population(rng, 2, 4)
        tp = tilt(P, random_spd(rng, 2), np.zeros((2, 2)))
        np.testing.assert_array_equal(tp.tilted_weights, P.weights)

    def test_scalar_weights(self, two_point):
        tp = tilt(two_point, [[2.25]], [[-np.log(3) / 3]])
        np.testing.assert_allclose(tp.tilted_weights, [0.75, 0.25], atol=1e-14)

    def test_point_mass(self, rng):
        P = DiscretePopulation([random_spd(rng, 2)], [1.0])
        np.testing.assert_array_equal(tilt(P, np.eye(2), np.eye(2)).tilted_weights, [1.0])


class TestSolveDual:
    def test_barycenter_has_zero_rate(self, rng):
        P = random_population(rng, 2, 4)
        sol = solve_dual(P, barycenter(P))
        assert sol.feasible
        assert sol.rate <= 1e-9
        assert np.linalg.norm(sol.A, 2) <= 1e-6

    def test_scalar_oracle(self, two_point):
        sol = solve_dual(two_point, [[2.25]])
        assert sol.feasible
        assert sol.rate == pytest.approx(RATE_AT_225, abs=1e-12)
        assert sol.A[0, 0] == pytest.approx(-np.log(3) / 3, abs=1e-9)
        np.testing.assert_allclose(sol.tilted_weights, [0.75, 0.25], atol=1e-12)

    def test_outside_hull(self, two_point):
        sol = solve_dual(two_point, [[16.0]])
        assert not sol.feasible and sol.status == "infeasible"
        assert sol.rate == np.inf
        assert rate_function(two_point, [[16.0]]) == np.inf

    def test_hull_endpoint_is_finite(self, two_point):
        assert rate_function(two_point, [[1.0]]) == pytest.approx(np.log(2.0), abs=1e-8)

    def test_gradient_method_agrees(self, two_point, rng):
        assert solve_dual(two_point, [[2.25]], method="gradient").rate == pytest.approx(RATE_AT_225, abs=1e-10)
        P = random_population(rng, 2, 5)
        M = random_feasible_anchor(rng, P)
        a = solve_dual(P, M).rate
        b = solve_dual(P, M, method="gradient").rate
        assert a == pytest.approx(b, abs=1e-8)

    def test_duality_certificate(self, rng):
        for d in (1, 2, 3):
            P = random_population(rng, d, 4)
            for _ in range(3):
                M = random_feasible_anchor(rng, P)
                sol = solve_dual(P, M)
                assert sol.feasible
                Q = barycenter(P.reweighted(sol.tilted_weights), tol=1e-12)
                assert bw_distance(Q, M) <= 1e-7 * (1 + np.sqrt(np.trace(M)))
                H = relative_entropy(sol.tilted_weights, P.weights)
                assert abs(sol.rate - H) <= 1e-8 * (1 + sol.rate)

    def test_rate_is_min_entropy(self, rng):
        # any reweighting with barycenter M has at least the rate as entropy
        P = random_population(rng, 2, 4)
        q = rng.dirichlet(np.ones(4))
        M = barycenter(P.reweighted(q), tol=1e-13)
        assert rate_function(P, M) <= relative_entropy(q, P.weights) + 1e-9

    def test_separation_from_barycenter(self, rng):
        P = random_population(rng, 2, 5)
        Ms = barycenter(P)
        for _ in range(5):
            M = random_feasible_anchor(rng, P)
            if bw_distance(M, Ms) >= 0.05 * np.sqrt(np.trace(Ms)):
                assert rate_function(P, M) >= 1e-6

    def test_coercivity_bound(self, rng):
        for _ in range(5):
            P = random_population(rng, 2, 4)
            s = pi_norm_stats(P)
            for _ in range(4):
                M = random_feasible_anchor(rng, P, concentration=0.3)
                pm = np.sqrt(np.trace(M))
                bound = ((pm - s.mu) ** 2 - s.mu ** 2) / (2 * s.sigma_sq)
                assert rate_function(P, M) >= bound - 1e-8

    def test_geodesic_reduction(self, rng):
        S0 = random_spd(rng, 2)
        roots = np.array([0.5, 1.0, 1.8, 2.5])
        w = rng.dirichlet(np.ones(4))
        P = DiscretePopulation([c * c * S0 for c in roots], w)
        for s in np.linspace(0.6, 2.4, 9):
            assert rate_function(P, s * s * S0) == pytest.approx(legendre_1d(roots, w, s), abs=1e-6)


class TestRelativeEntropy:
    def test_values(self):
        assert relative_entropy([0.5, 0.5], [0.5, 0.5]) == 0.0
        assert relative_entropy([0.75, 0.25], [0.5, 0.5]) == pytest.approx(RATE_AT_225, abs=1e-15)
        assert relative_entropy([1.0, 0.0], [0.5, 0.5]) == pytest.approx(np.log(2.0))

    def test_support_violation(self):
        with pytest.raises(SupportViolation):
            relative_entropy([0.5, 0.5], [1.0, 0.0])


class TestInterpolation:
    def test_endpoints(self, two_point):
        np.testing.assert_allclose(tilt_interpolation_path(two_point, [[2.25]], [[4.0]], 0.0), [[2.25]])
        np.testing.assert_allclose(tilt_interpolation_path(two_point, [[2.25]], [[4.0]], 1.0), [[4.0]])

    def test_scalar_midpoint(self, two_point):
        mid = tilt_interpolation_path(two_point, [[2.25]], [[4.0]], 0.5)
        assert rate_function(two_point, mid) <= 0.5 * RATE_AT_225 + 1e-12

    def test_convexity(self, rng):
        P = random_population(rng, 2, 4)
        M0, M1 = random_feasible_anchor(rng, P), random_feasible_anchor(rng, P)
        duals = solve_dual(P, M0), solve_dual(P, M1)
        for t in np.arange(1, 10) / 10:
            mid = tilt_interpolation_path(P, M0, M1, t, duals=duals)
            assert rate_function(P, mid) <= (1 - t) * duals[0].rate + t * duals[1].rate + 1e-6

    def test_infeasible_endpoint(self, two_point):
        with pytest.raises(InfeasibleAnchor):
            tilt_interpolation_path(two_point, [[2.25]], [[16.0]], 0.5)
