import numpy as np
import pytest

from bwldp.barycenter import barycenter
from bwldp.exceptions import AnchorSingular, InfeasibleAnchor
from bwldp.gradient import (
    fd_rate_gradient,
    rate_gradient,
    riemannian_gradient,
    sqrt_frechet,
    transport_directional,
    transport_jacobian,
)
from bwldp.population import DiscretePopulation
from bwldp.spd import exp_map, sym_basis, sym_sqrt, transport_map
from bwldp.synth import random_feasible_anchor, random_population, random_spd
from bwldp.tilting import rate_function


def sym_direction(rng, d):
    D = rng.normal(size=(d, d))
    return D + D.T


class TestSqrtFrechet:
    def test_identity_and_scalar(self, rng):
        D = sym_direction(rng, 3)
        np.testing.assert_allclose(sqrt_frechet(np.eye(3), D), D / 2)
        np.testing.assert_allclose(sqrt_frechet([[4.0]], [[1.0]]), [[0.25]])

    def test_sylvester_identity(self, rng):
        for _ in range(20):
            S, D = random_spd(rng, 3), sym_direction(rng, 3)
            X, R = sqrt_frechet(S, D), sym_sqrt(S)
            assert np.linalg.norm(X @ R + R @ X - D, 2) <= 1e-10 * np.linalg.norm(D, 2)

    def test_against_finite_difference(self, rng):
        S, D = random_spd(rng, 3), sym_direction(rng, 3)
        h = 1e-5
        fd = (sym_sqrt(S + h * D) - sym_sqrt(S - h * D)) / (2 * h)
        X = sqrt_frechet(S, D)
        assert np.linalg.norm(X - fd) <= 1e-6 * np.linalg.norm(X)

    def test_singular(self):
        with pytest.raises(AnchorSingular):
            sqrt_frechet(np.diag([1.0, 0.0]), np.eye(2))


def fd_transport(M, S, H, h=1e-6):
    return (transport_map(M + h * H, S) - transport_map(M - h * H, S)) / (2 * h)


class TestTransportDirectional:
    def test_scalar(self):
        np.testing.assert_allclose(transport_directional([[4.0]], [[9.0]], [[1.0]]), [[-3.0 / 16.0]])

    def test_self_transport(self, rng):
        M, H = random_spd(rng, 2), sym_direction(rng, 2)
        got, fd = transport_directional(M, M, H), fd_transport(M, M, H)
        assert np.linalg.norm(got - fd) <= 1e-5 * max(1.0, np.linalg.norm(fd))

    def test_random_against_fd(self, rng):
        for _ in range(10):
            M, S, H = random_spd(rng, 2), random_spd(rng, 2), sym_direction(rng, 2)
            got, fd = transport_directional(M, S, H), fd_transport(M, S, H)
            assert np.linalg.norm(got - fd) <= 1e-5 * np.linalg.norm(fd)

    def test_batched_matches_single(self, rng):
        M, S = random_spd(rng, 3), random_spd(rng, 3)
        E = sym_basis(3)
        J = transport_jacobian(M, S, E)
        for Ja, H in zip(J, E):
            np.testing.assert_allclose(Ja, transport_directional(M, S, H), atol=1e-12)


class TestRateGradient:
    def test_vanishes_at_barycenter(self, rng):
        P = random_population(rng, 2, 5)
        assert np.linalg.norm(rate_gradient(P, barycenter(P)), 2) <= 1e-7

    def test_scalar_chain_rule(self, two_point):
        G = rate_gradient(two_point, [[2.25]])
        assert G[0, 0] == pytest.approx(-np.log(3) / 6, abs=1e-10)

    def test_matches_finite_differences(self, rng):
        for d in (2, 3):
            k = d * (d + 1) // 2 + 2
            P = random_population(rng, d, k)
            M = random_feasible_anchor(rng, P)
            G, F = rate_gradient(P, M), fd_rate_gradient(P, M)
            assert np.linalg.norm(G - F) <= 1e-3 * np.linalg.norm(F)

    def test_descent_along_riemannian_gradient(self, rng):
        P = random_population(rng, 2, 5)
        M = random_feasible_anchor(rng, P)
        V = riemannian_gradient(M, rate_gradient(P, M))
        eps = 1e-6
        slope = (rate_function(P, exp_map(M, eps * V)) - rate_function(P, exp_map(M, -eps * V))) / (2 * eps)
        assert slope == pytest.approx(np.trace(V @ M @ V), rel=1e-4)

    def test_infeasible(self, two_point):
        with pytest.raises(InfeasibleAnchor):
            rate_gradient(two_point, [[16.0]])
