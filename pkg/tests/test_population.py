import json

import numpy as np
import pytest

from bwldp.exceptions import InvalidPopulation
from bwldp.population import (
    DiscretePopulation,
    pi_norm_stats,
    replicate_seed,
    sample,
    sample_replicate,
    splitmix64,
    validate,
)


class TestValidate:
    def test_valid_two_point(self, two_point):
        rep = validate(two_point)
        assert rep.ok and rep.n_atoms == 2 and rep.dim == 1
        assert rep.exp_integrability.startswith("inf")

    def test_normalization_failure(self):
        rep = validate(([[[1.0]], [[9.0]]], [0.6, 0.6]))
        assert not rep.ok
        assert any("sum" in f for f in rep.failures)

    def test_singular_atom_flagged(self):
        rep = validate(([np.diag([1.0, 0.0]), np.eye(2)], [0.5, 0.5]))
        assert not rep.ok
        assert rep.min_eigenvalues[0] == 0.0

    def test_never_raises(self):
        assert not validate((["a"], [1.0])).ok
        assert not validate(([[[1.0, 2.0]]], [1.0])).ok
        assert not validate(([[[1.0]]], [-1.0])).ok

    def test_require_valid(self):
        P = DiscretePopulation([[[1.0]]], [0.5])
        with pytest.raises(InvalidPopulation):
            P.require_valid()

    def test_json_round_trip(self, two_point, tmp_path):
        path = tmp_path / "pop.json"
        path.write_text(json.dumps(two_point.to_dict()))
        P = DiscretePopulation.from_json(path)
        np.testing.assert_array_equal(P.atoms, two_point.atoms)
        np.testing.assert_array_equal(P.weights, two_point.weights)


class TestSample:
    def test_point_mass(self):
        P = DiscretePopulation([np.eye(2)], [1.0])
        assert np.all(sample(P, 50, seed=3) == 0)

    def test_deterministic(self, two_point):
        np.testing.assert_array_equal(sample(two_point, 100, 7), sample(two_point, 100, 7))
        assert not np.array_equal(sample_replicate(two_point, 100, 7, 0),
                                  sample_replicate(two_point, 100, 7, 1))

    def test_frequencies(self, two_point):
        n = 100_000
        freq = np.mean(sample(two_point, n, 2024) == 0)
        assert 0.494 <= freq <= 0.506

    def test_frequencies_three_atoms(self):
        w = np.array([0.2, 0.3, 0.5])
        P = DiscretePopulation([[[1.0]], [[2.0]], [[3.0]]], w)
        n = 100_000
        counts = np.bincount(sample(P, n, 99), minlength=3) / n
        band = 4 * np.sqrt(w * (1 - w) / n)
        assert np.all(np.abs(counts - w) <= band)

    def test_seed_rule(self):
        assert splitmix64(0) == 0xE220A8397B1DCDAF
        assert replicate_seed(5, 0) == 5 ^ 0xE220A8397B1DCDAF
        assert 0 <= replicate_seed(-1, 3) < 2**64


class TestStats:
    def test_two_point(self, two_point):
        s = pi_norm_stats(two_point)
        assert (s.mu, s.pi_min, s.pi_max, s.sigma_sq) == pytest.approx((2.0, 1.0, 3.0, 1.0))

    def test_point_mass(self):
        s = pi_norm_stats(DiscretePopulation([np.eye(2)], [1.0]))
        assert s.mu == pytest.approx(np.sqrt(2.0))
        assert s.sigma_sq == 0.0

    def test_three_atoms(self):
        s = pi_norm_stats(DiscretePopulation([[[1.0]], [[4.0]], [[9.0]]], [0.25, 0.5, 0.25]))
        assert s.mu == pytest.approx(2.0)
        assert s.sigma_sq == pytest.approx(1.0)
        assert s.pi_min <= s.mu <= s.pi_max
