import numpy as np
import pytest

from bwldp.dual import hull_face, maximize_dual


def kl(q, w):
    pos = q > 0
    return float(np.sum(q[pos] * np.log(q[pos] / w[pos])))


class TestHullFace:
    square = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])

    def test_interior(self):
        status, face = hull_face(self.square, np.array([0.3, 0.6]))
        assert status == "interior" and face.all()

    def test_edge(self):
        status, face = hull_face(self.square, np.array([0.5, 0.0]))
        assert status == "boundary"
        np.testing.assert_array_equal(face, [True, True, False, False])

    def test_vertex_and_outside(self):
        assert hull_face(self.square, np.array([1.0, 1.0]))[1].tolist() == [False, False, False, True]
        assert hull_face(self.square, np.array([1.5, 0.5]))[0] == "outside"


class TestMaximizeDual:
    def test_matches_entropy_projection(self, rng):
        phi = rng.normal(size=(6, 3))
        w = rng.dirichlet(np.ones(6))
        q0 = rng.dirichlet(np.ones(6))
        target = q0 @ phi
        for method in ("newton", "gradient"):
            res = maximize_dual(phi, w, target, method=method)
            assert res.status == "converged"
            np.testing.assert_allclose(res.weights @ phi, target, atol=1e-9)
            assert abs(res.value - kl(res.weights, w)) <= 1e-8 * (1 + res.value)
            assert res.value <= kl(q0, w) + 1e-12

    def test_off_affine_hull_is_infinite(self):
        phi = np.array([[0.0, 0.0], [1.0, 0.0]])
        res = maximize_dual(phi, [0.5, 0.5], np.array([0.5, 0.1]))
        assert res.status == "infeasible" and res.value == np.inf

    def test_outside_segment_is_infinite(self):
        phi = np.array([[0.0], [1.0]])
        res = maximize_dual(phi, [0.5, 0.5], np.array([1.5]))
        assert res.status == "infeasible"

    def test_boundary_value(self):
        # a vertex of a triangle: supremum -log w_vertex, not attained
        phi = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        w = np.array([0.2, 0.3, 0.5])
        res = maximize_dual(phi, w, np.array([0.0, 0.0]), tol=1e-12)
        assert res.value == pytest.approx(-np.log(0.2), abs=1e-10)

    def test_edge_value(self):
        phi = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        w = np.array([0.2, 0.3, 0.5])
        res = maximize_dual(phi, w, np.array([0.4, 0.0]), tol=1e-12)
        assert res.status == "boundary"
        q = np.array([0.6, 0.4, 0.0])
        assert res.value == pytest.approx(kl(q, w), abs=1e-9)
        np.testing.assert_allclose(res.weights, q, atol=1e-9)

    def test_zero_weight_atoms_ignored(self):
        phi = np.array([[0.0], [1.0], [5.0]])
        res = maximize_dual(phi, [0.5, 0.5, 0.0], np.array([2.0]))
        assert res.status == "infeasible"
