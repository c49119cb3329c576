"""Random test instances: SPD matrices, populations and feasible anchors."""

import numpy as np

from .barycenter import barycenter
from .population import DiscretePopulation


def random_spd(rng, d, floor=0.1, scale=1.0):
    """Wishart-like SPD matrix with eigenvalues bounded below by ``floor``."""
    X = rng.normal(scale=scale, size=(d, d))
    S = X @ X.T / d + floor * np.eye(d)
    return 0.5 * (S + S.T)


def random_population(rng, d, k, floor=0.1, equal=False):
    atoms = np.stack([random_spd(rng, d, floor) for _ in range(k)])
    w = np.full(k, 1.0 / k) if equal else rng.dirichlet(np.full(k, 2.0))
    return DiscretePopulation(atoms, w / w.sum())


def random_feasible_anchor(rng, P, concentration=1.0):
    """Barycenter of a Dirichlet reweighting of ``P``.

    A strictly positive reweighting ``Q`` of ``P`` has barycenter ``M`` in the
    relative interior of the effective domain, since ``Q`` itself certifies a
    finite relative entropy with barycenter ``M``.
    """
    q = rng.dirichlet(np.full(P.k, concentration))
    q = np.clip(q, 1e-3, None)
    return barycenter(P.reweighted(q / q.sum()))
