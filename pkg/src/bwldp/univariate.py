"""Univariate Wasserstein space through the quantile embedding.

A distribution on the line is represented by its quantile function sampled at
the midpoints ``(j - 1/2) / m``. The 2-Wasserstein distance is then the
``L^2([0, 1])`` distance of quantile functions (midpoint rule), barycenters are
weighted means of quantile functions, and the rate function reduces to a
relative-entropy projection with linear constraints.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .dual import DEFAULT_CAP, maximize_dual
from .exceptions import GridMismatch, InvalidPopulation
from .population import WEIGHT_TOL
from .tilting import relative_entropy

DEFAULT_GRID = 1024
MONOTONE_TOL = 1e-12


def midpoints(m):
    return (np.arange(1, m + 1) - 0.5) / m


@dataclass(frozen=True)
class QuantileFunction:
    """Nondecreasing quantile function on the midpoint grid of size ``len(values)``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.size == 0 or not np.all(np.isfinite(v)):
            raise ValueError("quantile values must be finite and nonempty")
        drop = -np.diff(v)
        if drop.size and drop.max() > MONOTONE_TOL * max(1.0, float(np.abs(v).max())):
            raise ValueError("quantile function must be nondecreasing")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def m(self):
        return self.values.size

    def mean(self):
        return float(self.values.mean())


def gaussian_quantile(scale, m=DEFAULT_GRID, loc=0.0):
    """Quantile function of ``N(loc, scale^2)``."""
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    return QuantileFunction(loc + scale * norm.ppf(midpoints(m)))


def point_mass(c, m=DEFAULT_GRID):
    return QuantileFunction(np.full(m, float(c)))


def _check_grid(*qs):
    sizes = {q.m for q in qs}
    if len(sizes) != 1:
        raise GridMismatch(f"quantile grids differ: {sorted(sizes)}")


def w2_distance(q1, q2):
    """``sqrt((1/m) sum_j (q1_j - q2_j)^2)``."""
    _check_grid(q1, q2)
    return float(np.sqrt(np.mean((q1.values - q2.values) ** 2)))


@dataclass(frozen=True)
class UnivariatePopulation:
    atoms: tuple
    weights: np.ndarray
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        atoms = tuple(a if isinstance(a, QuantileFunction) else QuantileFunction(a) for a in self.atoms)
        if not atoms:
            raise InvalidPopulation("population has no atoms")
        try:
            _check_grid(*atoms)
        except GridMismatch as exc:
            raise InvalidPopulation(str(exc)) from exc
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.shape != (len(atoms),) or not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvalidPopulation("weights must be nonnegative, finite and one per atom")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise InvalidPopulation(f"weights sum to {w.sum()!r}, not 1")
        w.flags.writeable = False
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "matrix", np.stack([a.values for a in atoms]))

    @property
    def m(self):
        return self.atoms[0].m

    @property
    def k(self):
        return len(self.atoms)


def uv_barycenter(P):
    """Weighted mean of the atom quantile functions."""
    return QuantileFunction(P.weights @ P.matrix)


def uv_frechet(P, q):
    """``sum_i w_i W_2^2(q, atom_i)``."""
    _check_grid(q, *P.atoms)
    return float(P.weights @ np.mean((P.matrix - q.values) ** 2, axis=1))


@dataclass(frozen=True)
class UnivariateRate:
    value: float
    status: str
    tilted_weights: np.ndarray
    residual: float
    primal: float

    @property
    def feasible(self):
        return self.status == "converged"


def uv_solve(P, target, tol=1e-9, max_iter=None, cap=DEFAULT_CAP):
    """Relative-entropy projection of ``P`` onto populations with barycenter ``target``.

    Minimizes ``sum_i q_i log(q_i / w_i)`` subject to
    ``sum_i q_i Q_i = target`` on the grid. The constraint only sees the ``k``
    atom quantiles, so the dual over ``L^2`` collapses to a log-partition
    problem on the span of the atoms, solved by the shared dual solver with
    features ``Q_i / sqrt(m)`` (making the Euclidean product the quadrature).
    """
    _check_grid(target, *P.atoms)
    root = np.sqrt(P.m)
    res = maximize_dual(P.matrix / root, P.weights, target.values / root,
                        tol=tol, max_iter=max_iter, cap=cap)
    value = res.value if res.status != "infeasible" else np.inf
    primal = relative_entropy(res.weights, P.weights) if np.isfinite(value) else np.inf
    return UnivariateRate(float(value), res.status, res.weights, res.residual, primal)


def uv_rate_function(P, target, **kwargs):
    """Rate function at ``target``; ``inf`` outside the convex hull of the atoms."""
    return uv_solve(P, target, **kwargs).value
