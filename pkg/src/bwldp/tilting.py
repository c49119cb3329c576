"""Exponential tilting of a population around an anchor and the rate function.

For an anchor ``M`` and a tangent vector ``A``, the tilt ``P^{M->A}`` reweights
atom ``S_i`` proportionally to ``w_i exp tr(A M t_M^{S_i})``. The rate function
``I_P(M)`` is the value of the concave dual

    sup_A  tr(AM) - log sum_i w_i exp tr(A M t_M^{S_i}),

whose maximizer ``A_M`` produces the unique tilt with barycenter ``M``.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .barycenter import barycenter_fixed_point
from .dual import DEFAULT_CAP, maximize_dual
from .exceptions import DimensionMismatch, InfeasibleAnchor, SupportViolation
from .spd import as_symmetric, sqrt_and_inv_sqrt, sym, sym_basis, transport_map

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class TiltedPopulation:
    base: object
    anchor: np.ndarray
    tilt: np.ndarray
    tilted_weights: np.ndarray

    def as_population(self):
        return self.base.reweighted(self.tilted_weights)


@dataclass(frozen=True)
class DualSolution:
    """Result of :func:`solve_dual`.

    ``status`` is one of

    ``"converged"``
        optimum attained; ``feasible`` is true.
    ``"boundary"``
        the anchor is on the edge of the effective domain: ``rate`` is finite
        but no tilt attains it. ``tilted_weights`` is the limiting tilt, which
        lives on a face of the atoms and still has barycenter ``M``.
    ``"infeasible"``
        ``rate`` is inf.
    ``"max_iter"``
        iteration budget exhausted; ``rate`` holds the best lower bound found.
    """

    anchor: np.ndarray
    A: np.ndarray
    rate: float
    sup_estimate: float
    tilted_weights: np.ndarray
    residual: float
    iterations: int
    status: str
    transports: np.ndarray

    @property
    def feasible(self):
        return self.status == "converged"

    @property
    def converged(self):
        return self.status != "max_iter"

    @property
    def finite(self):
        return bool(np.isfinite(self.rate))

    def mean_transport(self):
        return np.einsum("i,ijk->jk", self.tilted_weights, self.transports)


def _transports(P, M):
    return np.array([transport_map(M, S) for S in P.atoms])


def _inner_with_anchor(M, A, T):
    """``tr(A M T_i)`` for a stack of maps ``T``."""
    return np.einsum("jk,kl,ilj->i", A, M, T)


def cgf(P, M, A):
    """Cumulant generating function ``log sum_i w_i exp <A, t_M^{S_i} - I>_M``."""
    M = as_symmetric(M, "anchor")
    A = as_symmetric(A, "tilt")
    if A.shape != M.shape or M.shape[0] != P.dim:
        raise DimensionMismatch("anchor, tilt and population dimensions differ")
    T = _transports(P, M)
    z = _inner_with_anchor(M, A, T - np.eye(P.dim))
    supp = P.weights > 0
    return float(logsumexp(z[supp], b=P.weights[supp]))


def _tilted_weights(P, M, A, T):
    z = _inner_with_anchor(M, A, T)
    supp = P.weights > 0
    logq = np.full(P.k, -np.inf)
    logq[supp] = np.log(P.weights[supp]) + z[supp]
    q = np.exp(logq - logsumexp(logq[supp]))
    q[q < 1e-300] = 0.0
    return q / q.sum()


def tilt(P, M, A):
    """Exponential tilt ``P^{M->A}``; ``A = 0`` returns the base weights unchanged."""
    M = as_symmetric(M, "anchor")
    A = as_symmetric(A, "tilt")
    if not np.any(A):
        return TiltedPopulation(P, M, A, P.weights.copy())
    return TiltedPopulation(P, M, A, _tilted_weights(P, M, A, _transports(P, M)))


def _tangent_coordinates(M):
    """Basis change making ``<.,.>_M`` Euclidean on the symmetric matrices.

    Returns ``(E, L)`` with ``E`` the Frobenius basis and ``L`` the Cholesky factor
    of the Gram matrix ``G_ab = tr(E_a M E_b)``. A symmetric matrix with Frobenius
    coordinates ``c`` has M-orthonormal coordinates ``L.T @ c``.
    """
    d = M.shape[0]
    E = sym_basis(d)
    G = np.einsum("aij,jk,bki->ab", E, M, E)
    return E, np.linalg.cholesky(sym(G))


def solve_dual(P, M, tol=DEFAULT_TOL, max_iter=None, cap=DEFAULT_CAP, method="newton"):
    """Solve the tilting dual at anchor ``M``.

    Parameters
    ----------
    P : DiscretePopulation
    M : ndarray, shape (d, d)
        Strictly positive anchor.
    tol : float
        Convergence when ``||t_bar - I||_M <= tol`` with ``t_bar`` the tilted mean
        transport map.
    max_iter : int, optional
        Defaults to 200 for ``"newton"`` and 20000 for ``"gradient"``.
    cap : float
        Divergence cap on ``||A||_2`` used to declare the anchor infeasible.
    method : {"newton", "gradient"}
        ``"gradient"`` is ascent along ``I - t_bar`` (the gradient in the
        M-geometry) with Armijo backtracking; ``"newton"`` preconditions that
        direction with the tilted covariance of the log-mapped atoms.

    Returns
    -------
    DualSolution
    """
    P.require_valid()
    M = as_symmetric(M, "anchor")
    if M.shape[0] != P.dim:
        raise DimensionMismatch(f"anchor is {M.shape}, population dimension is {P.dim}")
    sqrt_and_inv_sqrt(M)  # strict positivity gate
    d = P.dim
    T = _transports(P, M)
    V = T - np.eye(d)
    E, L = _tangent_coordinates(M)
    Linv_T = np.linalg.inv(L.T)
    phi = np.einsum("aij,nij->na", E, V) @ L

    def to_matrix(beta):
        return np.einsum("a,aij->ij", Linv_T @ beta, E)

    res = maximize_dual(
        phi, P.weights, np.zeros(phi.shape[1]), tol=tol, max_iter=max_iter, cap=cap,
        method=method, beta_norm=lambda b: np.linalg.norm(to_matrix(b)),
    )
    A = to_matrix(res.beta)
    rate = res.value if res.status != "infeasible" else np.inf
    return DualSolution(
        anchor=M,
        A=A,
        rate=float(rate),
        sup_estimate=float(res.value),
        tilted_weights=res.weights,
        residual=res.residual,
        iterations=res.iterations,
        status=res.status,
        transports=T,
    )


def rate_function(P, M, **kwargs):
    """``I_P(M)``: the dual value, ``inf`` outside the effective domain.

    When the iteration budget runs out the best lower bound is returned with a
    :class:`RuntimeWarning`.
    """
    sol = solve_dual(P, M, **kwargs)
    if sol.status == "max_iter":
        warnings.warn(
            f"dual did not converge (residual {sol.residual:.3e}); returning lower bound",
            RuntimeWarning,
            stacklevel=2,
        )
    return sol.rate


def relative_entropy(q, w):
    """``H(q | w) = sum_i q_i log(q_i / w_i)`` with ``0 log 0 = 0``."""
    q = np.asarray(q, dtype=float)
    w = np.asarray(w, dtype=float)
    if q.shape != w.shape:
        raise DimensionMismatch(f"{q.shape} vs {w.shape}")
    pos = q > 0
    if np.any(w[pos] <= 0):
        raise SupportViolation("q charges an atom with zero base weight")
    return float(np.sum(q[pos] * np.log(q[pos] / w[pos])))


def tilt_interpolation_path(P, M0, M1, t, tol=DEFAULT_TOL, duals=None):
    """Barycenter of the mixture ``(1 - t) P^{M0} + t P^{M1}`` of the two optimal tilts.

    Raises :class:`InfeasibleAnchor` if either endpoint is outside the effective domain.
    ``duals`` may pass precomputed ``(DualSolution, DualSolution)`` for the endpoints.
    """
    s0, s1 = duals if duals is not None else (solve_dual(P, M0, tol=tol), solve_dual(P, M1, tol=tol))
    for s, name in ((s0, "M0"), (s1, "M1")):
        if not s.feasible:
            raise InfeasibleAnchor(f"{name} is not in the effective domain ({s.status})")
    if t == 0:
        return s0.anchor
    if t == 1:
        return s1.anchor
    q = (1.0 - t) * s0.tilted_weights + t * s1.tilted_weights
    return barycenter_fixed_point(P.reweighted(q / q.sum())).barycenter
