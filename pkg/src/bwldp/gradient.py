"""Derivatives of transport maps and the gradient of the rate function.

At a feasible anchor the dual optimizer ``A_M`` is stationary, so only the
explicit dependence of the log-partition on ``M`` contributes. Writing
``q`` for the optimal tilted weights,

    dI_P(M)[H] = -tr(A_M H sum_i q_i (t_i - I)) - tr(A_M M sum_i q_i Dt_i[H]),

and the first term vanishes because the tilted barycenter is ``M``.
"""

import numpy as np

from .exceptions import AnchorSingular, DimensionMismatch, InfeasibleAnchor
from .spd import EPS_PD, as_symmetric, sqrt_and_inv_sqrt, sym, sym_basis, sym_sqrt
from .tilting import rate_function, solve_dual


def sqrt_frechet(S, D, eps=EPS_PD):
    """Frechet derivative of the matrix square root at ``S`` in direction ``D``.

    Solves ``X S^{1/2} + S^{1/2} X = D`` in the eigenbasis of ``S``, where
    ``X_ij = D_ij / (sqrt(l_i) + sqrt(l_j))``.
    """
    S = as_symmetric(S, "S")
    D = as_symmetric(D, "direction")
    if D.shape != S.shape:
        raise DimensionMismatch(f"shapes {S.shape} and {D.shape} differ")
    lam, V = np.linalg.eigh(S)
    if lam[0] <= eps:
        raise AnchorSingular(f"square-root derivative undefined at eigenvalue {lam[0]:.3e}")
    r = np.sqrt(lam)
    Dt = V.T @ D @ V
    return sym(V @ (Dt / (r[:, None] + r[None, :])) @ V.T)


def transport_directional(M, S, H):
    """Directional derivative of ``M -> t_M^S`` at ``M`` along ``H``.

    With ``R = M^{1/2}``, ``C = R S R`` and ``t = R^{-1} C^{1/2} R^{-1}`` the
    chain rule gives

        dR = sqrt'(M)[H],  dR^{-1} = -R^{-1} dR R^{-1},
        dC = dR S R + R S dR,  dK = sqrt'(C)[dC],
        dt = dR^{-1} K R^{-1} + R^{-1} dK R^{-1} + R^{-1} K dR^{-1}.
    """
    R, Rinv = sqrt_and_inv_sqrt(M)
    S = as_symmetric(S, "target")
    H = as_symmetric(H, "direction")
    if not (S.shape == H.shape == R.shape):
        raise DimensionMismatch("anchor, target and direction shapes differ")
    C = sym(R @ S @ R)
    K = sym_sqrt(C)
    dR = sqrt_frechet(M, H)
    dRinv = -Rinv @ dR @ Rinv
    dC = sym(dR @ S @ R + R @ S @ dR)
    dK = sqrt_frechet(C, dC)
    return sym(dRinv @ K @ Rinv + Rinv @ dK @ Rinv + Rinv @ K @ dRinv)


def _sqrt_frechet_eig(r, V, D):
    """Batched square-root derivative given ``sqrt`` eigenvalues ``r`` and eigenvectors ``V``."""
    Dt = V.T @ D @ V
    X = V @ (Dt / (r[:, None] + r[None, :])) @ V.T
    return 0.5 * (X + np.swapaxes(X, -1, -2))


def transport_jacobian(M, S, directions):
    """:func:`transport_directional` for a stack of directions, sharing the factorizations."""
    lam, V = np.linalg.eigh(as_symmetric(M, "anchor"))
    if lam[0] <= EPS_PD:
        raise AnchorSingular(f"anchor has minimum eigenvalue {lam[0]:.3e}")
    rm = np.sqrt(lam)
    R = (V * rm) @ V.T
    Rinv = (V / rm) @ V.T
    S = as_symmetric(S, "target")
    C = sym(R @ S @ R)
    mu, W = np.linalg.eigh(C)
    if mu[0] <= EPS_PD:
        raise AnchorSingular("target must be strictly positive for the transport derivative")
    rc = np.sqrt(mu)
    K = (W * rc) @ W.T
    dR = _sqrt_frechet_eig(rm, V, directions)
    dRinv = -Rinv @ dR @ Rinv
    dC = dR @ S @ R
    dC = dC + np.swapaxes(dC, -1, -2)
    dK = _sqrt_frechet_eig(rc, W, dC)
    out = dRinv @ K @ Rinv + Rinv @ dK @ Rinv + Rinv @ K @ dRinv
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def rate_gradient(P, M, dual=None):
    """Euclidean gradient ``G`` of ``I_P`` at a feasible anchor.

    ``G`` is symmetric and satisfies ``tr(G H) = dI_P(M)[H]`` for symmetric ``H``.

    Parameters
    ----------
    P : DiscretePopulation
    M : ndarray, shape (d, d)
    dual : DualSolution, optional
        Solution of the dual at ``M``; solved here when omitted.

    Raises
    ------
    InfeasibleAnchor
        If the dual at ``M`` did not converge to an attained optimum.
    """
    M = as_symmetric(M, "anchor")
    if dual is None:
        dual = solve_dual(P, M)
    if not dual.feasible:
        raise InfeasibleAnchor(f"no gradient at an anchor with dual status {dual.status!r}")
    if dual.anchor.shape != M.shape or not np.allclose(dual.anchor, M, rtol=0, atol=1e-14):
        raise ValueError("dual solution is anchored at a different matrix")
    A, q = dual.A, dual.tilted_weights
    if not np.any(A):
        return np.zeros_like(M)
    E = sym_basis(M.shape[0])
    Dt = sum(qi * transport_jacobian(M, S, E) for qi, S in zip(q, P.atoms) if qi > 0)
    coef = -np.einsum("ij,aji->a", A @ M, Dt)
    return sym(np.einsum("a,aij->ij", coef, E))


def riemannian_gradient(M, G):
    """Gradient in the Bures-Wasserstein metric at ``M`` for the Euclidean gradient ``G``.

    Along ``eps -> e_M(eps V)`` the first variation of a function is
    ``tr(G (V M + M V)) = 2 <V, G>_M``, so the steepest-descent field is ``2 G``.
    """
    as_symmetric(M, "anchor")
    return 2.0 * as_symmetric(G, "gradient")


def fd_rate_gradient(P, M, h=None, **kwargs):
    """Central finite-difference gradient of :func:`rate_function`.

    The step defaults to ``1e-5 * (1 + ||M||_2)``; the dual is re-solved at every
    perturbed anchor.
    """
    M = as_symmetric(M, "anchor")
    if h is None:
        h = 1e-5 * (1.0 + np.linalg.norm(M, 2))
    E = sym_basis(M.shape[0])
    coef = np.array([
        (rate_function(P, M + h * H, **kwargs) - rate_function(P, M - h * H, **kwargs)) / (2 * h)
        for H in E
    ])
    return sym(np.einsum("a,aij->ij", coef, E))
