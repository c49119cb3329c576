"""Fixed-point solver for Bures-Wasserstein barycenters of discrete populations."""

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import AnchorSingular
from .spd import EPS_PD, bw_distance, m_norm, sym, transport_map

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 500


@dataclass(frozen=True)
class BarycenterResult:
    barycenter: np.ndarray
    iterations: int
    residual: float
    converged: bool
    history: tuple


def mean_transport(M, P):
    """Weighted average ``sum_i w_i t_M^{S_i}`` of transport maps out of ``M``."""
    T = np.zeros_like(np.asarray(M, dtype=float))
    for w, S in zip(P.weights, P.atoms):
        if w > 0:
            T += w * transport_map(M, S)
    return sym(T)


def residual(M, P):
    """Barycentric residual ``sum_i w_i (t_M^{S_i} - I)``; zero exactly at the barycenter."""
    T = mean_transport(M, P)
    return T - np.eye(T.shape[0])


def barycenter_fixed_point(P, init=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Barycenter of ``P`` by the iteration ``M <- T M T`` with ``T`` the mean transport map.

    Parameters
    ----------
    P : DiscretePopulation
        Valid population (strictly positive atoms).
    init : ndarray, shape (d, d), optional
        Strictly positive starting point; defaults to the linear mean of the atoms.
    tol : float
        Stop once ``||residual(M, P)||_M <= tol``.
    max_iter : int

    Returns
    -------
    BarycenterResult
        If ``max_iter`` is reached the best iterate is returned with
        ``converged=False`` and a :class:`RuntimeWarning` is emitted.
    """
    P.require_valid()
    M = P.linear_mean() if init is None else sym(init)
    if np.linalg.eigvalsh(M)[0] <= EPS_PD:
        raise AnchorSingular("initial point is not strictly positive")
    d = M.shape[0]
    history = []
    best = (np.inf, M)
    for it in range(max_iter + 1):
        T = mean_transport(M, P)
        r = m_norm(M, T - np.eye(d))
        history.append(r)
        if r < best[0]:
            best = (r, M)
        if r <= tol:
            return BarycenterResult(M, it, r, True, tuple(history))
        if it == max_iter:
            break
        M = sym(T @ M @ T)
    warnings.warn(
        f"barycenter iteration did not reach tol={tol:g} in {max_iter} steps "
        f"(best residual {best[0]:.3e})",
        RuntimeWarning,
        stacklevel=2,
    )
    return BarycenterResult(best[1], max_iter, best[0], False, tuple(history))


def barycenter(P, **kwargs):
    """Shorthand returning only the barycenter matrix."""
    return barycenter_fixed_point(P, **kwargs).barycenter


def empirical_barycenter(P, indices, **kwargs):
    """Barycenter of the equal-weight empirical measure over ``P.atoms[indices]``."""
    indices = np.asarray(indices, dtype=np.int64).reshape(-1)
    if indices.size == 0:
        raise ValueError("empirical barycenter needs at least one draw")
    counts = np.bincount(indices, minlength=P.k)
    return barycenter_fixed_point(P.reweighted(counts / indices.size), **kwargs).barycenter


def frechet_functional(M, P):
    """``sum_i w_i Pi^2(M, S_i)``, the objective the barycenter minimizes."""
    return float(sum(w * bw_distance(M, S) ** 2 for w, S in zip(P.weights, P.atoms)))


def _batched_sqrt_pair(M):
    w, V = np.linalg.eigh(M)
    if np.any(w[..., 0] <= EPS_PD):
        raise AnchorSingular("batched iterate lost strict positivity")
    r = np.sqrt(w)
    Vt = np.swapaxes(V, -1, -2)
    return (V * r[..., None, :]) @ Vt, (V / r[..., None, :]) @ Vt


def _batched_psd_sqrt(C):
    w, V = np.linalg.eigh(C)
    r = np.sqrt(np.clip(w, 0.0, None))
    return (V * r[..., None, :]) @ np.swapaxes(V, -1, -2)


def barycenter_batch(atoms, weights, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Barycenters of many reweightings of one atom set, iterated in lockstep.

    Parameters
    ----------
    atoms : ndarray, shape (k, d, d)
    weights : ndarray, shape (B, k)
        Each row is a probability vector over the atoms.

    Returns
    -------
    M : ndarray, shape (B, d, d)
    converged : ndarray of bool, shape (B,)
    """
    atoms = np.asarray(atoms, dtype=float)
    W = np.atleast_2d(np.asarray(weights, dtype=float))
    B, k = W.shape
    d = atoms.shape[-1]
    M = np.einsum("bi,ijk->bjk", W, atoms)
    done = np.zeros(B, dtype=bool)
    eye = np.eye(d)
    for _ in range(max_iter + 1):
        active = np.flatnonzero(~done)
        if active.size == 0:
            break
        Ma = M[active]
        R, Rinv = _batched_sqrt_pair(Ma)
        C = R[:, None] @ atoms[None] @ R[:, None]
        C = 0.5 * (C + np.swapaxes(C, -1, -2))
        t = Rinv[:, None] @ _batched_psd_sqrt(C) @ Rinv[:, None]
        T = np.einsum("bi,bijk->bjk", W[active], t)
        T = 0.5 * (T + np.swapaxes(T, -1, -2))
        D = T - eye
        r = np.sqrt(np.clip(np.einsum("bij,bjk,bki->b", D, Ma, D), 0.0, None))
        ok = r <= tol
        done[active[ok]] = True
        upd = active[~ok]
        Tn = T[~ok]
        M[upd] = Tn @ M[upd] @ Tn
        M[upd] = 0.5 * (M[upd] + np.swapaxes(M[upd], -1, -2))
    return M, done
