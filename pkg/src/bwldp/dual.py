"""Maximizer for finite exponential-family duals.

Solves

    sup_beta  <beta, target> - log sum_i w_i exp <beta, phi_i>

for feature vectors ``phi_i`` in R^p. The supremum is

* attained iff ``target`` is in the relative interior of the convex hull of
  the supported features (the optimal tilted weights then satisfy
  ``sum_i q_i phi_i = target``),
* finite but not attained when ``target`` is on the relative boundary; it then
  equals ``-log w(F)`` plus the attained supremum of the same problem restricted
  to the smallest face ``F`` containing ``target``,
* infinite when ``target`` is outside the hull.

Both the Bures-Wasserstein tilting dual and the univariate quantile dual
reduce to this form.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

DEFAULT_TOL = 1e-9
DEFAULT_CAP = 1e6
ARMIJO_SLOPE = 0.1
FLUSH = 1e-300
CLASSIFY_AFTER = 25


@dataclass(frozen=True)
class DualResult:
    beta: np.ndarray
    weights: np.ndarray
    value: float
    residual: float
    iterations: int
    status: str  # "converged", "boundary", "infeasible" or "max_iter"

    @property
    def converged(self):
        return self.status == "converged"


def _objective(beta, phi, logw, target):
    z = phi @ beta + logw
    zmax = z.max()
    if not np.isfinite(zmax):
        return -np.inf, None
    e = np.exp(z - zmax)
    total = e.sum()
    q = e / total
    q[q < FLUSH] = 0.0
    q /= q.sum()
    return float(beta @ target - zmax - np.log(total)), q


def hull_face(phi, target):
    """Locate ``target`` relative to the convex hull of the rows of ``phi``.

    Solves one linear program over unnormalized weights ``u >= 0`` with
    ``sum_i u_i (phi_i - target) = 0`` and indicators ``0 <= y_i <= min(u_i, 1)``,
    maximizing ``sum_i y_i``. Because ``u`` may be rescaled freely, every point
    that can carry positive mass in some convex representation of ``target`` gets
    ``y_i = 1``; these points span the smallest face containing ``target``.

    Returns
    -------
    status : {"interior", "boundary", "outside"}
    face : ndarray of bool
    """
    phi = np.asarray(phi, dtype=float)
    k, p = phi.shape
    X = (phi - target).T
    scale = max(1.0, float(np.abs(X).max(initial=0.0)))
    c = np.concatenate([np.zeros(k), -np.ones(k)])
    A_eq = np.hstack([X / scale, np.zeros((p, k))])
    A_ub = np.hstack([-np.eye(k), np.eye(k)])
    bounds = [(0, None)] * k + [(0, 1)] * k
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(k), A_eq=A_eq, b_eq=np.zeros(p),
                  bounds=bounds, method="highs")
    if res.status != 0:
        return "outside", np.zeros(k, dtype=bool)
    face = res.x[k:] > 0.5
    if not face.any():
        return "outside", face
    return ("interior" if face.all() else "boundary"), face


def _affine_reduction(phi, supp, target):
    base = phi[supp[0]]
    diffs = phi[supp] - base
    p = phi.shape[1]
    if diffs.size:
        U, s, _ = np.linalg.svd(diffs.T, full_matrices=False)
        scale = max(1.0, float(np.abs(phi[supp]).max()))
        U = U[:, s > 1e-12 * max(scale, s.max(initial=0.0))]
    else:
        U = np.zeros((p, 0))
    off = target - base
    perp = float(np.linalg.norm(off - U @ (U.T @ off)))
    return U, perp


def maximize_dual(phi, w, target, tol=DEFAULT_TOL, max_iter=None, cap=DEFAULT_CAP,
                  method="newton", beta_norm=None, classify_after=CLASSIFY_AFTER):
    """Maximize the log-partition dual.

    Parameters
    ----------
    phi : ndarray, shape (k, p)
    w : ndarray, shape (k,)
        Base probability weights; zero-weight atoms are ignored.
    target : ndarray, shape (p,)
    tol : float
        Convergence when ``||sum_i q_i phi_i - target|| <= tol``.
    max_iter : int, optional
        Defaults to 200 for ``"newton"`` and 20000 for ``"gradient"``.
    cap : float
        Declared infeasible once ``beta_norm(beta) > cap`` without convergence.
    method : {"newton", "gradient"}
        Damped Newton or plain gradient ascent; both use Armijo backtracking
        (halving, slope fraction 0.1).
    beta_norm : callable, optional
        Norm used for the divergence cap; Euclidean by default.
    classify_after : int
        Iterations without convergence after which the position of ``target``
        relative to the hull is settled by :func:`hull_face`.

    Returns
    -------
    DualResult
        ``status`` is ``"converged"`` (optimum attained), ``"boundary"`` (finite
        supremum, not attained; ``weights`` is the limiting tilt on the face),
        ``"infeasible"`` (``value`` is ``inf``) or ``"max_iter"``.
    """
    phi = np.asarray(phi, dtype=float)
    w = np.asarray(w, dtype=float)
    target = np.asarray(target, dtype=float)
    if max_iter is None:
        max_iter = 200 if method == "newton" else 20000
    k, p = phi.shape
    beta_norm = beta_norm or np.linalg.norm
    supp = np.flatnonzero(w > 0)
    logw = np.full(k, -np.inf)
    logw[supp] = np.log(w[supp])

    U, perp = _affine_reduction(phi, supp, target)
    if perp > tol:
        _, q = _objective(np.zeros(p), phi, logw, target)
        return DualResult(np.zeros(p), q, np.inf, perp, 0, "infeasible")

    psi = phi @ U  # coordinates within the affine hull
    tgt = target @ U

    def evaluate(b):
        val, q = _objective(b, psi, logw, tgt)
        return val, q, (None if q is None else tgt - q @ psi)

    def classify():
        status, face = hull_face(psi[supp], tgt)
        if status == "outside":
            return DualResult(U @ b, q, np.inf, float(np.linalg.norm(g)), it, "infeasible")
        if status == "boundary":
            idx = supp[face]
            wf = np.zeros(k)
            wf[idx] = w[idx] / w[idx].sum()
            sub = maximize_dual(phi, wf, target, tol=tol, max_iter=max_iter, cap=cap,
                                method=method, beta_norm=beta_norm, classify_after=max_iter + 1)
            value = sub.value - np.log(w[idx].sum())
            return DualResult(sub.beta, sub.weights, value, sub.residual, it + sub.iterations,
                              "boundary" if sub.converged else "max_iter")
        return None

    b = np.zeros(U.shape[1])
    val, q, g = evaluate(b)
    eta = 1.0
    status = "max_iter"
    classified = False
    it = 0
    polish = 0
    for it in range(max_iter + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol:
            status = "converged"
            # a couple of extra Newton steps sharpen the duality gap at no risk
            if method != "newton" or polish >= 2 or gnorm < 1e-14:
                break
            polish += 1
        elif beta_norm(U @ b) > cap:
            status = "infeasible"
            break
        elif it >= classify_after and not classified:
            classified = True
            verdict = classify()
            if verdict is not None:
                return verdict
        if it == max_iter:
            break
        if method == "newton":
            X = (psi[supp] - q[supp] @ psi[supp]) * np.sqrt(q[supp])[:, None]
            d = np.linalg.lstsq(X.T @ X, g, rcond=1e-14)[0]
            if not np.all(np.isfinite(d)) or g @ d <= 0:
                d = g
            step = 1.0
        else:
            d = g
            step = eta
        slope = float(g @ d)
        # below this predicted gain the objective cannot resolve progress, so
        # a step is judged by the residual instead
        tiny = slope <= 1e-13 * (1.0 + abs(val))
        accepted = False
        for _ in range(60):
            nb = b + step * d
            nval, nq, ng = evaluate(nb)
            if np.isfinite(nval) and (nval >= val + ARMIJO_SLOPE * step * slope
                                      or (tiny and np.linalg.norm(ng) < gnorm)):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if status == "converged":
                break
            if method == "newton" and d is not g:
                # fall back to a gradient step before giving up
                step, d, slope = eta, g, gnorm ** 2
                for _ in range(60):
                    nb = b + step * d
                    nval, nq, ng = evaluate(nb)
                    if np.isfinite(nval) and nval >= val + ARMIJO_SLOPE * step * slope:
                        accepted = True
                        break
                    step *= 0.5
            if not accepted:
                break
        if status == "converged" and np.linalg.norm(ng) > gnorm:
            break
        b, val, q, g = nb, nval, nq, ng
        if d is g:
            eta = min(2.0 * step, 1e12)
    if status != "converged" and not classified:
        verdict = classify()
        if verdict is not None:
            return verdict
    return DualResult(U @ b, q, val, float(np.linalg.norm(g)), it, status)
