"""Minimization of the rate function over ball complements ``{M : Pi(M, center) >= r}``."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .barycenter import barycenter
from .exceptions import (
    AnchorSingular,
    ExtrapolationOutOfRange,
    OutOfInjectivity,
)
from .gradient import rate_gradient, riemannian_gradient
from .population import pi_norm_stats
from .spd import Geodesic, as_symmetric, bw_distance, exp_map, log_map, m_norm, sym
from .tilting import solve_dual

DEGENERATE_TOL = 1e-12
MAX_HALVINGS = 20


def _fallback_direction(center):
    E = np.zeros_like(center)
    E[0, 0] = 1.0
    return E


def project_ball_complement(M, center, r):
    """Metric projection onto ``{X : Pi(X, center) >= r}``.

    Points already outside the open ball are returned unchanged. Otherwise the
    geodesic from ``center`` through ``M`` is followed (and extended past ``M`` if
    needed) to distance ``r``. When ``M`` coincides with ``center`` there is no
    direction; the first diagonal unit matrix is used instead.
    """
    M = as_symmetric(M, "point")
    center = as_symmetric(center, "center")
    if r <= 0:
        return M
    dist = bw_distance(M, center)
    if dist >= r:
        return M
    scale = 1.0 + np.sqrt(np.trace(center))
    if dist <= DEGENERATE_TOL * scale:
        V = _fallback_direction(center)
        return exp_map(center, (r / m_norm(center, V)) * V)
    return Geodesic(center, M).point(r / dist)


@dataclass(frozen=True)
class PRGDResult:
    argmin: np.ndarray
    value: float
    trace: tuple
    iterations: int
    eta: float
    status: str  # "converged", "max_iter", "stalled" or "infeasible_start"


def _feasible_value(P, M, tol):
    try:
        dual = solve_dual(P, M, tol=tol)
    except AnchorSingular:
        return None
    return dual if dual.feasible else None


def prgd(P, center, r, eta=None, iters=200, init=None, tol=1e-10, ftol=1e-12, dual_tol=1e-10):
    """Projected Riemannian gradient descent for ``inf { I_P(M) : Pi(M, center) >= r }``.

    Each step moves to ``(I - eta V) M (I - eta V)`` with ``V`` the Riemannian
    gradient and projects back onto the event. A step is rejected, and ``eta``
    halved, if the candidate leaves the effective domain or increases ``I_P``;
    after ``MAX_HALVINGS`` consecutive rejections the run stops.

    Parameters
    ----------
    P : DiscretePopulation
    center : ndarray, shape (d, d)
    r : float
        Radius of the excluded open ball; ``0`` means the whole space.
    eta : float, optional
        Initial step; defaults to ``0.1 / (1 + I_P(init))``.
    iters : int
    init : ndarray, optional
        Starting point, projected onto the event first. Defaults to the
        projection of ``center``.
    tol : float
        Stop once an accepted step moves less than ``tol`` in BW distance.
    ftol : float
        ... or lowers ``I_P`` by less than ``ftol * (1 + I_P)``.

    Returns
    -------
    PRGDResult
        ``value`` is ``inf`` with status ``"infeasible_start"`` when the projected
        start is outside the effective domain.
    """
    center = as_symmetric(center, "center")
    M = project_ball_complement(center if init is None else init, center, r)
    dual = _feasible_value(P, M, dual_tol)
    if dual is None:
        return PRGDResult(M, np.inf, (np.inf,), 0, np.nan if eta is None else eta, "infeasible_start")
    value = dual.rate
    if eta is None:
        eta = 0.1 / (1.0 + value)
    trace = [value]
    eye = np.eye(M.shape[0])
    status = "max_iter"
    it = 0
    for it in range(1, iters + 1):
        V = riemannian_gradient(M, rate_gradient(P, M, dual))
        if not np.any(V):
            status = "converged"
            break
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            B = eye - eta * V
            try:
                cand = project_ball_complement(sym(B @ M @ B), center, r)
                cdual = _feasible_value(P, cand, dual_tol)
            except (ExtrapolationOutOfRange, OutOfInjectivity, AnchorSingular):
                cdual = None
            if cdual is not None and cdual.rate <= value:
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            status = "stalled"
            break
        step = bw_distance(cand, M)
        gain = value - cdual.rate
        M, dual, value = cand, cdual, cdual.rate
        trace.append(value)
        if step <= tol or gain <= ftol * (1.0 + value):
            status = "converged"
            break
        eta *= 1.5
    return PRGDResult(M, float(value), tuple(trace), it, float(eta), status)


def sphere_starts(P, center, r):
    """Starting points on ``{Pi(., center) = r}``.

    Uses the fallback direction and, for every atom, the points at distance ``r``
    along the geodesic towards the atom and in the opposite tangent direction
    (when that stays inside the injectivity region).
    """
    center = as_symmetric(center, "center")
    starts = [project_ball_complement(center, center, r)]
    for S in P.atoms:
        L = log_map(center, S)
        nrm = m_norm(center, L)
        if nrm <= DEGENERATE_TOL:
            continue
        for sign in (1.0, -1.0):
            try:
                starts.append(exp_map(center, sign * (r / nrm) * L))
            except OutOfInjectivity:
                pass
    return starts


@dataclass(frozen=True)
class RateProfile:
    """Radial profile ``r -> inf { I_P(M) : Pi(M, center) >= r }``."""

    center: np.ndarray
    radii: np.ndarray
    values: np.ndarray
    argmins: np.ndarray
    raw_values: np.ndarray

    def rows(self):
        for r, v, M in zip(self.radii, self.values, self.argmins):
            yield float(r), float(v), M


def _profile_point(P, center, r, iters, eta):
    if r == 0:
        return 0.0, center
    best_val, best_M = np.inf, project_ball_complement(center, center, r)
    for start in sphere_starts(P, center, r):
        res = prgd(P, center, r, eta=eta, iters=iters, init=start)
        if res.value < best_val:
            best_val, best_M = res.value, res.argmin
    return best_val, best_M


def rate_profile(P, center=None, radii=(0.0,), iters=200, eta=None, workers=1):
    """Multi-start PRGD over a grid of radii.

    The minimizer found at a larger radius is also admissible for every smaller
    radius, so a right-to-left running minimum is applied to make the reported
    values nondecreasing; ``raw_values`` keeps the per-radius optimizer output.
    Radii where every start is infeasible record ``inf``.
    """
    P.require_valid()
    center = barycenter(P) if center is None else as_symmetric(center, "center")
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0) or np.any(radii < 0):
        raise ValueError("radii must be nonnegative and strictly increasing")
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            out = list(pool.map(lambda r: _profile_point(P, center, r, iters, eta), radii))
    else:
        out = [_profile_point(P, center, r, iters, eta) for r in radii]
    raw = np.array([v for v, _ in out])
    argmins = [M for _, M in out]
    values = raw.copy()
    for j in range(len(radii) - 2, -1, -1):
        if values[j + 1] < values[j]:
            values[j] = values[j + 1]
            argmins[j] = argmins[j + 1]
    return RateProfile(center, radii, values, np.array(argmins), raw)


def hoeffding_reference(P, center, radii):
    """Lower bound on the radial profile implied by sub-Gaussianity of ``Pi(S, 0)``.

    On ``{Pi(M, center) >= r}`` the triangle inequality gives
    ``Pi(M, 0) >= r - Pi(center, 0)``, and pointwise
    ``I_P(M) >= ((Pi(M, 0) - mu)^2 - mu^2) / (2 sigma^2)``. Hence the profile is at
    least ``(max(r - Pi(center, 0) - mu, 0)^2 - mu^2) / (2 sigma^2)``.
    """
    stats = pi_norm_stats(P)
    excess = np.maximum(np.asarray(radii, dtype=float) - np.sqrt(np.trace(center)) - stats.mu, 0.0)
    if stats.sigma_sq == 0:
        return np.where(excess > 0, np.inf, -np.inf)
    return (excess ** 2 - stats.mu ** 2) / (2.0 * stats.sigma_sq)


def hoeffding_report(P, profile, slack=1e-8):
    """Compare a profile against :func:`hoeffding_reference` radius by radius."""
    ref = hoeffding_reference(P, profile.center, profile.radii)
    stats = pi_norm_stats(P)
    ok = profile.values >= ref - slack
    return {
        "mu": stats.mu,
        "sigma_sq": stats.sigma_sq,
        "center_norm": float(np.sqrt(np.trace(profile.center))),
        "radii": profile.radii.tolist(),
        "profile": profile.values.tolist(),
        "reference": ref.tolist(),
        "bound_ok": ok.tolist(),
        "all_ok": bool(np.all(ok)),
    }
