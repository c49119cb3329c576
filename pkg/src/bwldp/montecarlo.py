"""Monte Carlo checks of exponential tail decay for empirical barycenters."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom, binomtest

from .barycenter import barycenter, barycenter_batch
from .population import replicate_seed, sample
from .spd import bw_distance

BOUNDARY_RTOL = 1e-9
MIN_HITS = 20


@dataclass(frozen=True)
class Simulation:
    n: int
    replicates: int
    seed: int
    distances: np.ndarray
    failures: int


def _replicate_counts(P, n, seed, replicates):
    counts = np.empty((len(replicates), P.k), dtype=np.int64)
    for row, r in enumerate(replicates):
        counts[row] = np.bincount(sample(P, n, replicate_seed(seed, r)), minlength=P.k)
    return counts


def simulate_distances(P, n, replicates, seed, center=None, workers=1, chunk=20000):
    """Distances ``Pi(M_n, M*)`` of empirical barycenters over independent replicates.

    Replicate ``r`` draws its ``n`` atoms from a generator seeded with
    ``replicate_seed(seed, r)``, so every replicate is reproducible on its own.
    Identical count vectors share one barycenter solve. Replicates whose solver
    does not converge are reported in ``failures`` and carry ``nan``.
    """
    P.require_valid()
    if n < 1:
        raise ValueError("sample size must be positive")
    center = barycenter(P) if center is None else np.asarray(center, dtype=float)
    blocks = [range(s, min(s + chunk, replicates)) for s in range(0, replicates, chunk)]
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda b: _replicate_counts(P, n, seed, b), blocks))
    else:
        parts = [_replicate_counts(P, n, seed, b) for b in blocks]
    counts = np.concatenate(parts) if parts else np.zeros((0, P.k), dtype=np.int64)
    uniq, inverse = np.unique(counts, axis=0, return_inverse=True)
    bary, ok = barycenter_batch(P.atoms, uniq / n)
    dist = np.array([bw_distance(M, center) if good else np.nan for M, good in zip(bary, ok)])
    inverse = inverse.reshape(-1)
    return Simulation(int(n), int(replicates), int(seed), dist[inverse], int(np.sum(~ok[inverse])))


@dataclass(frozen=True)
class TailEstimate:
    hits: int
    total: int
    p_hat: float
    wilson_lo: float
    wilson_hi: float


def tail_estimate(distances, r, confidence=0.95):
    """Fraction of distances ``>= r`` with a Wilson score interval.

    Distances within ``1e-9 * max(1, r)`` below ``r`` count as hits so that
    lattice points lying exactly on the boundary are not lost to roundoff.
    ``nan`` entries (solver failures) are excluded.
    """
    d = np.asarray(distances, dtype=float)
    d = d[~np.isnan(d)]
    if d.size == 0:
        raise ValueError("no distances to estimate from")
    hits = int(np.sum(d >= r - BOUNDARY_RTOL * max(1.0, r)))
    ci = binomtest(hits, d.size).proportion_ci(confidence_level=confidence, method="wilson")
    return TailEstimate(hits, int(d.size), hits / d.size, float(ci.low), float(ci.high))


@dataclass(frozen=True)
class SlopeFit:
    status: str  # "ok", "degenerate" or "insufficient"
    slope: float
    intercept: float
    table: list = field(default_factory=list)
    reference: float = float("nan")
    prefactor_power: float = 0.0
    slope_uncorrected: float = float("nan")

    @property
    def relative_error(self):
        return abs(self.slope - self.reference) / self.reference


def rate_slope(P, r, n_grid, replicates, seed, min_hits=MIN_HITS, reference=None, workers=1,
               prefactor_power=0.5):
    """Least-squares slope of ``-log P(Pi(M_n, M*) >= r)`` against ``n``.

    Tails of sample means decay like ``c n^{-1/2} exp(-n I)``. The fit regresses
    ``-log p_hat - prefactor_power * log n`` on ``n`` with an intercept, so both
    the constant and the polynomial factor are absorbed; ``prefactor_power=0``
    gives the plain fit, whose slope is also returned as ``slope_uncorrected``.
    Sample sizes whose tail estimate has fewer than ``min_hits`` hits are
    flagged and excluded. When every tail is zero (e.g. a point mass) the
    result is marked ``"degenerate"``.
    """
    n_grid = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be increasing")
    center = barycenter(P)
    table = []
    for n in n_grid:
        sim = simulate_distances(P, n, replicates, seed, center=center, workers=workers)
        est = tail_estimate(sim.distances, r)
        table.append({
            "n": n,
            "replicates": replicates,
            "hits": est.hits,
            "p_hat": est.p_hat,
            "wilson_lo": est.wilson_lo,
            "wilson_hi": est.wilson_hi,
            "minus_log_p_over_n": -np.log(est.p_hat) / n if est.hits else np.inf,
            "failures": sim.failures,
            "used": est.hits >= min_hits,
        })
    ref = float("nan") if reference is None else float(reference)
    if all(row["hits"] == 0 for row in table):
        return SlopeFit("degenerate", float("nan"), float("nan"), table, ref, prefactor_power)
    used = [row for row in table if row["used"]]
    if len(used) < 2:
        return SlopeFit("insufficient", float("nan"), float("nan"), table, ref, prefactor_power)
    ns = np.array([row["n"] for row in used], dtype=float)
    y = -np.log([row["p_hat"] for row in used])
    plain = np.polyfit(ns, y, 1)[0]
    slope, intercept = np.polyfit(ns, y - prefactor_power * np.log(ns), 1)
    return SlopeFit("ok", float(slope), float(intercept), table, ref, prefactor_power, float(plain))


def binomial_log_tail(p, n, frac):
    """``log P(|K/n - p| >= frac)`` for ``K ~ Binomial(n, p)``, summed in log space."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    k = np.arange(n + 1)
    hit = np.abs(k - n * p) >= n * frac - BOUNDARY_RTOL * max(1.0, n * frac)
    if not hit.any():
        return -np.inf
    return float(logsumexp(binom.logpmf(k[hit], n, p)))


def binomial_oracle(p, n, frac):
    """Exact ``P(|K/n - p| >= frac)`` for ``K ~ Binomial(n, p)``."""
    return float(np.exp(binomial_log_tail(p, n, frac)))


def two_point_scalar(P):
    """``(a, b, p)`` if ``P`` is ``(1-p) delta_[a^2] + p delta_[b^2]`` with ``a != b``, else None."""
    supp = P.weights > 0
    if P.dim != 1 or supp.sum() != 2:
        return None
    roots = np.sqrt(P.atoms[supp, 0, 0])
    w = P.weights[supp]
    if roots[0] == roots[1]:
        return None
    return float(roots[0]), float(roots[1]), float(w[1])


def exact_log_tail(P, n, r):
    """Exact ``log P(Pi(M_n, M*) >= r)`` for a scalar two-atom population.

    The root of a scalar empirical barycenter is the sample mean of the atom
    roots, so with ``K`` draws of the second atom
    ``Pi(M_n, M*) = |b - a| * |K/n - p|``.
    """
    pattern = two_point_scalar(P)
    if pattern is None:
        raise ValueError("population is not a scalar two-atom population")
    a, b, p = pattern
    return binomial_log_tail(p, n, r / abs(b - a))
