import numpy as np
import pytest

from bwldp.population import DiscretePopulation

# I for 1/2 delta_[1] + 1/2 delta_[9] at sqrt(M) = 1.5 (tilt (3/4, 1/4))
RATE_AT_225 = 0.75 * np.log(1.5) + 0.25 * np.log(0.5)
# inf over {Pi(M, [4]) >= 0.4}: sqrt(M) = 1.6 or 2.4, tilt (0.7, 0.3)
RATE_AT_04 = 0.7 * np.log(1.4) + 0.3 * np.log(0.6)


@pytest.fixture
def two_point():
    return DiscretePopulation([[[1.0]], [[9.0]]], [0.5, 0.5])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def legendre_1d(values, weights, s):
    """Cramer transform sup_l [l s - log sum_i w_i exp(l v_i)] of a finite law by bisection.

    Independent of the package solvers: the maximizer solves mean_l = s, where
    mean_l is the tilted mean, increasing in l.
    """
    from scipy.optimize import brentq
    from scipy.special import logsumexp

    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if s < v.min() or s > v.max():
        return np.inf

    def tilted_mean(lam):
        z = lam * v + np.log(w)
        q = np.exp(z - logsumexp(z))
        return q @ v - s

    hi = 1.0
    while tilted_mean(hi) < 0:
        hi *= 2
    lo = -1.0
    while tilted_mean(lo) > 0:
        lo *= 2
    lam = brentq(tilted_mean, lo, hi, xtol=1e-14, rtol=1e-15)
    return lam * s - logsumexp(lam * v, b=w)
