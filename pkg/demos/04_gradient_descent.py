"""Gradients of the rate function and the most likely way to be far from M*."""

import numpy as np

from bwldp import DiscretePopulation, barycenter, fd_rate_gradient, prgd, rate_gradient
from bwldp.synth import random_feasible_anchor, random_population

P = DiscretePopulation([[[1.0]], [[9.0]]], [0.5, 0.5])
print("dI/dM at [2.25]:", rate_gradient(P, [[2.25]])[0, 0], " -ln3/6 =", -np.log(3) / 6)

rng = np.random.default_rng(3)
Q = random_population(rng, 2, 5)
M = random_feasible_anchor(rng, Q)
print("analytic gradient:\n", rate_gradient(Q, M))
print("finite differences:\n", fd_rate_gradient(Q, M))

# cheapest way for the empirical barycenter to land at distance >= 0.4 from [4]
res = prgd(P, [[4.0]], 0.4, init=[[1.001]])
print("\nargmin sqrt:", np.sqrt(res.argmin[0, 0]), " I =", res.value, " status:", res.status)

res = prgd(Q, barycenter(Q), 0.3)
print("2x2 event Pi >= 0.3: I =", res.value, "after", res.iterations, "steps")
