"""The rate function through its tilting dual."""

import numpy as np

from bwldp import DiscretePopulation, barycenter, rate_function, relative_entropy, solve_dual
from bwldp.synth import random_feasible_anchor, random_population

P = DiscretePopulation([[[1.0]], [[9.0]]], [0.5, 0.5])
sol = solve_dual(P, [[2.25]])
print("I_P([2.25]) =", sol.rate, " A =", sol.A[0, 0], " tilted weights =", sol.tilted_weights)
print("closed form 0.75 ln 1.5 + 0.25 ln 0.5 =", 0.75 * np.log(1.5) + 0.25 * np.log(0.5))
print("outside the hull, I_P([16]) =", rate_function(P, [[16.0]]))
print("on the hull boundary, I_P([1]) =", rate_function(P, [[1.0]]), "= ln 2")

# the dual optimum is the relative entropy of the tilt, whose barycenter is the anchor
rng = np.random.default_rng(2)
P = random_population(rng, 3, 5)
M = random_feasible_anchor(rng, P)
sol = solve_dual(P, M)
print("\n3x3 anchor: I_P =", sol.rate)
print("H(tilt | P) =", relative_entropy(sol.tilted_weights, P.weights))
Q = barycenter(P.reweighted(sol.tilted_weights), tol=1e-12)
print("max |bary(tilt) - M| =", np.abs(Q - M).max())
