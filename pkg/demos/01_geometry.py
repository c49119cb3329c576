"""Distances, transport maps and geodesics between covariance matrices."""

import numpy as np

from bwldp import Geodesic, bw_distance, exp_map, log_map, m_norm, transport_map
from bwldp.synth import random_spd

# scalars: the distance is the gap between square roots
print("Pi([1], [9]) =", bw_distance([[1.0]], [[9.0]]))

rng = np.random.default_rng(0)
M, S = random_spd(rng, 3), random_spd(rng, 3)

# the transport map pushes M onto S, and the tangent vector log_M(S) has M-norm Pi(M, S)
T = transport_map(M, S)
print("T M T == S:", np.allclose(T @ M @ T, S))
print("Pi(M, S) =", bw_distance(M, S), " |log_M S|_M =", m_norm(M, log_map(M, S)))
print("exp(log) round trip error:", bw_distance(exp_map(M, log_map(M, S)), S))

# distance grows linearly along the geodesic
g = Geodesic(M, S)
for t in (0.25, 0.5, 0.75):
    print(f"t={t}: Pi(M, g(t)) / Pi(M, S) = {bw_distance(M, g(t)) / g.length:.12f}")
