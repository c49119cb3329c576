"""Distributions on the line, where quantile functions flatten Wasserstein space."""

from bwldp import DiscretePopulation, rate_function
from bwldp.univariate import UnivariatePopulation, gaussian_quantile, uv_barycenter, uv_rate_function, w2_distance

m = 2048
U = UnivariatePopulation([gaussian_quantile(1.0, m), gaussian_quantile(3.0, m)], [0.5, 0.5])
print("W2(N(0,1), N(0,9)) =", w2_distance(*U.atoms))
print("barycenter is N(0, 4):", w2_distance(uv_barycenter(U), gaussian_quantile(2.0, m)))

# centered Gaussians on the line are 1x1 covariance matrices, and both rates agree
B = DiscretePopulation([[[1.0]], [[9.0]]], [0.5, 0.5])
for s in (1.2, 1.5, 2.5):
    print(f"scale {s}: quantile rate {uv_rate_function(U, gaussian_quantile(s, m)):.6f}"
          f"  matrix rate {rate_function(B, [[s * s]]):.6f}")
