"""Tail probabilities of the empirical barycenter against the predicted decay rate."""

import numpy as np

from bwldp import DiscretePopulation, rate_profile
from bwldp.montecarlo import exact_log_tail, rate_slope

P = DiscretePopulation([[[1.0]], [[9.0]]], [0.5, 0.5])
rate = rate_profile(P, radii=[0.4]).values[0]
print("predicted rate inf{I_P : Pi(M, M*) >= 0.4} =", rate)

for n in (40, 200, 2000):
    print(f"exact -log P / n at n={n}: {-exact_log_tail(P, n, 0.4) / n:.5f}")

# sizes with fewer than 20 hits are left out of the fit
fit = rate_slope(P, 0.4, [20, 40, 60, 80, 100], 50000, seed=7, reference=rate)
for row in fit.table:
    print(f"n={row['n']:4d} p_hat={row['p_hat']:.2e} [{row['wilson_lo']:.2e}, {row['wilson_hi']:.2e}]"
          f"{'' if row['used'] else '  (too few hits)'}")
print(f"fitted slope {fit.slope:.4f} ({fit.relative_error:.1%} from the rate),"
      f" without the sqrt(n) prefactor {fit.slope_uncorrected:.4f}")
