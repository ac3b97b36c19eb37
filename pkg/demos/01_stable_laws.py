"""Symmetric stable laws: draws, distribution function and power tails.

Run with ``python3 demos/01_stable_laws.py``.
"""

import numpy as np

from stablenn import StableParams, c_alpha, sample, survival_asymptote, symmetric_cdf

# A Cauchy law is S_1(1); its distribution function has a closed form we can
# compare against the numerical inversion.
for x in (0.5, 1.0, 3.0):
    exact = 0.5 + np.arctan(x) / np.pi
    print(f"F_1({x}) numeric {symmetric_cdf(1.0, 1.0, x):.12f}  closed form {exact:.12f}")

# For alpha < 2 the survival function decays like (1/2) C_alpha sigma^alpha z^-alpha.
params = StableParams(1.5, sigma=2.0)
draws = sample(params, 2_000_000, seed=1)
asym = survival_asymptote(params)
print(f"\nC_1.5 = {c_alpha(1.5):.6f}; predicted tail constant {asym.constant:.4f}")
for q in (0.99, 0.999):
    z = np.quantile(draws, q)
    observed = np.mean(draws > z) * z**asym.index
    print(f"  quantile {q}: z = {z:8.2f}, P(X > z) z^1.5 = {observed:.4f}")
