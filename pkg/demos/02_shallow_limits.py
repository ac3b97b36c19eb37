"""Shallow networks: predicted limit laws against finite-width ensembles.

A bounded activation keeps the index of the output weights.  A cubic
activation with alpha = 1.5 weights divides the index by three, so the
normalization becomes n^-2 and the limit is far heavier tailed.
"""

from stablenn import builtin, estimate_stability, hill_tail_index, ks_against_prediction, sample_shallow, shallow_limit

tanh = builtin("tanh")
pred = shallow_limit(1.7, 1.0, 1.7, 1.0, tanh)
print(f"tanh: limit S_{pred.stability}({pred.scale:.4f}), normalization n^(-1/{pred.scaling_exponent})")
v = sample_shallow(2000, 1.7, 1.0, 1.7, 1.0, tanh, seed=7, replications=5000)
a_hat, s_hat = estimate_stability(v)
print(f"  simulated at n = 2000: alpha_hat {a_hat:.3f}, sigma_hat {s_hat:.4f}, KS {ks_against_prediction(v, pred):.4f}")

cube = builtin("odd_power", 3)
pred = shallow_limit(1.5, 1.0, 1.5, 1.0, cube)
print(f"\nz^3: limit S_{pred.stability}({pred.scale:.4f}), normalization n^(-1/{pred.scaling_exponent})")
v = sample_shallow(16, 1.5, 1.0, 1.5, 1.0, cube, seed=8, replications=200_000, block_size=8192)
print(f"  Hill tail index of n = 16 outputs: {hill_tail_index(v):.3f} (prediction {pred.stability})")
