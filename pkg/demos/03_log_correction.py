"""The critical case gamma = alpha0 / alpha1 needs an extra (log n)^(-1/alpha).

With identity or ReLU activations and alpha0 = alpha1 = 1, the scale of the
n^-1 normalized output keeps growing like log n.  Dividing by log n gives a
width-independent scale up to slowly vanishing terms of order
log log n / log n, which is why the corrected scales sit above the limit.
"""

from stablenn import builtin, log_factor_check, shallow_limit

for name in ("identity", "relu"):
    spec = builtin(name)
    res = log_factor_check(spec, 1.0, [2**8, 2**10, 2**12], 4000, seed=3)
    print(f"{name}: predicted scale under (n log n)^-1: {shallow_limit(1, 1, 1, 1, spec).scale:.4f}")
    for n, plain, corrected in zip(res.n_grid, res.sigma_plain, res.sigma_log):
        print(f"  n = {n:5d}   n^-1 scale {plain:7.4f}   (n log n)^-1 scale {corrected:.4f}")
    for c in res.checks:
        print(f"  {c.name:<22} deviation {c.observed:.3f} (tolerance {c.tolerance})  {'PASS' if c.passed else 'FAIL'}")
