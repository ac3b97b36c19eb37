"""Sample paths of a random network on a 2D input grid, written as CSV.

Every grid point sees the same weights, so each file is one draw of the
random function.  Heavier tails (smaller alpha) give surfaces dominated by a
few large units.  Plot the CSV files with any external tool.
"""

import itertools
import sys

import numpy as np

from stablenn import NetworkConfig, builtin, sample_surface

out_dir = sys.argv[1] if len(sys.argv) > 1 else "."
axis = np.linspace(-3, 3, 31)
grid = np.array(list(itertools.product(axis, axis)))
for alpha in (2.0, 1.5, 1.0):
    net = NetworkConfig(alpha, 1.0, 1.0, (0.0, 0.0), 1, builtin("tanh"))
    values = sample_surface(net, grid, 500, seed=0)
    path = f"{out_dir}/surface_alpha{alpha}.csv"
    np.savetxt(path, np.column_stack([grid, values]), delimiter=",", header="x1,x2,value", comments="")
    print(f"alpha = {alpha}: range [{values.min():8.3f}, {values.max():8.3f}], written to {path}")
