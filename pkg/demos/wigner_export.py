"""Exporting a Wigner function on a grid for plotting.

Writes beta_r, beta_i, W rows. The odd cat has W(0) = -2/pi, the signature of
its interference fringes.

    python3 demos/wigner_export.py [out.csv]
"""

import sys

import numpy as np

from squeezedcat import GridSpec, TargetSpec, export_wigner_grid, sscs_wigner
from squeezedcat.sweep import wigner_csv

table = export_wigner_grid(sscs_wigner(TargetSpec(1.7, 0.33, "odd")), GridSpec(-4, 4, -4, 4, 81))
print(f"min W = {table[:, 2].min():.4f} (-2/pi = {-2 / np.pi:.4f}), max W = {table[:, 2].max():.4f}")
print(f"Riemann sum of W = {table[:, 2].sum() * 0.1 ** 2:.6f}")
if len(sys.argv) > 1:
    with open(sys.argv[1], "w") as fh:
        fh.write(wigner_csv(table))
    print(f"wrote {sys.argv[1]}")
