"""Heralding a single photon from a two-mode squeezer.

A weak two-mode squeezer emits photon pairs; an on-off click on the idler
projects the signal onto (mostly) one photon. The heralded state is a mixture
of two Gaussians, and its click probability is tanh^2 s.

    python3 demos/heralding.py
"""

import math

import numpy as np

from squeezedcat import fock_density_matrix, herald_single_photon

print(f"{'s':>6} {'P_herald':>12} {'tanh^2 s':>12} {'W(0)':>9} {'<1|rho|1>':>10} {'<2|rho|2>':>10}")
for s in (0.02, 0.05, 0.1, 0.2, 0.4):
    w, p = herald_single_photon(s)
    rho = fock_density_matrix(w, 12).entries.real
    print(f"{s:6.2f} {p:12.4e} {math.tanh(s) ** 2:12.4e} {w([0.0, 0.0]).real:9.4f} {rho[1, 1]:10.5f} {rho[2, 2]:10.5f}")

# the Wigner function of |1> is -2/pi at the origin; weak squeezing approaches it
print(f"\nsingle photon W(0) = {-2 / np.pi:.4f}")
print("stronger squeezing buys rate at the cost of multi-photon admixture: the detector")
print("only reports 'at least one photon'.")
