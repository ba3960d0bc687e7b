"""Cross-checking the phase-space model against a truncated number basis.

The number-basis simulator builds the same circuit from matrix exponentials
and projectors. Both should agree on probabilities and the output density
matrix, with or without detector loss.

    python3 demos/fock_crosscheck.py
"""

import numpy as np

from squeezedcat import CircuitParams, fock_density_matrix, run_circuit, run_circuit_fock

for eta in (1.0, 0.5):
    p = CircuitParams.from_reflectance(0.1, 0.01, 0.3, eta)
    g, f = run_circuit(p), run_circuit_fock(p, dim=16)
    rho_g = fock_density_matrix(g.w_out, 16).entries
    err = np.abs(rho_g - f.rho.entries).max()
    print(f"eta={eta}: P_d {g.p_d:.6e} vs {f.p_d:.6e}, P_bc {g.p_bc:.6e} vs {f.p_bc:.6e}, max |d rho| {err:.1e}")

rho = np.abs(fock_density_matrix(run_circuit(CircuitParams.from_reflectance(0.16, 0.001, 0.1)).w_out, 8).entries)
np.set_printoptions(precision=3, suppress=True, linewidth=120)
print("\n|rho| of the s=0.16 output (odd photon numbers dominate; the |2> population")
print("comes from two-photon heralds that an on-off detector cannot reject):")
print(rho)
