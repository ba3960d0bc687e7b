"""Optimizing the mixer for the best squeezed-cat fidelity.

Two heralded photons are mixed on a beam splitter; a click at the second
output heralds a state close to an odd squeezed cat. We search the mixer
transmissivity t together with the cat amplitude alpha and squeezing s' that
the output best resembles.

    python3 demos/optimize_cat.py
"""

import math

from squeezedcat import CircuitParams, fidelity, mean_photon_number, optimize_fidelity, run_circuit, sscs_wigner
from squeezedcat.sweep import FIXED_TARGET
from squeezedcat.states import TargetSpec

T1 = math.sqrt(1 - 0.001)

print(f"{'s':>5} {'t':>7} {'alpha':>6} {'s_prime':>8} {'F':>7} {'P':>10} {'<n>':>6}")
for s in (0.08, 0.16, 0.24):
    opt = optimize_fidelity(s, T1)
    n = mean_photon_number(opt.circuit.w_out)
    print(f"{s:5.2f} {opt.t:7.4f} {opt.alpha:6.3f} {opt.s_prime:8.3f} {opt.fidelity:7.4f} {opt.circuit.p:10.3e} {n:6.3f}")

# a fixed target is the alternative used when a specific cat size is wanted
t, sp, a = FIXED_TARGET
res = run_circuit(CircuitParams(s=0.2, t1=T1, t=t))
f = fidelity(res.w_out, sscs_wigner(TargetSpec(a, sp, "odd")))
print(f"\nfixed t={t}, target (alpha={a}, s'={sp}) at s=0.2: F={f:.4f}, <n>={mean_photon_number(res.w_out):.3f}")
