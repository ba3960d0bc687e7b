"""Trading fidelity for cat size with inefficient detectors.

With 10% efficient detectors the output is far from pure, but by tuning the
mixer the mean photon number can still be pushed up while the best-target
fidelity stays above a floor.

    python3 demos/size_vs_fidelity.py
"""

import math

from squeezedcat import max_size_at_fidelity

for r1sq in (0.001, 0.01):
    res = max_size_at_fidelity(0.2, math.sqrt(1 - r1sq), 0.59, etas=(0.1, 0.1, 0.1))
    print(f"r1^2={r1sq}: <n>={res.mean_n:.3f} at t={res.t:.3f} with F={res.fidelity:.3f} (alpha={res.alpha:.2f}, s'={res.s_prime:.2f})")
