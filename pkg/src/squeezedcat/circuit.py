"""
Exact phase-space propagation of the two-stage scheme.

Stage one heralds mode ``a`` by a click on the idler ``d`` of a two-mode
squeezer. Stage two squeezes ``a`` again together with a fresh vacuum ``c``,
taps ``a`` into ``b`` on the beam splitter BS_ab (transmissivity ``t1``), mixes
``b`` and ``c`` on BS_bc (transmissivity ``t``) and keeps the output when both
``b`` and ``c`` click. Intermediate objects stay unnormalized so the
probabilities come out as total integrals.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .phasespace import (
    AffineMap,
    GaussianMixture,
    apply_affine,
    beam_splitter,
    embed,
    is_conjugation_closed,
    total_integral,
    two_mode_squeezer,
)
from .states import apply_povm, click_povm

# mode order of the three-mode object
MODE_A, MODE_B, MODE_C = 0, 1, 2
UNDERFLOW = 1e-300


class Underflow(ArithmeticError):
    """A success probability fell below the representable range."""


@dataclass(frozen=True)
class CircuitParams:
    s: float
    t1: float
    t: float
    eta_d: float = 1.0
    eta_b: float = 1.0
    eta_c: float = 1.0

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"squeezing s must be positive, got {self.s}")
        for name in ("t1", "t"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        for name in ("eta_d", "eta_b", "eta_c"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")

    @classmethod
    def from_reflectance(cls, s: float, r1sq: float, t: float, eta: float = 1.0, **etas) -> "CircuitParams":
        """Build from the tap reflectance r1^2 with one efficiency for every detector."""
        kw = {"eta_d": eta, "eta_b": eta, "eta_c": eta}
        kw.update(etas)
        return cls(s=s, t1=float(np.sqrt(1.0 - r1sq)), t=t, **kw)

    @property
    def r1(self) -> float:
        return float(np.sqrt(1.0 - self.t1**2))

    @property
    def r(self) -> float:
        return float(np.sqrt(1.0 - self.t**2))

    @property
    def r1sq(self) -> float:
        return 1.0 - self.t1**2


@dataclass(frozen=True)
class CircuitResult:
    w_out: GaussianMixture
    p_d: float
    p_bc: float

    @property
    def p(self) -> float:
        return self.p_d * self.p_bc

    @property
    def amplification(self) -> float:
        """Sum of |weights| of the normalized output.

        The output is a signed sum whose terms nearly cancel when P_bc is
        small; round-off in any derived quantity is roughly machine epsilon
        times this number.
        """
        return float(np.abs(self.w_out.weights).sum())

    @property
    def precision(self) -> float:
        return float(np.finfo(float).eps * self.amplification)


def _real_probability(value: complex, what: str) -> float:
    if abs(value.imag) > 1e-9 * max(abs(value.real), 1e-300):
        raise ArithmeticError(f"{what} has a spurious imaginary part {value.imag:.3e}")
    p = value.real
    if p < UNDERFLOW:
        raise Underflow(f"{what} = {p:.3e} is below the resolvable range; cancellation in the click element dominates")
    return p


def herald_single_photon(s: float, eta_d: float = 1.0) -> tuple[GaussianMixture, float]:
    """Heralded state of mode a and the click probability on the idler.

    At unit efficiency the state is (W_{cosh 2s V0} - sech^2 s W_V0) / P_d with
    P_d = tanh^2 s.
    """
    pair = apply_affine(GaussianMixture.vacuum(2), AffineMap(two_mode_squeezer(s)))
    cond = apply_povm(pair, click_povm(eta_d), 1)
    p_d = _real_probability(total_integral(cond), "P_d")
    return cond.scale(1.0 / p_d), p_d


@lru_cache(maxsize=256)
def _tapped(s: float, t1: float, eta_d: float) -> tuple[GaussianMixture, float]:
    # everything upstream of the mixer; the optimizer revisits it for every t
    w_a, p_d = herald_single_photon(s, eta_d)
    vac = GaussianMixture.vacuum(1)
    w_abc = w_a.tensor(vac).tensor(vac)
    w_abc = apply_affine(w_abc, AffineMap(embed(two_mode_squeezer(s), [MODE_A, MODE_C], 3)))
    w_abc = apply_affine(w_abc, AffineMap(embed(beam_splitter(t1), [MODE_A, MODE_B], 3)))
    return w_abc, p_d


def prepare_modes(params: CircuitParams) -> tuple[GaussianMixture, float]:
    """Normalized three-mode (a, b, c) object just before the b/c detectors."""
    w_abc, p_d = _tapped(float(params.s), float(params.t1), float(params.eta_d))
    w_abc = apply_affine(w_abc, AffineMap(embed(beam_splitter(params.t), [MODE_B, MODE_C], 3)))
    return w_abc, p_d


def run_circuit(params: CircuitParams, order: Sequence[str] = ("b", "c")) -> CircuitResult:
    """Full scheme; ``order`` picks which detector is conditioned on first."""
    w_abc, p_d = prepare_modes(params)
    if sorted(order) != ["b", "c"]:
        raise ValueError("order must be a permutation of ('b', 'c')")
    effs = {"b": params.eta_b, "c": params.eta_c}
    if tuple(order) == ("b", "c"):
        cond = apply_povm(w_abc, click_povm(effs["b"]), MODE_B)  # modes (a, c)
        cond = apply_povm(cond, click_povm(effs["c"]), 1)
    else:
        cond = apply_povm(w_abc, click_povm(effs["c"]), MODE_C)  # modes (a, b)
        cond = apply_povm(cond, click_povm(effs["b"]), 1)
    p_bc = _real_probability(total_integral(cond), "P_bc")
    w_out = cond.scale(1.0 / p_bc)
    # every weight is real here; drop the round-off imaginary dust
    w_out = GaussianMixture(w_out.weights.real, w_out.centers, w_out.covs)
    if not is_conjugation_closed(w_out):
        raise ArithmeticError("output mixture lost conjugation symmetry")
    return CircuitResult(w_out=w_out, p_d=p_d, p_bc=p_bc)
