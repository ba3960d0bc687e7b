"""
States and detector elements used by the scheme, as Gaussian mixtures and
(where an independent check needs them) as truncated number-basis vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.special import gammaln

from .fock import FockVector, coherent_amplitudes, squeeze_vector
from .phasespace import (
    VACUUM_COV,
    AffineMap,
    GaussianMixture,
    apply_affine,
    integrate_product,
    marginalize,
    single_mode_squeezer,
)

DB_PER_NEPER = 20.0 / np.log(10.0)


def squeezing_to_db(s: float) -> float:
    return DB_PER_NEPER * s


def db_to_squeezing(db: float) -> float:
    return db / DB_PER_NEPER


@dataclass(frozen=True)
class TargetSpec:
    """Squeezed cat target S(s_prime) N (|alpha> +/- |-alpha>)."""

    alpha: float
    s_prime: float = 0.0
    parity: Literal["even", "odd"] = "odd"

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.parity not in ("even", "odd"):
            raise ValueError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        if self.parity == "odd" and self.alpha == 0:
            raise ValueError("the odd cat is undefined at alpha = 0")

    @property
    def sign(self) -> int:
        return 1 if self.parity == "even" else -1

    @property
    def squeezing_db(self) -> float:
        return squeezing_to_db(self.s_prime)

    @property
    def norm_sq(self) -> float:
        """N_pm^2 = 1 / (2 +/- 2 exp(-2 alpha^2))."""
        return 1.0 / (2.0 + 2.0 * self.sign * np.exp(-2.0 * self.alpha**2))


def vacuum() -> GaussianMixture:
    return GaussianMixture.vacuum(1)


def coherent(alpha: complex) -> GaussianMixture:
    return GaussianMixture.gaussian(VACUUM_COV, [np.real(alpha), np.imag(alpha)])


def thermal(nbar: float) -> GaussianMixture:
    return GaussianMixture.gaussian((2 * nbar + 1) / 4 * np.eye(2))


def scs_wigner(spec: TargetSpec) -> GaussianMixture:
    """Unsqueezed even/odd cat; ``spec.s_prime`` is ignored.

    The fringe -/+ 2 W_vac(beta) cos(4 alpha beta_i) is written as the pair
    exp(-2 alpha^2) [W_vac(beta - i alpha e_i) + W_vac(beta + i alpha e_i)],
    so every term is a normalized Gaussian and the weights sum to one.
    """
    a = spec.alpha
    if a == 0:
        return vacuum()
    n2 = spec.norm_sq
    fringe = spec.sign * n2 * np.exp(-2 * a * a)
    weights = np.array([n2, n2, fringe, fringe])
    centers = np.array([[a, 0], [-a, 0], [0, 1j * a], [0, -1j * a]])
    return GaussianMixture(weights, centers, np.broadcast_to(VACUUM_COV, (4, 2, 2)))


def sscs_wigner(spec: TargetSpec) -> GaussianMixture:
    """Cat pushed through the single-mode squeezer S1(s_prime)."""
    return apply_affine(scs_wigner(spec), AffineMap(single_mode_squeezer(spec.s_prime)))


# number-basis forms ---------------------------------------------------------


def phi_n_fock(n: int, dim: int) -> FockVector:
    """(-i)^n sqrt(n!/(2n)!) H_n(i a^dag / sqrt 2)|0> in the number basis.

    Expanding the Hermite polynomial, every phase cancels and the amplitude on
    |n - 2k> is sqrt(n!/(2n)!) n! 2^{(n-2k)/2} / (k! sqrt((n-2k)!)).
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if dim <= n:
        raise ValueError(f"dim={dim} must exceed n={n}")
    amps = np.zeros(dim)
    for k in range(n // 2 + 1):
        m = n - 2 * k
        log_c = (
            0.5 * (gammaln(n + 1) - gammaln(2 * n + 1))
            + gammaln(n + 1)
            + 0.5 * m * np.log(2.0)
            - gammaln(k + 1)
            - 0.5 * gammaln(m + 1)
        )
        amps[m] = np.exp(log_c)
    return FockVector(amps)


def scs_fock(spec: TargetSpec, dim: int) -> FockVector:
    """Number-basis amplitudes of the (squeezed) cat ``spec``."""
    work = max(4 * dim, dim + 80)
    plus = coherent_amplitudes(spec.alpha, work)
    minus = coherent_amplitudes(-spec.alpha, work)
    cat = np.sqrt(spec.norm_sq) * (plus + spec.sign * minus)
    if spec.s_prime == 0:
        kept = cat[:dim]
        return FockVector(kept, truncation_error=float(max(0.0, 1 - np.vdot(kept, kept).real)))
    return squeeze_vector(cat, spec.s_prime, dim, margin=work - dim)


def psi_n_fock(n: int, dim: int, tol: float = 1e-10) -> FockVector:
    """3 dB squeezed cat S(ln sqrt 2)|SCS_{(-1)^n}(sqrt n)>."""
    if n == 0:
        spec = TargetSpec(0.0, np.log(np.sqrt(2.0)), "even")
    else:
        spec = TargetSpec(np.sqrt(n), np.log(np.sqrt(2.0)), "even" if n % 2 == 0 else "odd")
    vec = scs_fock(spec, dim)
    if vec.truncation_error > tol:
        raise ValueError(f"dim={dim} keeps only 1 - {vec.truncation_error:.2e} of the norm")
    return vec


# detectors -------------------------------------------------------------------


@dataclass(frozen=True)
class PovmElement:
    """On-off detector outcome as ``identity * I + (operator with Wigner function wigner)``.

    ``wigner`` holds the Gaussian part W_Pi normalized like a state's Wigner
    function, so Tr[rho Pi] = identity * Tr[rho] + pi * int W_rho W_Pi.
    """

    kind: Literal["click", "no_click"]
    eta: float
    wigner: GaussianMixture
    identity: float = 0.0


def _check_eta(eta: float) -> None:
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"efficiency must lie in (0, 1], got {eta}")


def off_povm(eta: float = 1.0) -> PovmElement:
    """sum (1 - eta)^n |n><n|: a thermal state of mean (1-eta)/eta, divided by eta."""
    _check_eta(eta)
    cov = (2.0 - eta) / (4.0 * eta) * np.eye(2)
    return PovmElement("no_click", eta, GaussianMixture.gaussian(cov, weight=1.0 / eta))


def click_povm(eta: float = 1.0) -> PovmElement:
    off = off_povm(eta)
    return PovmElement("click", eta, -off.wigner, identity=1.0)


def apply_povm(mix: GaussianMixture, povm: PovmElement, mode: int) -> GaussianMixture:
    """Unnormalized conditional object on the remaining modes after outcome ``povm`` on ``mode``.

    Its total integral is the outcome probability (for a normalized input).
    """
    if not 0 <= mode < mix.modes:
        raise ValueError(f"mode {mode} out of range for {mix.modes}-mode mixture")
    gaussian_part = integrate_product(mix, povm.wigner, [mode]).scale(np.pi)
    if povm.identity == 0:
        return gaussian_part
    rest = [m for m in range(mix.modes) if m != mode]
    traced = marginalize(mix, rest) if rest else GaussianMixture.scalar(complex(mix.weights.sum()))
    return traced.scale(povm.identity) + gaussian_part


def apply_povms(mix: GaussianMixture, povms: Sequence[PovmElement], modes: Sequence[int]) -> GaussianMixture:
    """Apply several single-mode outcomes; ``modes`` index the input mixture."""
    modes = list(modes)
    out = mix
    for k, (povm, mode) in enumerate(zip(povms, modes)):
        # earlier removals shift the index of later modes down
        shift = sum(1 for m in modes[:k] if m < mode)
        out = apply_povm(out, povm, mode - shift)
    return out
