"""
Truncated Fock-space simulation used as an independent check of the
phase-space pipeline.

Operators are dense matrices on ``dim`` levels per mode; two-mode gates are
matrix exponentials of the truncated generators and act on one pair of axes
of a state tensor. The generators follow the same symplectic conventions as
:mod:`squeezedcat.phasespace`:

* two-mode squeezer ``exp[s (a^dag c^dag - a c)]``, so a -> a cosh s + c^dag sinh s
  and the vacuum goes to ``sech s * sum (tanh s)^n |n, n>``;
* beam splitter ``exp[theta/2 (a b^dag - a^dag b)]`` with t = cos(theta/2),
  i.e. a -> t a - r b, b -> r a + t b.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import expm
from scipy.special import eval_genlaguerre, gammaln

LEAKAGE_BUDGET = 1e-10


class LeakageError(RuntimeError):
    """Population reaching the truncation edge exceeds the budget."""


@dataclass(frozen=True, eq=False)
class FockVector:
    """Amplitudes of a pure state, one tensor axis per mode."""

    amps: NDArray[np.complex128]
    truncation_error: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.ndim == 0 or len(set(amps.shape)) != 1:
            raise ValueError("every mode must share the same truncation")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    @property
    def modes(self) -> int:
        return self.amps.ndim

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def inner(self, other: "FockVector") -> complex:
        """<self|other> over the common truncation."""
        d = min(self.dim, other.dim)
        sl = (slice(0, d),) * self.modes
        return complex(np.vdot(self.amps[sl], other.amps[sl]))


@dataclass(frozen=True, eq=False)
class FockMatrix:
    """Single-mode operator in the truncated number basis."""

    entries: NDArray[np.complex128]

    def __post_init__(self):
        e = np.array(self.entries, dtype=complex)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError("FockMatrix must be square")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.entries, self.entries.conj().T, rtol=0.0, atol=atol))

    def mean_photon_number(self) -> float:
        return float(np.real(np.arange(self.dim) @ np.diag(self.entries)))

    def wigner_at_origin(self) -> float:
        """(2/pi) * <parity>, from the diagonal alone."""
        signs = (-1.0) ** np.arange(self.dim)
        return float(2 / np.pi * np.real(signs @ np.diag(self.entries)))


def annihilation(dim: int) -> NDArray[np.float64]:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def _frozen(mat: NDArray) -> NDArray:
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=64)
def tms_unitary(s: float, dim: int) -> NDArray[np.float64]:
    """Truncated exp[s (a^dag c^dag - a c)] on dim**2 levels, (first, second) ordering."""
    a = annihilation(dim)
    eye = np.eye(dim)
    ac = np.kron(a, eye) @ np.kron(eye, a)
    return _frozen(expm(s * (ac.T - ac)))


@lru_cache(maxsize=64)
def bs_unitary(t: float, dim: int, sign: int = 1) -> NDArray[np.float64]:
    """Truncated exp[theta/2 (a b^dag - a^dag b)] with cos(theta/2) = t.

    ``sign=-1`` reverses the reflection phase; it exists only so validation
    can demonstrate that the sign-sensitive checks catch a flipped convention.
    """
    a = annihilation(dim)
    eye = np.eye(dim)
    A, B = np.kron(a, eye), np.kron(eye, a)
    half_theta = sign * np.arccos(np.clip(t, -1.0, 1.0))
    return _frozen(expm(half_theta * (A @ B.T - A.T @ B)))


@lru_cache(maxsize=64)
def single_mode_squeeze_unitary(s: float, dim: int) -> NDArray[np.float64]:
    """Truncated exp[(s/2)(a^2 - a^dag^2)]; s > 0 squeezes the real quadrature."""
    a = annihilation(dim)
    return _frozen(expm(0.5 * s * (a @ a - a.T @ a.T)))


def apply_two_mode(amps: NDArray, unitary: NDArray, axes: tuple[int, int]) -> NDArray[np.complex128]:
    """Apply a dim**2 x dim**2 gate to two axes of a state tensor."""
    d = amps.shape[0]
    moved = np.moveaxis(amps, axes, (0, 1))
    rest = moved.shape[2:]
    out = (unitary @ moved.reshape(d * d, -1)).reshape((d, d) + rest)
    return np.moveaxis(out, (0, 1), axes)


def edge_population(amps: NDArray) -> float:
    """Total probability on states with any mode at its highest level."""
    prob = np.abs(amps) ** 2
    inner = prob[(slice(0, -1),) * prob.ndim].sum()
    return float(prob.sum() - inner)


def _check_leakage(amps: NDArray, budget: float) -> float:
    leak = edge_population(amps)
    if leak > budget:
        raise LeakageError(f"edge population {leak:.3e} exceeds budget {budget:.1e}; raise the Fock dimension")
    return leak


def apply_tms(state: FockVector, s: float, modes: tuple[int, int], budget: float = LEAKAGE_BUDGET) -> FockVector:
    out = apply_two_mode(state.amps, tms_unitary(float(s), state.dim), modes)
    leak = _check_leakage(out, budget)
    return FockVector(out, state.truncation_error + leak)


def apply_bs(
    state: FockVector, t: float, modes: tuple[int, int], budget: float = LEAKAGE_BUDGET, sign: int = 1
) -> FockVector:
    out = apply_two_mode(state.amps, bs_unitary(float(t), state.dim, sign), modes)
    leak = _check_leakage(out, budget)
    return FockVector(out, state.truncation_error + leak)


def tmsv(s: float, dim: int) -> FockVector:
    """Closed-form two-mode squeezed vacuum sech(s) sum (tanh s)^n |n, n>."""
    missing = np.tanh(abs(s)) ** (2 * dim)
    if missing >= 1e-12:
        raise LeakageError(f"dim={dim} too small for s={s} (discarded population {missing:.2e})")
    amps = np.zeros((dim, dim))
    n = np.arange(dim)
    amps[n, n] = np.tanh(s) ** n / np.cosh(s)
    return FockVector(amps, truncation_error=float(1.0 - np.sum(amps**2)))


def off_diagonal(eta: float, dim: int) -> NDArray[np.float64]:
    """Diagonal of the no-click element sum (1 - eta)^n |n><n|."""
    return (1.0 - eta) ** np.arange(dim)


def click_diagonal(eta: float, dim: int) -> NDArray[np.float64]:
    return 1.0 - off_diagonal(eta, dim)


def coherent_amplitudes(alpha: complex, dim: int) -> NDArray[np.complex128]:
    n = np.arange(dim)
    if alpha == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    logmag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(logmag) * np.exp(1j * np.angle(alpha) * n)


def squeeze_vector(amps: NDArray, s: float, dim: int, margin: int | None = None) -> FockVector:
    """Squeeze a single-mode state and truncate the result to ``dim`` levels.

    The unitary is built on a larger working space so the truncation of the
    generator does not contaminate the kept levels.
    """
    work = max(4 * dim, dim + 80) if margin is None else dim + margin
    vec = np.zeros(work, dtype=complex)
    k = min(work, len(amps))
    vec[:k] = amps[:k]
    out = single_mode_squeeze_unitary(float(s), work) @ vec
    kept = out[:dim]
    return FockVector(kept, truncation_error=float(max(0.0, 1.0 - np.vdot(kept, kept).real)))


def fock_wigner_kernel(m: int, n: int, beta: NDArray) -> NDArray[np.complex128]:
    """Wigner function of the operator |m><n| at complex points ``beta``.

    Normalized so that pi * int W_rho W_{|n><m|} d^2 beta = <m|rho|n>.
    """
    beta = np.asarray(beta, dtype=complex)
    if m < n:
        return np.conj(fock_wigner_kernel(n, m, beta))
    r2 = np.abs(beta) ** 2
    pref = 2 / np.pi * (-1.0) ** n * np.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)))
    return pref * (2 * np.conj(beta)) ** (m - n) * np.exp(-2 * r2) * eval_genlaguerre(n, m - n, 4 * r2)


@dataclass(frozen=True)
class FockCircuitResult:
    rho: FockMatrix
    p_d: float
    p_bc: float
    leakage: float
    herald_rho: FockMatrix = field(repr=False)

    @property
    def p(self) -> float:
        return self.p_d * self.p_bc


def run_circuit_fock(
    params,
    dim: int = 16,
    detection: Literal["on-off", "single-photon"] = "on-off",
    budget: float = LEAKAGE_BUDGET,
    mixer_sign: int = 1,
) -> FockCircuitResult:
    """Whole scheme in the number basis.

    Herald mode a from a two-mode squeezed vacuum (detector d), feed each
    number component of the heralded state through the second squeezer (a, c),
    the tap (a, b) and the mixer (b, c), then apply the click elements on b
    and c. ``detection="single-photon"`` replaces the click elements by |1><1|
    projections, the idealized detection of the small-parameter sketch.
    """
    s, t1, t = params.s, params.t1, params.t
    pair = tmsv(s, dim)
    leak = max(pair.truncation_error, 0.0)
    pops = np.abs(np.diag(pair.amps)) ** 2

    def detector(eta):
        if detection == "single-photon":
            out = np.zeros(dim)
            out[1] = 1.0
            return out
        return click_diagonal(eta, dim)

    herald = pops * detector(params.eta_d)
    p_d = float(herald.sum())
    herald_weights = herald / p_d
    edge = herald_weights[-1]
    if edge > budget:
        raise LeakageError(f"heralded state reaches level {dim - 1} with weight {edge:.3e}; raise the Fock dimension")

    click_b, click_c = detector(params.eta_b), detector(params.eta_c)
    mask = click_b[:, None] * click_c[None, :]
    rho = np.zeros((dim, dim), dtype=complex)
    cutoff = herald_weights.max() * 1e-30
    for n, p_n in enumerate(herald_weights):
        if p_n <= cutoff:
            continue
        psi = np.zeros((dim, dim, dim), dtype=complex)
        psi[n, 0, 0] = 1.0
        psi = apply_two_mode(psi, tms_unitary(float(s), dim), (0, 2))
        psi = apply_two_mode(psi, bs_unitary(float(t1), dim), (0, 1))
        psi = apply_two_mode(psi, bs_unitary(float(t), dim, mixer_sign), (1, 2))
        leak += p_n * edge_population(psi)
        rho += p_n * np.einsum("abc,dbc,bc->ad", psi, psi.conj(), mask)
    if leak > budget:
        raise LeakageError(f"edge population {leak:.3e} exceeds budget {budget:.1e}; raise the Fock dimension")
    p_bc = float(np.real(np.trace(rho)))
    return FockCircuitResult(
        rho=FockMatrix(rho / p_bc),
        p_d=p_d,
        p_bc=p_bc,
        leakage=float(leak),
        herald_rho=FockMatrix(np.diag(herald_weights)),
    )
