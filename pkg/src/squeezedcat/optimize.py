"""
Fidelity maximization over the mixer transmissivity and the target family.

The search space is (t, s', alpha). Nelder-Mead from scipy runs on an
unconstrained encoding: t = sigmoid(u) keeps 0 < t < 1 and
alpha = ALPHA_MIN + softplus(v) keeps the odd cat well defined. The first
start comes from the small-parameter amplitude ratio; the remaining ones are
drawn from a seeded generator, so a given seed always gives the same answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize
from scipy.special import expit, logit

from .circuit import CircuitParams, CircuitResult, run_circuit
from .fock import FockCircuitResult, run_circuit_fock
from .metrics import fidelity, mean_photon_number
from .phasespace import GaussianMixture, _gauss
from .states import TargetSpec, scs_fock, sscs_wigner

# below this the odd-cat normalization loses digits to cancellation
ALPHA_MIN = 0.05
T_MIN, T_MAX = 1e-4, 1.0 - 1e-4


@dataclass(frozen=True)
class OptimizerSettings:
    """Knobs for :func:`optimize_fidelity`.

    ``xatol`` and ``fatol`` are the simplex tolerances on the encoded
    coordinates and on the objective.
    """

    max_iter: int = 1000
    xatol: float = 1e-4
    fatol: float = 1e-9
    multistarts: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.multistarts < 1:
            raise ValueError("need at least one start")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


@dataclass(frozen=True)
class Optimum:
    t: float
    s_prime: float
    alpha: float
    fidelity: float
    converged: bool
    evaluations: int
    circuit: CircuitResult | FockCircuitResult = field(repr=False)

    @property
    def target(self) -> TargetSpec:
        return TargetSpec(self.alpha, self.s_prime, "odd")


def _softplus(v: float) -> float:
    return float(np.logaddexp(0.0, v))


def _softplus_inv(a: float) -> float:
    return float(a + np.log(-np.expm1(-a)))


def _decode(x: Sequence[float]) -> tuple[float, float, float]:
    t = float(np.clip(expit(x[0]), T_MIN, T_MAX))
    return t, float(x[1]), ALPHA_MIN + _softplus(x[2])


def _encode(t: float, s_prime: float, alpha: float) -> np.ndarray:
    t = float(np.clip(t, T_MIN, T_MAX))
    return np.array([logit(t), s_prime, _softplus_inv(max(alpha - ALPHA_MIN, 1e-6))])


def perturbative_mixer(s: float, t1: float, ratio: float = np.sqrt(2.0 / 3.0)) -> float | None:
    """t at which the leading-order |3>/|1> amplitude ratio equals ``ratio``.

    To leading order the output is proportional to
    2 s r1 (t^2 - r^2)|1> - sqrt(6) s^2 t r |3>; with t = sin(theta) the ratio
    c3/c1 = sqrt(6) s tan(2 theta) / (4 r1). Returns None when the requested
    ratio needs theta outside (0, pi/4).
    """
    r1 = np.sqrt(1.0 - t1 * t1)
    tan2 = 4.0 * r1 * ratio / (np.sqrt(6.0) * s)
    if not np.isfinite(tan2) or tan2 <= 0:
        return None
    return float(np.sin(0.5 * np.arctan(tan2)))


def _params(s: float, t1: float, t: float, etas: Sequence[float]) -> CircuitParams:
    eta_d, eta_b, eta_c = etas
    return CircuitParams(s=s, t1=t1, t=t, eta_d=eta_d, eta_b=eta_b, eta_c=eta_c)


def _starts(s: float, t1: float, settings: OptimizerSettings) -> list[np.ndarray]:
    t0 = perturbative_mixer(s, t1)
    t0 = 0.3 if t0 is None else float(np.clip(t0, 0.05, 0.9))
    starts = [_encode(t0, 0.33, 1.7)]
    rng = np.random.default_rng(settings.seed)
    for _ in range(settings.multistarts - 1):
        starts.append(_encode(rng.uniform(0.05, 0.7), rng.uniform(0.0, 0.7), rng.uniform(0.5, 3.0)))
    return starts


def _round_off(w: GaussianMixture) -> float:
    return float(np.finfo(float).eps * np.abs(w.weights).sum())


def _fock_fidelity(rho: np.ndarray, spec: TargetSpec) -> float:
    v = scs_fock(spec, rho.shape[0]).amps
    return float(np.real(np.vdot(v, rho @ v)))


def optimize_fidelity(
    s: float,
    t1: float,
    etas: Sequence[float] = (1.0, 1.0, 1.0),
    settings: OptimizerSettings | None = None,
    backend: str = "gaussian",
    fock_dim: int = 12,
) -> Optimum:
    """Maximize F(run_circuit, odd sSCS(alpha, s')) over (t, s', alpha).

    ``etas`` is (eta_d, eta_b, eta_c). The best start wins; ``converged`` is
    the simplex's own verdict for that start, so a False flag means the
    returned point is the best seen within ``max_iter`` iterations.

    ``backend="fock"`` scores candidates with the truncated number-basis
    simulation instead. It is meant for very weak squeezing, where the
    phase-space mixture cancels to a tiny probability and loses digits
    (see :attr:`squeezedcat.circuit.CircuitResult.amplification`).
    """
    settings = settings or OptimizerSettings()
    etas = tuple(float(e) for e in etas)
    if backend not in ("gaussian", "fock"):
        raise ValueError(f"unknown backend {backend!r}")

    def evaluate(t, sp, a):
        params = _params(s, t1, t, etas)
        spec = TargetSpec(a, sp, "odd")
        if backend == "fock":
            res = run_circuit_fock(params, dim=fock_dim)
            return _fock_fidelity(res.rho.entries, spec), res
        res = run_circuit(params)
        return fidelity(res.w_out, sscs_wigner(spec)), res

    def objective(x):
        return -evaluate(*_decode(x))[0]

    starts = _starts(s, t1, settings)
    fatol = settings.fatol
    if backend == "gaussian":
        # same reasoning as in optimize_target: never ask for more than the round-off floor allows
        fatol = max(fatol, 10 * evaluate(*_decode(starts[0]))[1].precision)
    best, evals = None, 0
    for x0 in starts:
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"maxiter": settings.max_iter, "xatol": settings.xatol, "fatol": fatol},
        )
        evals += res.nfev
        # strict comparison keeps the earliest start on ties
        if best is None or res.fun < best.fun:
            best = res
    t, sp, a = _decode(best.x)
    f, circuit = evaluate(t, sp, a)
    return Optimum(t, sp, a, f, bool(best.success), evals, circuit)


def optimize_target(
    w_out: GaussianMixture, s_prime: float = 0.33, alpha: float = 1.7, xatol: float = 1e-6, fatol: float = 1e-10
) -> tuple[float, float, float]:
    """Best odd sSCS for a fixed output state: (F, s', alpha).

    ``fatol`` is raised to ten times the output's round-off floor; a
    tolerance below the floor is never met and the simplex would run to its
    iteration cap.
    """
    fatol = max(fatol, 10 * _round_off(w_out))

    def objective(x):
        a = ALPHA_MIN + _softplus(x[1])
        return -fidelity_grid(w_out, [a], [x[0]])[0, 0]

    x0 = np.array([s_prime, _softplus_inv(max(alpha - ALPHA_MIN, 1e-6))])
    res = minimize(objective, x0, method="Nelder-Mead", options={"xatol": xatol, "fatol": fatol, "maxiter": 4000})
    a = ALPHA_MIN + _softplus(res.x[1])
    f = fidelity(w_out, sscs_wigner(TargetSpec(a, float(res.x[0]), "odd")))
    return f, float(res.x[0]), a


# grid refinement -------------------------------------------------------------


def fidelity_grid(w_out: GaussianMixture, alphas: np.ndarray, s_primes: np.ndarray) -> np.ndarray:
    """F against every odd sSCS on the (alpha, s') grid, shape (len(alphas), len(s_primes)).

    Vectorized form of :func:`squeezedcat.metrics.fidelity`, used where
    thousands of targets are scored against one output.
    """
    a = np.asarray(alphas, dtype=float)[:, None]
    sp = np.asarray(s_primes, dtype=float)[None, :]
    a, sp = np.broadcast_arrays(a, sp)
    n2 = 1.0 / (2.0 - 2.0 * np.exp(-2.0 * a * a))
    fringe = -n2 * np.exp(-2.0 * a * a)
    zero = np.zeros_like(a)
    # four terms per target: +/- alpha on the squeezed axis, +/- i alpha on the other
    cr = np.stack([a * np.exp(-sp), -a * np.exp(-sp), zero, zero], axis=-1)
    ci = np.stack([zero, zero, 1j * a * np.exp(sp), -1j * a * np.exp(sp)], axis=-1)
    wt = np.stack([n2, n2, fringe, fringe], axis=-1)
    centers = np.stack([cr, ci], axis=-1)  # (A, S, 4, 2)
    covs = np.zeros(a.shape + (2, 2))
    covs[..., 0, 0] = np.exp(-2 * sp) / 4
    covs[..., 1, 1] = np.exp(2 * sp) / 4
    total = np.zeros(a.shape, dtype=complex)
    for w, mu, cov in zip(w_out.weights, w_out.centers, w_out.covs):
        g = _gauss((covs + cov)[..., None, :, :], mu - centers)
        total += w * np.sum(wt * g, axis=-1)
    return np.pi * total.real


@dataclass(frozen=True)
class GridCheck:
    grid_best: float
    optimum: float
    points: int

    @property
    def gap(self) -> float:
        """How far the grid beats the optimizer (positive means the grid won)."""
        return self.grid_best - self.optimum


def grid_refinement(
    s: float,
    t1: float,
    opt: Optimum,
    etas: Sequence[float] = (1.0, 1.0, 1.0),
    points: int = 41,
    half_width: tuple[float, float, float] = (0.05, 0.05, 0.1),
) -> GridCheck:
    """Exhaustive ``points``**3 grid centred on ``opt`` in (t, s', alpha)."""
    ht, hs, ha = half_width
    ts = np.linspace(max(opt.t - ht, T_MIN), min(opt.t + ht, T_MAX), points)
    sps = np.linspace(opt.s_prime - hs, opt.s_prime + hs, points)
    alphas = np.linspace(max(opt.alpha - ha, ALPHA_MIN), opt.alpha + ha, points)
    best = -np.inf
    for t in ts:
        w = run_circuit(_params(s, t1, float(t), tuple(etas))).w_out
        best = max(best, float(fidelity_grid(w, alphas, sps).max()))
    return GridCheck(best, opt.fidelity, points**3)


# size at a fidelity floor ----------------------------------------------------


@dataclass(frozen=True)
class SizeAtFidelity:
    t: float
    mean_n: float
    fidelity: float
    s_prime: float
    alpha: float


def max_size_at_fidelity(
    s: float,
    t1: float,
    f_min: float,
    etas: Sequence[float] = (1.0, 1.0, 1.0),
    t_grid: np.ndarray | None = None,
) -> SizeAtFidelity:
    """Largest <n> reachable by tuning t while the best-target fidelity stays >= f_min.

    s and the detectors are held fixed. For each t the target is re-optimized;
    the constrained maximum sits either at an interior grid point or on the
    fidelity boundary, which is then located with a bracketing root finder.
    """
    etas = tuple(float(e) for e in etas)
    ts = np.arange(0.02, 0.99, 0.02) if t_grid is None else np.asarray(t_grid, dtype=float)

    warm = [0.33, 1.7]

    def evaluate(t):
        w = run_circuit(_params(s, t1, float(t), etas)).w_out
        f, sp, a = optimize_target(w, *warm)
        warm[:] = [sp, a]
        return f, mean_photon_number(w), sp, a

    rows = [evaluate(t) for t in ts]
    fs = np.array([r[0] for r in rows])
    ns = np.array([r[1] for r in rows])
    feasible = fs >= f_min
    if not feasible.any():
        raise ValueError(f"no t reaches fidelity {f_min} at s={s}")
    k = int(np.argmax(np.where(feasible, ns, -np.inf)))
    t_best = float(ts[k])
    # move onto the boundary when the larger-<n> neighbour is infeasible
    for j in (k - 1, k + 1):
        if 0 <= j < len(ts) and not feasible[j] and ns[j] > ns[k]:
            warm[:] = [rows[k][2], rows[k][3]]
            t_best = brentq(lambda t: evaluate(t)[0] - f_min, ts[k], ts[j], xtol=1e-8)
            break
    warm[:] = [rows[k][2], rows[k][3]]
    f, n, sp, a = evaluate(t_best)
    return SizeAtFidelity(t_best, n, f, sp, a)
