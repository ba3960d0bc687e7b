"""
Self-check suite behind ``squeezedcat validate``.

Each check compares the phase-space pipeline with an independent route
(closed forms, the truncated Fock simulation, or known state properties) and
records a verdict. Two knobs deliberately break the independent route so the
suite can show it notices: ``mixer_sign=-1`` flips the reflection phase of the
mixing beam splitter in the Fock simulation, and a small ``fock_dim`` starves
it of levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .circuit import CircuitParams, herald_single_photon, run_circuit
from .fock import LeakageError, run_circuit_fock
from .metrics import fidelity, fock_density_matrix, mean_photon_number, mqi
from .phasespace import total_integral
from .states import TargetSpec, phi_n_fock, psi_n_fock, scs_wigner, sscs_wigner


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        return [f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}" for c in self.checks]


def _run(report: ValidationReport, name: str, fn: Callable[[], tuple[bool, str]]) -> None:
    try:
        passed, detail = fn()
    except Exception as exc:
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    report.checks.append(CheckResult(name, bool(passed), detail))


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def check_heralding() -> tuple[bool, str]:
    worst = max(_rel(herald_single_photon(s)[1], math.tanh(s) ** 2) for s in (0.01, 0.04, 0.1, 0.2))
    return worst < 1e-10, f"max relative error of P_d vs tanh^2 s = {worst:.2e}"


def check_oracle(fock_dim: int, mixer_sign: int) -> tuple[bool, str]:
    worst = 0.0
    for s in (0.1, 0.2):
        for eta in (1.0, 0.5):
            params = CircuitParams.from_reflectance(s, 0.01, 0.3, eta)
            g = run_circuit(params)
            f = run_circuit_fock(params, dim=fock_dim, mixer_sign=mixer_sign)
            rho = fock_density_matrix(g.w_out, fock_dim).entries
            err = max(
                _rel(g.p_d, f.p_d),
                _rel(g.p_bc, f.p_bc),
                float(np.abs(rho - f.rho.entries).max() / np.abs(f.rho.entries).max()),
            )
            worst = max(worst, err)
    return worst < 1e-6, f"max relative mismatch (P_d, P_bc, rho) = {worst:.2e}"


def check_mixer_sign(mixer_sign: int) -> tuple[bool, str]:
    """Sign of the |3>/|1> ratio, which carries the r^2 - t^2 factor."""
    s = r1 = 1e-3
    t = 0.3
    r = math.sqrt(1 - t * t)
    params = CircuitParams(s=s, t1=math.sqrt(1 - r1 * r1), t=t)
    rho = run_circuit_fock(params, dim=8, detection="single-photon", mixer_sign=mixer_sign).rho.entries
    measured = rho[3, 1].real / rho[1, 1].real
    expected = math.sqrt(6) * s * t * r / (2 * r1 * (r * r - t * t))
    err = _rel(measured, expected)
    return err < 0.01, f"c3/c1 = {measured:.5f}, leading order {expected:.5f} (relative error {err:.1e})"


def check_leakage(fock_dim: int) -> tuple[bool, str]:
    params = CircuitParams.from_reflectance(0.25, 0.01, 0.3)
    try:
        res = run_circuit_fock(params, dim=fock_dim)
    except LeakageError as exc:
        return False, str(exc)
    return True, f"edge population {res.leakage:.1e} within budget at s=0.25, dim={fock_dim}"


def check_invariants() -> tuple[bool, str]:
    params = CircuitParams.from_reflectance(0.16, 0.001, 0.3, 0.7)
    a = run_circuit(params, order=("b", "c"))
    b = run_circuit(params, order=("c", "b"))
    order = abs(a.p_bc - b.p_bc) / a.p_bc
    norm = abs(total_integral(a.w_out) - 1)
    n, q = mean_photon_number(a.w_out), mqi(a.w_out)
    rho = fock_density_matrix(a.w_out, 16)
    # the two orders round differently; the floor is set by the cancellation
    order_tol = max(1e-12, 10 * a.precision)
    ok = order < order_tol and norm < 1e-9 and q <= n + 1e-6 and rho.is_hermitian() and abs(rho.trace - 1) < 1e-6
    return ok, f"order swap {order:.1e} (tol {order_tol:.0e}), norm {norm:.1e}, MQI {q:.4f} <= <n> {n:.4f}, trace {rho.trace.real:.8f}"


def check_targets() -> tuple[bool, str]:
    f2 = abs(psi_n_fock(2, 40).inner(phi_n_fock(2, 40))) ** 2
    w0 = scs_wigner(TargetSpec(1.7, 0.0, "odd"))([0.0, 0.0]).real
    sscs = sscs_wigner(TargetSpec(1.7, 0.33, "odd"))
    n, q = mean_photon_number(sscs), mqi(sscs)
    self_f = fidelity(sscs, sscs)
    ok = abs(f2 - 0.972) < 0.002 and abs(w0 + 2 / np.pi) < 1e-9 and abs(q / n - 1) < 1e-5 and abs(self_f - 1) < 1e-9
    return ok, f"|<psi2|phi2>|^2 = {f2:.4f}, W_odd(0) = {w0:.6f}, sSCS MQI/<n> = {q / n:.8f}"


def validate(mixer_sign: int = 1, fock_dim: int = 16) -> ValidationReport:
    report = ValidationReport()
    _run(report, "heralding probability", check_heralding)
    _run(report, "oracle equivalence", lambda: check_oracle(fock_dim, mixer_sign))
    _run(report, "r^2 - t^2 sign", lambda: check_mixer_sign(mixer_sign))
    _run(report, "truncation leakage", lambda: check_leakage(fock_dim))
    _run(report, "circuit invariants", check_invariants)
    _run(report, "target states", check_targets)
    return report
