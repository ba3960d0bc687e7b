"""
Command-line entry point.

Every subcommand reads an optional flat JSON config (``--config``) and writes
to ``--out`` or standard output. Exit status is 0 on success, 1 when
``validate`` finds a failure and 2 for a bad configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Mapping, Sequence

from .circuit import CircuitParams, run_circuit
from .metrics import MAX_FOCK_DIM, fock_density_matrix, metrics_report
from .optimize import OptimizerSettings, optimize_fidelity
from .states import TargetSpec, scs_wigner, sscs_wigner
from .sweep import (
    ConfigError,
    GridSpec,
    SweepConfig,
    density_matrix_csv,
    export_wigner_grid,
    rows_to_csv,
    run_sweep,
    wigner_csv,
)
from .validation import validate

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2

CIRCUIT_KEYS = {"s", "r1sq", "t1", "t", "eta", "eta_d", "eta_b", "eta_c"}
TARGET_KEYS = {"alpha", "s_prime", "parity"}
OPT_KEYS = {"max_iter", "xatol", "fatol", "multistarts", "seed", "backend"}
GRID_KEYS = {"r_min", "r_max", "i_min", "i_max", "points", "state"}


def _load(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def _check_keys(data: Mapping[str, Any], allowed: set[str]) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")


def _num(data, key, default=None) -> float:
    v = data.get(key, default)
    if v is None:
        raise ConfigError(f"missing config key {key!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{key} must be a finite number, got {v!r}")
    return float(v)


def circuit_params(data: Mapping[str, Any]) -> CircuitParams:
    """Defaults reproduce the moderate-squeezing working point s=0.16, r1^2=0.001."""
    if "r1sq" in data and "t1" in data:
        raise ConfigError("give either r1sq or t1, not both")
    t1 = _num(data, "t1") if "t1" in data else math.sqrt(1.0 - _num(data, "r1sq", 0.001))
    eta = _num(data, "eta", 1.0)
    try:
        return CircuitParams(
            s=_num(data, "s", 0.16),
            t1=t1,
            t=_num(data, "t", 0.1),
            eta_d=_num(data, "eta_d", eta),
            eta_b=_num(data, "eta_b", eta),
            eta_c=_num(data, "eta_c", eta),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def target_spec(data: Mapping[str, Any]) -> TargetSpec:
    try:
        return TargetSpec(_num(data, "alpha", 1.7), _num(data, "s_prime", 0.33), data.get("parity", "odd"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _fock_dim(args) -> int:
    dim = 16 if args.fock_dim is None else args.fock_dim
    if not 1 <= dim <= MAX_FOCK_DIM:
        raise ConfigError(f"--fock-dim must lie in [1, {MAX_FOCK_DIM}]")
    return dim


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


# subcommands -----------------------------------------------------------------


def cmd_simulate(args, data) -> int:
    _check_keys(data, CIRCUIT_KEYS | TARGET_KEYS)
    params = circuit_params(data)
    target = target_spec(data)
    res = run_circuit(params)
    report = metrics_report(res.w_out, sscs_wigner(target), _fock_dim(args))
    doc = {
        "params": {"s": params.s, "t1": params.t1, "t": params.t, "eta_d": params.eta_d, "eta_b": params.eta_b, "eta_c": params.eta_c},
        "target": {"alpha": target.alpha, "s_prime": target.s_prime, "parity": target.parity},
        "P_d": res.p_d,
        "P_bc": res.p_bc,
        "P": res.p,
        "terms": len(res.w_out),
        "precision_estimate": res.precision,
        "metrics": report.as_dict(with_rho=True),
    }
    _emit(json.dumps(doc, indent=2), args.out)
    return EXIT_OK


def cmd_optimize(args, data) -> int:
    _check_keys(data, CIRCUIT_KEYS - {"t"} | OPT_KEYS)
    params = circuit_params({k: v for k, v in data.items() if k in CIRCUIT_KEYS})
    seed = args.seed if args.seed is not None else data.get("seed", 0)
    try:
        settings = OptimizerSettings(
            max_iter=int(data.get("max_iter", OptimizerSettings.max_iter)),
            xatol=_num(data, "xatol", OptimizerSettings.xatol),
            fatol=_num(data, "fatol", OptimizerSettings.fatol),
            multistarts=int(data.get("multistarts", OptimizerSettings.multistarts)),
            seed=int(seed),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    backend = data.get("backend", "gaussian")
    if backend not in ("gaussian", "fock"):
        raise ConfigError("backend must be 'gaussian' or 'fock'")
    etas = (params.eta_d, params.eta_b, params.eta_c)
    opt = optimize_fidelity(params.s, params.t1, etas, settings, backend=backend, fock_dim=_fock_dim(args))
    doc = {
        "s": params.s,
        "t1": params.t1,
        "etas": list(etas),
        "t_opt": opt.t,
        "s_prime_opt": opt.s_prime,
        "alpha_opt": opt.alpha,
        "F": opt.fidelity,
        "P_d": opt.circuit.p_d,
        "P_bc": opt.circuit.p_bc,
        "P": opt.circuit.p,
        "converged": opt.converged,
        "evaluations": opt.evaluations,
        "backend": backend,
    }
    _emit(json.dumps(doc, indent=2), args.out)
    return EXIT_OK


def cmd_sweep(args, data) -> int:
    if args.seed is not None:
        data["seed"] = args.seed
    if args.threads is not None:
        data["threads"] = args.threads
    config = SweepConfig.from_mapping(data)
    out = args.out if args.out is not None else config.out
    _emit(rows_to_csv(run_sweep(config)), out)
    return EXIT_OK


def cmd_wigner_grid(args, data) -> int:
    _check_keys(data, CIRCUIT_KEYS | TARGET_KEYS | GRID_KEYS)
    state = data.get("state", "output")
    if state == "output":
        w = run_circuit(circuit_params(data)).w_out
    elif state == "target":
        spec = target_spec(data)
        w = sscs_wigner(spec) if spec.s_prime else scs_wigner(spec)
    else:
        raise ConfigError("state must be 'output' or 'target'")
    g = GridSpec()
    try:
        grid = GridSpec(
            _num(data, "r_min", g.r_min), _num(data, "r_max", g.r_max),
            _num(data, "i_min", g.i_min), _num(data, "i_max", g.i_max),
            int(data.get("points", g.points)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    _emit(wigner_csv(export_wigner_grid(w, grid)), args.out)
    return EXIT_OK


def cmd_density_matrix(args, data) -> int:
    _check_keys(data, CIRCUIT_KEYS)
    w = run_circuit(circuit_params(data)).w_out
    _emit(density_matrix_csv(fock_density_matrix(w, _fock_dim(args)).entries), args.out)
    return EXIT_OK


def cmd_validate(args, data) -> int:
    _check_keys(data, set())
    report = validate(mixer_sign=-1 if args.mutate_mixer_sign else 1, fock_dim=_fock_dim(args))
    lines = report.lines()
    lines.append("all checks passed" if report.ok else "validation FAILED")
    _emit("\n".join(lines), args.out)
    return EXIT_OK if report.ok else EXIT_VALIDATION


COMMANDS = {
    "simulate": (cmd_simulate, "run the circuit once and report probabilities and metrics as JSON"),
    "optimize": (cmd_optimize, "maximize the fidelity over the mixer and the target"),
    "sweep": (cmd_sweep, "run a parameter sweep and write CSV"),
    "wigner-grid": (cmd_wigner_grid, "tabulate a Wigner function on a rectangular grid"),
    "density-matrix": (cmd_density_matrix, "number-basis density matrix of the output as CSV"),
    "validate": (cmd_validate, "cross-check the pipeline against independent oracles"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="squeezedcat", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="flat JSON config file")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, help="seed for optimizer multistarts")
        p.add_argument("--threads", type=int, help="worker threads for sweeps")
        p.add_argument("--fock-dim", type=int, help="number-basis truncation (default 16)")
        if name == "validate":
            p.add_argument(
                "--mutate-mixer-sign",
                action="store_true",
                help="self-test: flip the mixer phase in the oracle; the sign checks must fail",
            )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which matches the bad-config code
        return int(exc.code or 0)
    handler = COMMANDS[args.command][0]
    try:
        data = _load(args.config)
        return handler(args, data)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
