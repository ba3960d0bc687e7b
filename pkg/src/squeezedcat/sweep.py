"""
Parameter sweeps, configuration ingestion and tabular export.

A sweep visits every (s, r1^2, eta) grid point in row-major order. In the
default mode each point runs :func:`~squeezedcat.optimize.optimize_fidelity`;
in fixed-target mode the mixer and target are pinned and only the metrics are
evaluated. Points are independent and may run on a thread pool, but rows are
always written in grid order so identical configs give identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .circuit import CircuitParams, run_circuit
from .metrics import fidelity, mean_photon_number, mqi
from .optimize import OptimizerSettings, optimize_fidelity
from .phasespace import GaussianMixture
from .states import TargetSpec, sscs_wigner

CSV_HEADER = ("s", "r1sq", "eta", "t_opt", "s_prime_opt", "alpha_opt", "P_d", "P_bc", "P", "F", "mean_n", "MQI", "rel_MQI", "status")
DEFAULT_S_GRID = tuple(round(0.02 * k, 2) for k in range(1, 16))
DEFAULT_R1SQ = (0.001, 0.01, 0.1)
# fixed target of the size study: mixer t, target s', target alpha
FIXED_TARGET = (0.21, 0.57, 2.4)
# flag rows whose round-off estimate exceeds this
PRECISION_FLAG = 1e-6


class ConfigError(ValueError):
    """Malformed or out-of-range configuration."""


@dataclass(frozen=True)
class FixedTarget:
    t: float
    s_prime: float
    alpha: float

    @property
    def target(self) -> TargetSpec:
        return TargetSpec(self.alpha, self.s_prime, "odd")


@dataclass(frozen=True)
class SweepConfig:
    """Everything a sweep needs; build from JSON with :meth:`from_mapping`.

    Detector efficiencies default to the grid value ``eta`` on all three
    detectors; ``eta_d``, ``eta_b`` or ``eta_c`` pin individual detectors.
    """

    s_grid: tuple[float, ...] = DEFAULT_S_GRID
    r1sq_list: tuple[float, ...] = DEFAULT_R1SQ
    eta_grid: tuple[float, ...] = (1.0,)
    fixed_target: FixedTarget | None = None
    eta_d: float | None = None
    eta_b: float | None = None
    eta_c: float | None = None
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    threads: int = 1
    out: str | None = None

    def __post_init__(self):
        for name, lo, hi, closed_hi in (
            ("s_grid", 0.0, math.inf, False),
            ("r1sq_list", 0.0, 1.0, False),
            ("eta_grid", 0.0, 1.0, True),
        ):
            vals = getattr(self, name)
            if not vals:
                raise ConfigError(f"{name} must not be empty")
            for v in vals:
                if not (isinstance(v, (int, float)) and math.isfinite(v)):
                    raise ConfigError(f"{name} holds a non-numeric value {v!r}")
                if not (lo < v < hi or (closed_hi and v == hi)):
                    raise ConfigError(f"{name} value {v} out of range")
        for name in ("eta_d", "eta_b", "eta_c"):
            v = getattr(self, name)
            if v is not None and not 0.0 < v <= 1.0:
                raise ConfigError(f"{name} must lie in (0, 1], got {v}")
        if self.fixed_target is not None:
            ft = self.fixed_target
            if not 0.0 < ft.t < 1.0 or ft.alpha <= 0:
                raise ConfigError("fixed target needs 0 < t < 1 and alpha > 0")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")

    # ingestion ---------------------------------------------------------------

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "SweepConfig":
        """Build from a flat key-value mapping (the parsed JSON document).

        Keys: s_grid, r1sq_list, eta_grid, mode ("optimize" or "fixed"),
        fixed_t, fixed_s_prime, fixed_alpha, eta_d, eta_b, eta_c, max_iter,
        xatol, fatol, multistarts, seed, threads, out.
        """
        if not isinstance(data, Mapping):
            raise ConfigError("config must be a JSON object")
        known = {
            "s_grid", "r1sq_list", "eta_grid", "mode", "fixed_t", "fixed_s_prime", "fixed_alpha",
            "eta_d", "eta_b", "eta_c", "max_iter", "xatol", "fatol", "multistarts", "seed", "threads", "out",
        }
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

        def grid(key, default):
            if key not in data:
                return default
            val = data[key]
            if isinstance(val, (int, float)) and not isinstance(val, bool):
                val = [val]
            if not isinstance(val, list):
                raise ConfigError(f"{key} must be a number or a list of numbers")
            return tuple(_number(key, v) for v in val)

        mode = data.get("mode", "optimize")
        if mode not in ("optimize", "fixed"):
            raise ConfigError(f"mode must be 'optimize' or 'fixed', got {mode!r}")
        fixed_keys = {"fixed_t", "fixed_s_prime", "fixed_alpha"} & set(data)
        if fixed_keys and mode != "fixed":
            raise ConfigError("fixed_* keys need mode 'fixed'")
        fixed = None
        if mode == "fixed":
            t, sp, a = FIXED_TARGET
            fixed = FixedTarget(
                _number("fixed_t", data.get("fixed_t", t)),
                _number("fixed_s_prime", data.get("fixed_s_prime", sp)),
                _number("fixed_alpha", data.get("fixed_alpha", a)),
            )
        try:
            opt = OptimizerSettings(
                max_iter=_integer("max_iter", data.get("max_iter", OptimizerSettings.max_iter)),
                xatol=_number("xatol", data.get("xatol", OptimizerSettings.xatol)),
                fatol=_number("fatol", data.get("fatol", OptimizerSettings.fatol)),
                multistarts=_integer("multistarts", data.get("multistarts", OptimizerSettings.multistarts)),
                seed=_integer("seed", data.get("seed", OptimizerSettings.seed)),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        out = data.get("out")
        if out is not None and not isinstance(out, str):
            raise ConfigError("out must be a path string")
        return cls(
            s_grid=grid("s_grid", DEFAULT_S_GRID),
            r1sq_list=grid("r1sq_list", DEFAULT_R1SQ),
            eta_grid=grid("eta_grid", (1.0,)),
            fixed_target=fixed,
            eta_d=_optional_number("eta_d", data.get("eta_d")),
            eta_b=_optional_number("eta_b", data.get("eta_b")),
            eta_c=_optional_number("eta_c", data.get("eta_c")),
            optimizer=opt,
            threads=_integer("threads", data.get("threads", 1)),
            out=out,
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "SweepConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_mapping(data)

    def points(self) -> list[tuple[float, float, float]]:
        return [(s, r, e) for s in self.s_grid for r in self.r1sq_list for e in self.eta_grid]

    def etas(self, eta: float) -> tuple[float, float, float]:
        return tuple(eta if v is None else v for v in (self.eta_d, self.eta_b, self.eta_c))


def _number(key, v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{key} must be a finite number, got {v!r}")
    return float(v)


def _optional_number(key, v) -> float | None:
    return None if v is None else _number(key, v)


def _integer(key, v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{key} must be an integer, got {v!r}")
    return v


# rows --------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    s: float
    r1sq: float
    eta: float
    t_opt: float = math.nan
    s_prime_opt: float = math.nan
    alpha_opt: float = math.nan
    P_d: float = math.nan
    P_bc: float = math.nan
    P: float = math.nan
    F: float = math.nan
    mean_n: float = math.nan
    MQI: float = math.nan
    rel_MQI: float = math.nan
    status: str = "ok"

    def values(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append(v if isinstance(v, str) else format(v, ".12g"))
        return out


def _metrics_row(s, r1sq, eta, t, sp, a, result, f, status) -> SweepRow:
    w = result.w_out
    n = mean_photon_number(w)
    q = mqi(w)
    if result.precision > PRECISION_FLAG and status == "ok":
        status = "imprecise"
    return SweepRow(
        s, r1sq, eta, t, sp, a,
        P_d=result.p_d, P_bc=result.p_bc, P=result.p, F=f,
        mean_n=n, MQI=q, rel_MQI=q / n if n > 1e-9 else math.nan, status=status,
    )


def evaluate_point(config: SweepConfig, s: float, r1sq: float, eta: float) -> SweepRow:
    """One grid point; errors become a row with a status message instead of raising."""
    try:
        t1 = math.sqrt(1.0 - r1sq)
        etas = config.etas(eta)
        if config.fixed_target is not None:
            ft = config.fixed_target
            params = CircuitParams(s, t1, ft.t, *etas)
            res = run_circuit(params)
            f = fidelity(res.w_out, sscs_wigner(ft.target))
            return _metrics_row(s, r1sq, eta, ft.t, ft.s_prime, ft.alpha, res, f, "ok")
        opt = optimize_fidelity(s, t1, etas, config.optimizer)
        status = "ok" if opt.converged else "non_converged"
        return _metrics_row(s, r1sq, eta, opt.t, opt.s_prime, opt.alpha, opt.circuit, opt.fidelity, status)
    except Exception as exc:  # recorded per point, the sweep carries on
        msg = f"error: {type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
        return SweepRow(s, r1sq, eta, status=msg)


def run_sweep(config: SweepConfig) -> list[SweepRow]:
    points = config.points()
    if config.threads == 1:
        return [evaluate_point(config, *p) for p in points]
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        # map yields in submission order, which is grid order
        return list(pool.map(lambda p: evaluate_point(config, *p), points))


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.values())
    return buf.getvalue()


def write_csv(rows: Iterable[SweepRow], path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows))


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# field exports -------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid over (beta_r, beta_i)."""

    r_min: float = -4.0
    r_max: float = 4.0
    i_min: float = -4.0
    i_max: float = 4.0
    points: int = 101

    def __post_init__(self):
        vals = (self.r_min, self.r_max, self.i_min, self.i_max)
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError("grid bounds must be finite")
        if self.r_min >= self.r_max or self.i_min >= self.i_max:
            raise ConfigError("grid bounds must be increasing")
        if self.points < 2:
            raise ConfigError("grid needs at least two points per axis")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linspace(self.r_min, self.r_max, self.points), np.linspace(self.i_min, self.i_max, self.points)


def export_wigner_grid(w: GaussianMixture, grid: GridSpec | None = None, imag_tol: float = 1e-10) -> np.ndarray:
    """(beta_r, beta_i, W) triples, shape (points**2, 3), beta_i varying fastest.

    Raises if the evaluated field has an imaginary part above ``imag_tol``
    relative to its largest value, which would mean a broken mixture.
    """
    if w.modes != 1:
        raise ValueError("Wigner grids are exported for single-mode states only")
    grid = grid or GridSpec()
    br, bi = grid.axes()
    R, I = np.meshgrid(br, bi, indexing="ij")
    vals = w(np.stack([R, I], axis=-1))
    scale = max(float(np.abs(vals).max()), 1e-300)
    if np.abs(vals.imag).max() > imag_tol * scale:
        raise ArithmeticError("Wigner function has a non-negligible imaginary part")
    return np.column_stack([R.ravel(), I.ravel(), vals.real.ravel()])


def wigner_csv(table: np.ndarray) -> str:
    buf = io.StringIO()
    buf.write("beta_r,beta_i,W\n")
    for br, bi, w in table:
        buf.write(f"{br:.12g},{bi:.12g},{w:.12g}\n")
    return buf.getvalue()


def density_matrix_csv(rho: np.ndarray) -> str:
    buf = io.StringIO()
    buf.write("m,n,re,im\n")
    for m in range(rho.shape[0]):
        for n in range(rho.shape[1]):
            buf.write(f"{m},{n},{rho[m, n].real:.12g},{rho[m, n].imag:.12g}\n")
    return buf.getvalue()


def fixed_target_sizes(
    s_values: Sequence[float], r1sq: float, target: FixedTarget, eta: float = 1.0
) -> list[tuple[float, float, float]]:
    """(s, <n>, F) along an s grid in fixed-target mode."""
    out = []
    for s in s_values:
        res = run_circuit(CircuitParams.from_reflectance(s, r1sq, target.t, eta))
        out.append((float(s), mean_photon_number(res.w_out), fidelity(res.w_out, sscs_wigner(target.target))))
    return out
