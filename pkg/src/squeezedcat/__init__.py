"""Phase-space simulation of conditional squeezed cat-state generation."""

from .circuit import CircuitParams, CircuitResult, herald_single_photon, run_circuit
from .fock import run_circuit_fock
from .metrics import fidelity, fock_density_matrix, mean_photon_number, metrics_report, mqi, purity, relative_mqi
from .optimize import OptimizerSettings, Optimum, max_size_at_fidelity, optimize_fidelity
from .phasespace import AffineMap, DegenerateCovariance, GaussianMixture, GaussianTerm
from .states import TargetSpec, click_povm, off_povm, scs_wigner, sscs_wigner
from .sweep import GridSpec, SweepConfig, export_wigner_grid, run_sweep

__all__ = [
    "AffineMap",
    "CircuitParams",
    "CircuitResult",
    "DegenerateCovariance",
    "GaussianMixture",
    "GaussianTerm",
    "GridSpec",
    "OptimizerSettings",
    "Optimum",
    "SweepConfig",
    "TargetSpec",
    "click_povm",
    "export_wigner_grid",
    "fidelity",
    "fock_density_matrix",
    "herald_single_photon",
    "max_size_at_fidelity",
    "mean_photon_number",
    "metrics_report",
    "mqi",
    "off_povm",
    "optimize_fidelity",
    "purity",
    "relative_mqi",
    "run_circuit",
    "run_circuit_fock",
    "run_sweep",
    "scs_wigner",
    "sscs_wigner",
]
