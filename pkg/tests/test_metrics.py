import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from squeezedcat.circuit import CircuitParams, herald_single_photon, run_circuit
from squeezedcat.fock import fock_wigner_kernel
from squeezedcat.metrics import (
    MAX_FOCK_DIM,
    fidelity,
    fock_density_matrix,
    mean_photon_number,
    metrics_report,
    mqi,
    purity,
    relative_mqi,
)
from squeezedcat.phasespace import AffineMap, GaussianMixture, apply_affine, single_mode_squeezer
from squeezedcat.states import TargetSpec, coherent, scs_fock, sscs_wigner, thermal, vacuum

from .quadrature import single_mode_rule


def mqi_quadrature(w, half_width=8.0, n=300, h=1e-4):
    """(pi/2) [int |grad W|^2 / 4 - int W^2], the integrated-by-parts form, with central differences."""
    x, wt = single_mode_rule(half_width, n)
    f = lambda p: w(p).real
    gx = (f(x + [h, 0]) - f(x - [h, 0])) / (2 * h)
    gy = (f(x + [0, h]) - f(x - [0, h])) / (2 * h)
    return np.pi / 2 * (0.25 * np.sum(wt * (gx**2 + gy**2)) - np.sum(wt * f(x) ** 2))


def rotation(phi):
    return np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])


OUTPUT = run_circuit(CircuitParams.from_reflectance(0.16, 0.001, 0.1)).w_out
LOSSY = run_circuit(CircuitParams.from_reflectance(0.2, 0.001, 0.3, 0.1)).w_out


class TestFidelity:
    def test_vacuum(self):
        assert fidelity(vacuum(), vacuum()) == pytest.approx(1.0, abs=1e-14)

    def test_coherent_overlap(self):
        assert fidelity(coherent(0.5), coherent(-0.3j)) == pytest.approx(np.exp(-abs(0.5 + 0.3j) ** 2), rel=1e-12)

    def test_symmetric_for_pure_states(self):
        a = sscs_wigner(TargetSpec(1.2, 0.2, "odd"))
        b = sscs_wigner(TargetSpec(1.5, 0.4, "odd"))
        assert fidelity(a, b) == pytest.approx(fidelity(b, a), abs=1e-14)

    @pytest.mark.parametrize("phi", [0.3, 1.1, 2.0])
    def test_rotation_invariant(self, phi):
        target = sscs_wigner(TargetSpec(1.7, 0.33, "odd"))
        rot = AffineMap(rotation(phi))
        assert fidelity(apply_affine(OUTPUT, rot), apply_affine(target, rot)) == pytest.approx(
            fidelity(OUTPUT, target), abs=1e-9
        )

    @pytest.mark.parametrize("seed", range(10))
    def test_against_fock_overlaps(self, seed):
        # heralded state is diagonal: p_n = (1 - x) x^n / x for n >= 1 with x = tanh^2 s
        rng = np.random.default_rng(seed)
        spec = TargetSpec(rng.uniform(0.3, 2.5), rng.uniform(-0.5, 0.6), "odd")
        s = 0.3
        w, _ = herald_single_photon(s)
        x = math.tanh(s) ** 2
        n = np.arange(40)
        p = np.where(n >= 1, (1 - x) * x**n / x, 0.0)
        amps = scs_fock(spec, 40).amps
        expected = float(np.sum(p * np.abs(amps) ** 2))
        assert fidelity(w, sscs_wigner(spec)) == pytest.approx(expected, abs=1e-8)

    def test_mode_mismatch(self):
        with pytest.raises(ValueError):
            fidelity(GaussianMixture.vacuum(2), vacuum())


class TestMeanPhotonNumber:
    def test_thermal(self):
        assert mean_photon_number(thermal(0.5)) == pytest.approx(0.5, abs=1e-14)

    def test_coherent(self):
        assert mean_photon_number(coherent(1.1 - 0.4j)) == pytest.approx(abs(1.1 - 0.4j) ** 2, rel=1e-13)

    def test_squeezed_vacuum(self):
        r = 0.4
        w = apply_affine(vacuum(), AffineMap(single_mode_squeezer(r)))
        assert mean_photon_number(w) == pytest.approx(math.sinh(r) ** 2, rel=1e-13)

    @pytest.mark.parametrize("w", [OUTPUT, LOSSY], ids=["ideal", "lossy"])
    def test_matches_number_basis(self, w):
        rho = fock_density_matrix(w, MAX_FOCK_DIM)
        assert rho.mean_photon_number() == pytest.approx(mean_photon_number(w), abs=1e-6)


class TestMQI:
    def test_vacuum(self):
        assert abs(mqi(vacuum())) < 1e-9

    @pytest.mark.parametrize("alpha", [0.5, 1.7 - 0.8j, 3.0j])
    def test_coherent(self, alpha):
        assert abs(mqi(coherent(alpha))) < 1e-7

    def test_coherent_quadrature(self):
        assert abs(mqi_quadrature(coherent(0.9 + 0.2j))) < 1e-7

    def test_odd_sscs_saturates_bound(self):
        w = sscs_wigner(TargetSpec(1.7, 0.33, "odd"))
        assert mqi(w) / mean_photon_number(w) == pytest.approx(1.0, abs=1e-6)
        assert mqi_quadrature(w) / mean_photon_number(w) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize(
        "w",
        [
            thermal(0.5),
            apply_affine(vacuum(), AffineMap(single_mode_squeezer(0.5))),
            sscs_wigner(TargetSpec(1.2, 0.1, "even")),
            OUTPUT,
            LOSSY,
        ],
        ids=["thermal", "squeezed", "even-cat", "output", "lossy-output"],
    )
    def test_against_quadrature(self, w):
        assert mqi(w) == pytest.approx(mqi_quadrature(w), abs=1e-6)

    def test_thermal_state_is_incoherent(self):
        # a mixture of number states carries no interference; MQI is negative
        assert mqi(thermal(0.5)) < 0

    @given(
        s=st.floats(0.02, 0.3),
        r1sq=st.sampled_from([0.001, 0.01, 0.1]),
        t=st.floats(0.03, 0.97),
        eta=st.floats(0.1, 1.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_bounded_by_mean_number(self, s, r1sq, t, eta):
        res = run_circuit(CircuitParams.from_reflectance(s, r1sq, t, eta))
        # some draws sit on the cancellation floor (precision up to ~1e-5); the bound holds to that floor
        assert mqi(res.w_out) <= mean_photon_number(res.w_out) + max(1e-6, 10 * res.precision)

    def test_relative_mqi_decreases_with_s(self):
        grid = np.linspace(0.02, 0.3, 8)
        rel = [relative_mqi(run_circuit(CircuitParams.from_reflectance(s, 0.001, 0.1)).w_out) for s in grid]
        assert np.all(np.diff(rel) < 0)

    def test_relative_mqi_undefined_for_vacuum(self):
        assert math.isnan(relative_mqi(vacuum()))


class TestPurity:
    def test_pure_target(self):
        assert purity(sscs_wigner(TargetSpec(2.0, 0.3, "odd"))) == pytest.approx(1.0, abs=1e-12)

    def test_thermal(self):
        # Tr rho^2 = 1 / (2 nbar + 1)
        assert purity(thermal(0.5)) == pytest.approx(0.5, rel=1e-13)

    def test_amplified_output_uses_number_basis(self):
        # the pairwise sum is hopeless here (weights ~1e8); the fallback must still be exact
        rho = fock_density_matrix(LOSSY, MAX_FOCK_DIM).entries
        assert purity(LOSSY) == pytest.approx(float(np.sum(np.abs(rho) ** 2)), abs=1e-12)
        assert 0 < purity(LOSSY) < 1


class TestDensityMatrix:
    def test_against_kernel_quadrature(self):
        x, wt = single_mode_rule(8.0, 260)
        beta = x[:, 0] + 1j * x[:, 1]
        wv = OUTPUT(x).real
        rho = fock_density_matrix(OUTPUT, 6).entries
        for m, n in [(1, 1), (3, 3), (3, 1), (1, 3), (5, 1), (2, 2)]:
            ref = np.pi * np.sum(wt * wv * fock_wigner_kernel(n, m, beta))
            assert rho[m, n] == pytest.approx(ref, abs=1e-8)

    def test_single_photon_limit(self):
        w, _ = herald_single_photon(1e-3)
        rho = np.abs(fock_density_matrix(w, 8).entries)
        assert rho[1, 1] >= 0.999
        rest = rho.copy()
        rest[1, 1] = 0
        assert rest.max() <= 1e-3

    def test_output_structure(self):
        rho = np.abs(fock_density_matrix(OUTPUT, 16).entries)
        top = {tuple(sorted(ix)) for ix in np.argwhere(rho >= np.sort(rho.ravel())[-4])}
        assert top <= {(1, 1), (3, 3), (1, 3)}
        # even <-> odd coherences vanish, but the herald cannot tell one photon from two, so the
        # two-photon branch leaves an incoherent |2> population of several percent
        assert rho[0::2, 1::2].max() < 1e-12 * rho.max()
        assert rho[2, 2] > 0.05

    @pytest.mark.parametrize("w", [OUTPUT, LOSSY, sscs_wigner(TargetSpec(1.7, 0.33, "odd"))])
    def test_trace_and_hermiticity(self, w):
        rho = fock_density_matrix(w, 16)
        assert rho.is_hermitian(atol=1e-9)
        assert rho.trace.real == pytest.approx(1.0, abs=1e-6)

    def test_parity_at_origin(self):
        rho = fock_density_matrix(OUTPUT, MAX_FOCK_DIM)
        assert rho.wigner_at_origin() == pytest.approx(OUTPUT([0.0, 0.0]).real, abs=1e-6)

    @pytest.mark.parametrize("dim", [0, MAX_FOCK_DIM + 1])
    def test_dim_limits(self, dim):
        with pytest.raises(ValueError):
            fock_density_matrix(OUTPUT, dim)


class TestReport:
    def test_fields(self):
        target = sscs_wigner(TargetSpec(1.7, 0.33, "odd"))
        rep = metrics_report(OUTPUT, target)
        assert rep.fidelity == pytest.approx(fidelity(OUTPUT, target))
        assert rep.relative_mqi == pytest.approx(rep.mqi / rep.mean_n)
        d = rep.as_dict(with_rho=True)
        assert len(d["rho_fock_real"]) == 16
        assert "rho_fock_real" not in rep.as_dict()
