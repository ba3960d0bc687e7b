import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from squeezedcat.phasespace import (
    VACUUM_COV,
    AffineMap,
    DegenerateCovariance,
    GaussianMixture,
    GaussianTerm,
    apply_affine,
    beam_splitter,
    embed,
    gaussian_eval,
    integrate_product,
    is_conjugation_closed,
    marginalize,
    overlap,
    single_mode_squeezer,
    total_integral,
    two_mode_squeezer,
)

from .quadrature import box_rule, integrate_2d, single_mode_rule

VAC = GaussianMixture.vacuum(1)


def random_cov(rng, dim, lo=0.1, hi=5.0):
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    return q @ np.diag(rng.uniform(lo, hi, dim)) @ q.T


def random_mixture(rng, modes, terms=3, complex_centers=True):
    dim = 2 * modes
    covs = np.stack([random_cov(rng, dim) for _ in range(terms)])
    centers = rng.normal(size=(terms, dim))
    if complex_centers:
        centers = centers + 1j * 0.3 * rng.normal(size=(terms, dim))
    weights = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    return GaussianMixture(weights, centers, covs)


# ---------------------------------------------------------------- evaluation


class TestEvaluation:
    def test_vacuum_at_origin(self):
        term = GaussianTerm(1.0, [0, 0], VACUUM_COV)
        assert gaussian_eval(term, [0, 0]) == pytest.approx(2 / np.pi, rel=1e-14)

    def test_vacuum_off_origin(self):
        term = GaussianTerm(1.0, [0, 0], VACUUM_COV)
        assert gaussian_eval(term, [1, 0]) == pytest.approx(2 / np.pi * np.exp(-2), rel=1e-14)

    def test_complex_point_continuation(self):
        # substituting beta_i = i y into (2/pi) exp(-2 beta_i^2) flips the sign of the exponent
        y = 1.7 * np.exp(-0.33)
        val = gaussian_eval(GaussianTerm(1.0, [0, 0], VACUUM_COV), [0, 1j * y])
        assert val == pytest.approx(2 / np.pi * np.exp(2 * y * y), rel=1e-13)
        assert abs(val.imag) < 1e-14

    def test_mixture_matches_terms(self):
        rng = np.random.default_rng(1)
        mix = random_mixture(rng, 2)
        x = rng.normal(size=4)
        assert mix(x) == pytest.approx(sum(gaussian_eval(t, x) for t in mix.terms), rel=1e-12)

    def test_batch_evaluation_shape(self):
        pts = np.zeros((3, 5, 2))
        assert VAC(pts).shape == (3, 5)

    def test_singular_cov_rejected(self):
        with pytest.raises(DegenerateCovariance):
            GaussianTerm(1.0, [0, 0], np.diag([1.0, 0.0]))
        with pytest.raises(DegenerateCovariance):
            GaussianMixture.gaussian(np.diag([1.0, 1e-14]))

    def test_asymmetric_cov_rejected(self):
        with pytest.raises(DegenerateCovariance):
            GaussianMixture.gaussian(np.array([[1.0, 0.1], [0.0, 1.0]]))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            GaussianTerm(1.0, [0, 0, 0], VACUUM_COV)
        with pytest.raises(ValueError):
            VAC(np.zeros(4))

    def test_immutable(self):
        with pytest.raises(ValueError):
            VAC.weights[0] = 2.0


# -------------------------------------------------------------- affine maps


class TestAffine:
    def test_single_mode_squeeze(self):
        s = 0.4
        out = apply_affine(VAC, AffineMap(single_mode_squeezer(s)))
        np.testing.assert_allclose(out.covs[0], np.diag([np.exp(-2 * s), np.exp(2 * s)]) / 4, atol=1e-15)

    @pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
    def test_beam_splitter_keeps_two_vacua(self, t):
        out = apply_affine(GaussianMixture.vacuum(2), AffineMap(beam_splitter(t)))
        np.testing.assert_allclose(out.covs[0], np.eye(4) / 4, atol=1e-15)

    def test_two_mode_squeezer_covariance(self):
        s = 0.3
        out = apply_affine(GaussianMixture.vacuum(2), AffineMap(two_mode_squeezer(s)))
        expected = np.block(
            [
                [np.cosh(2 * s) / 4 * np.eye(2), np.sinh(2 * s) / 4 * np.diag([1, -1])],
                [np.sinh(2 * s) / 4 * np.diag([1, -1]), np.cosh(2 * s) / 4 * np.eye(2)],
            ]
        )
        np.testing.assert_allclose(out.covs[0], expected, atol=1e-15)

    def test_maps_are_symplectic(self):
        J = np.kron(np.eye(2), np.array([[0, 1], [-1, 0]]))
        for S in (two_mode_squeezer(0.7), beam_splitter(0.3), embed(single_mode_squeezer(0.2), [1], 2)):
            np.testing.assert_allclose(S @ J @ S.T, J, atol=1e-13)

    def test_shift_moves_centers(self):
        out = apply_affine(VAC, AffineMap(np.eye(2), [0.5, -1.0]))
        np.testing.assert_allclose(out.centers[0], [0.5, -1.0])

    def test_function_substitution(self):
        # forward push means W_out(x) = W_in(A^{-1} x) for det A = 1
        rng = np.random.default_rng(2)
        mix = random_mixture(rng, 1)
        A = single_mode_squeezer(0.3) @ np.array([[np.cos(0.4), -np.sin(0.4)], [np.sin(0.4), np.cos(0.4)]])
        out = apply_affine(mix, AffineMap(A))
        x = rng.normal(size=(6, 2))
        np.testing.assert_allclose(out(x), mix(x @ np.linalg.inv(A).T), rtol=1e-11)

    def test_singular_map_rejected(self):
        with pytest.raises(ValueError):
            AffineMap(np.zeros((2, 2)))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply_affine(VAC, AffineMap(np.eye(4)))


# ----------------------------------------------------------- marginalization


class TestMarginalize:
    def test_tmsv_marginal_is_thermal(self):
        s = 0.25
        tmsv = apply_affine(GaussianMixture.vacuum(2), AffineMap(two_mode_squeezer(s)))
        m = marginalize(tmsv, [0])
        np.testing.assert_allclose(m.covs[0], np.cosh(2 * s) / 4 * np.eye(2), atol=1e-15)

    def test_product_marginal(self):
        rng = np.random.default_rng(3)
        a = GaussianMixture.gaussian(random_cov(rng, 2), [0.3, 0.1])
        b = GaussianMixture.gaussian(random_cov(rng, 2), [-1.0, 2.0])
        m = marginalize(a.tensor(b), [1])
        np.testing.assert_allclose(m.covs, b.covs, atol=1e-15)
        np.testing.assert_allclose(m.centers, b.centers, atol=1e-15)

    def test_keep_all_is_identity(self):
        mix = random_mixture(np.random.default_rng(4), 2)
        m = marginalize(mix, [0, 1])
        np.testing.assert_array_equal(m.covs, mix.covs)
        np.testing.assert_array_equal(m.centers, mix.centers)

    def test_reorders(self):
        mix = random_mixture(np.random.default_rng(5), 2)
        m = marginalize(mix, [1, 0])
        np.testing.assert_array_equal(m.centers[:, :2], mix.centers[:, 2:])

    def test_empty_keep_rejected(self):
        with pytest.raises(ValueError):
            marginalize(GaussianMixture.vacuum(2), [])

    def test_against_quadrature(self):
        rng = np.random.default_rng(6)
        mix = random_mixture(rng, 2, terms=2)
        m = marginalize(mix, [0])
        x, w = box_rule(-12, 12, 140)
        X, Y = np.meshgrid(x, x, indexing="ij")
        W = np.outer(w, w)
        for xa in rng.normal(size=(3, 2)):
            pts = np.stack([np.full_like(X, xa[0]), np.full_like(X, xa[1]), X, Y], axis=-1)
            quad = np.sum(W * mix(pts))
            assert m(xa) == pytest.approx(quad, rel=1e-7, abs=1e-12)

    def test_commutes_with_block_diagonal_map(self):
        rng = np.random.default_rng(7)
        mix = random_mixture(rng, 3)
        A0 = single_mode_squeezer(0.2)
        A12 = beam_splitter(0.6) @ two_mode_squeezer(0.1)
        full = np.zeros((6, 6))
        full[:2, :2] = A0
        full[2:, 2:] = A12
        left = marginalize(apply_affine(mix, AffineMap(full)), [1, 2])
        right = apply_affine(marginalize(mix, [1, 2]), AffineMap(A12))
        np.testing.assert_allclose(left.covs, right.covs, atol=1e-12)
        np.testing.assert_allclose(left.centers, right.centers, atol=1e-12)


# -------------------------------------------------------- product integration


class TestIntegrateProduct:
    def test_vacuum_total(self):
        assert total_integral(VAC) == pytest.approx(1.0)

    def test_vacuum_purity(self):
        out = integrate_product(VAC, VAC)
        assert out.modes == 0
        assert np.pi * total_integral(out) == pytest.approx(1.0, rel=1e-14)

    def test_tmsv_against_vacuum_projector(self):
        # pi int W_ad W_vac(beta_d) integrates to sech^2 s
        s = 0.3
        tmsv = apply_affine(GaussianMixture.vacuum(2), AffineMap(two_mode_squeezer(s)))
        out = integrate_product(tmsv, VAC.scale(np.pi), [1])
        assert total_integral(out).real == pytest.approx(1 / np.cosh(s) ** 2, rel=1e-13)

    def test_conditioning_matches_quadrature(self):
        rng = np.random.default_rng(8)
        a = random_mixture(rng, 2, terms=2)
        b = random_mixture(rng, 1, terms=2)
        out = integrate_product(a, b, [1])
        nodes, weights = single_mode_rule(12.0, 160)
        for xk in rng.normal(size=(3, 2)):
            pts = np.concatenate([np.broadcast_to(xk, nodes.shape), nodes], axis=-1)
            quad = np.sum(weights * a(pts) * b(nodes))
            assert out(xk) == pytest.approx(quad, rel=1e-7, abs=1e-12)

    def test_conditioning_first_mode(self):
        rng = np.random.default_rng(9)
        a = random_mixture(rng, 2, terms=1, complex_centers=False)
        b = random_mixture(rng, 1, terms=1, complex_centers=False)
        swap = embed(np.eye(4)[[2, 3, 0, 1]], [0, 1], 2)
        direct = integrate_product(a, b, [0])
        via_swap = integrate_product(apply_affine(a, AffineMap(swap)), b, [1])
        x = rng.normal(size=2)
        assert direct(x) == pytest.approx(via_swap(x), rel=1e-12)

    def test_single_term_overlap_quadrature(self):
        rng = np.random.default_rng(10)
        for _ in range(5):
            a = random_mixture(rng, 1, terms=1)
            b = random_mixture(rng, 1, terms=1)
            quad = integrate_2d(lambda x: a(x) * b(x), half_width=14.0, n=200)
            assert overlap(a, b) == pytest.approx(quad, rel=1e-7)

    def test_four_dimensional_total(self):
        # 4D Gauss-Legendre on a 2-mode term with a complex center still integrates to the weight
        rng = np.random.default_rng(11)
        cov = random_cov(rng, 4, 0.2, 1.0)
        mix = GaussianMixture.gaussian(cov, [0.2, 0.1j, -0.3, 0.05j], weight=0.7)
        x, w = box_rule(-6.5, 6.5, 36)
        grids = np.meshgrid(x, x, x, x, indexing="ij")
        W = np.einsum("i,j,k,l->ijkl", w, w, w, w)
        quad = np.sum(W * mix(np.stack(grids, axis=-1)))
        assert quad == pytest.approx(0.7, rel=1e-7)
        assert total_integral(mix) == pytest.approx(0.7)

    def test_singular_block_rejected(self):
        # a partner with covariance -V0 cancels the vacuum block exactly
        bad = GaussianMixture._trusted(np.array([1.0]), np.zeros((1, 2)), -VACUUM_COV[None])
        with pytest.raises(DegenerateCovariance):
            integrate_product(VAC, bad)

    def test_mode_validation(self):
        with pytest.raises(ValueError):
            integrate_product(GaussianMixture.vacuum(2), VAC, [2])
        with pytest.raises(ValueError):
            integrate_product(GaussianMixture.vacuum(2), VAC, [0, 1])


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    modes=st.integers(2, 3),
    terms_a=st.integers(1, 3),
    terms_b=st.integers(1, 3),
)
def test_fubini(seed, modes, terms_a, terms_b):
    """Partial integration then total equals integrating the product of the marginal."""
    rng = np.random.default_rng(seed)
    a = random_mixture(rng, modes, terms_a)
    b = random_mixture(rng, 1, terms_b)
    mode = int(rng.integers(0, modes))
    partial = total_integral(integrate_product(a, b, [mode]))
    full = total_integral(integrate_product(marginalize(a, [mode]), b))
    assert abs(partial - full) <= 1e-10 * max(1.0, abs(full))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_conjugation_closure_survives_pipeline(seed):
    rng = np.random.default_rng(seed)
    cov = random_cov(rng, 4, 0.2, 2.0)
    mu = rng.normal(size=4) * 1j
    w = rng.normal()
    herm = GaussianMixture(np.array([w, w]), np.stack([mu, mu.conj()]), np.stack([cov, cov]))
    assert is_conjugation_closed(herm)
    moved = apply_affine(herm, AffineMap(beam_splitter(rng.uniform(0.1, 0.9))))
    assert is_conjugation_closed(moved)
    cond = integrate_product(moved, GaussianMixture.vacuum(1), [1])
    assert is_conjugation_closed(cond)
    vals = cond(rng.normal(size=(5, 2)))
    assert np.all(np.abs(vals.imag) <= 1e-10 * np.abs(vals).max())


# -------------------------------------------------------------- total integral


class TestTotalIntegral:
    def test_vacuum_difference(self):
        s = 0.1
        mix = VAC - VAC.scale(1 / np.cosh(s) ** 2)
        assert total_integral(mix).real == pytest.approx(np.tanh(s) ** 2, rel=1e-12)
        # 0.09967 is tanh(0.1) itself; the probability is its square
        assert total_integral(mix).real == pytest.approx(0.0099337, rel=1e-5)

    def test_fringe_pair(self):
        # cos(4 alpha beta_i) fringe: quadrature on a 12-sigma box
        alpha = 1.2
        pair = GaussianMixture(
            np.ones(2), np.array([[0, 1j * alpha], [0, -1j * alpha]]), np.broadcast_to(VACUUM_COV, (2, 2, 2))
        )
        quad = integrate_2d(lambda x: pair(x), half_width=6.0, n=160)
        assert quad.real == pytest.approx(2.0, rel=1e-10)
        assert total_integral(pair) == pytest.approx(2.0)

    def test_scalar(self):
        assert total_integral(GaussianMixture.scalar(0.25)) == 0.25


class TestMixtureAlgebra:
    def test_tensor_modes_and_weights(self):
        rng = np.random.default_rng(12)
        a = random_mixture(rng, 1, 2)
        b = random_mixture(rng, 2, 3)
        ab = a.tensor(b)
        assert ab.modes == 3 and len(ab) == 6
        x = rng.normal(size=6)
        assert ab(x) == pytest.approx(a(x[:2]) * b(x[2:]), rel=1e-12)

    def test_add_sub_scale(self):
        mix = VAC + VAC.scale(2.0) - VAC
        assert total_integral(mix) == pytest.approx(2.0)
        assert len(mix.simplify(0.5)) == 3

    def test_add_mode_mismatch(self):
        with pytest.raises(ValueError):
            VAC + GaussianMixture.vacuum(2)

    def test_conj_closure_detects_broken_pair(self):
        bad = GaussianMixture(np.array([1.0]), np.array([[0, 0.5j]]), VACUUM_COV[None])
        assert not is_conjugation_closed(bad)
        assert is_conjugation_closed(bad + bad.conj())

    def test_from_terms_round_trip(self):
        mix = random_mixture(np.random.default_rng(13), 2)
        again = GaussianMixture.from_terms(mix.terms)
        np.testing.assert_array_equal(again.centers, mix.centers)
        with pytest.raises(ValueError):
            GaussianMixture.from_terms([])
        assert len(GaussianMixture.from_terms([], modes=1)) == 0
