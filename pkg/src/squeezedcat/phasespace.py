"""
Complex-weighted Gaussian mixtures over multimode phase space.

Conventions: each mode contributes the pair (beta_r, beta_i), modes are
interleaved in order, and the vacuum covariance is ``I/4`` so that

    W_vac(beta) = (2/pi) exp(-2 |beta|^2).

A mixture term is ``weight * W_V(x - mu)`` with the normalized Gaussian
``W_V(x) = exp(-x^T V^{-1} x / 2) / sqrt(det(2 pi V))``. Weights and centers
may be complex (the interference fringe of a cat state is a conjugate pair of
imaginary-displaced Gaussians); covariances are always real.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

VACUUM_COV = np.eye(2) / 4.0

# reject covariances with min eigenvalue below this fraction of the max one
PD_RTOL = 1e-12
SYM_ATOL = 1e-12


class DegenerateCovariance(ValueError):
    """A covariance (or a sum formed during conditioning) is not positive definite."""


def _check_covariances(covs: NDArray[np.float64]) -> None:
    if covs.size == 0:
        return
    scale = max(1.0, float(np.abs(covs).max()))
    if np.abs(covs - np.swapaxes(covs, -1, -2)).max() > SYM_ATOL * scale:
        raise DegenerateCovariance("covariance matrix is not symmetric")
    eig = np.linalg.eigvalsh(covs)
    lo, hi = eig[..., 0], eig[..., -1]
    if np.any(lo <= PD_RTOL * hi) or np.any(hi <= 0):
        raise DegenerateCovariance(f"covariance is not positive definite (min eigenvalue {lo.min():.3e})")


def _log_norm(covs: NDArray[np.float64]) -> NDArray[np.float64]:
    """log of 1/sqrt(det(2 pi V)) for a stack of covariances."""
    dim = covs.shape[-1]
    if dim == 0:
        return np.zeros(covs.shape[:-2])
    sign, logdet = np.linalg.slogdet(covs)
    if np.any(sign <= 0):
        raise DegenerateCovariance("covariance has non-positive determinant")
    return -0.5 * (dim * np.log(2 * np.pi) + logdet)


def _gauss(covs: NDArray[np.float64], diffs: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Normalized Gaussians W_V(d) for stacked V (..., D, D) and d (..., D)."""
    if covs.shape[-1] == 0:
        return np.ones(diffs.shape[:-1], dtype=complex)
    sol = np.linalg.solve(covs, diffs[..., None])[..., 0]
    quad = np.einsum("...i,...i->...", diffs, sol)
    return np.exp(_log_norm(covs) - 0.5 * quad)


@dataclass(frozen=True, eq=False)
class GaussianTerm:
    """One weighted Gaussian ``weight * W_cov(x - center)``."""

    weight: complex
    center: NDArray[np.complex128]
    cov: NDArray[np.float64]

    def __post_init__(self):
        center = np.asarray(self.center, dtype=complex).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (center.size, center.size) or center.size % 2:
            raise ValueError(f"center of length {center.size} does not match covariance {cov.shape}")
        _check_covariances(cov)
        center.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "weight", complex(self.weight))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "cov", cov)

    @property
    def modes(self) -> int:
        return self.center.size // 2

    def __call__(self, point: ArrayLike) -> complex:
        return gaussian_eval(self, point)


def gaussian_eval(term: GaussianTerm, point: ArrayLike) -> complex:
    """Evaluate a single term, analytically continued to complex points."""
    x = np.asarray(point, dtype=complex).reshape(-1)
    if x.size != term.center.size:
        raise ValueError(f"point has length {x.size}, expected {term.center.size}")
    return complex(term.weight * _gauss(term.cov, x - term.center))


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """Finite complex combination of Gaussians over ``modes`` modes.

    Stored as stacked arrays: ``weights`` (n,), ``centers`` (n, 2M) and
    ``covs`` (n, 2M, 2M). Instances are immutable.
    """

    weights: NDArray[np.complex128]
    centers: NDArray[np.complex128]
    covs: NDArray[np.float64]

    def __post_init__(self):
        w = np.array(self.weights, dtype=complex).reshape(-1)
        covs = np.array(self.covs, dtype=float)
        n = w.size
        if covs.ndim != 3 or covs.shape[0] != n or covs.shape[1] != covs.shape[2] or covs.shape[1] % 2:
            raise ValueError(f"covs must have shape (n, 2M, 2M) with n={n}, got {covs.shape}")
        centers = np.array(self.centers, dtype=complex).reshape(n, covs.shape[1])
        _check_covariances(covs)
        for arr in (w, centers, covs):
            arr.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "covs", covs)

    @classmethod
    def _trusted(cls, weights, centers, covs) -> "GaussianMixture":
        # skips validation; only for arrays derived from already-validated mixtures
        obj = object.__new__(cls)
        for name, arr, dtype in (("weights", weights, complex), ("centers", centers, complex), ("covs", covs, float)):
            arr = np.array(arr, dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(obj, name, arr)
        return obj

    # construction -----------------------------------------------------

    @classmethod
    def gaussian(cls, cov: ArrayLike, center: ArrayLike | None = None, weight: complex = 1.0) -> "GaussianMixture":
        cov = np.asarray(cov, dtype=float)
        if center is None:
            center = np.zeros(cov.shape[0])
        return cls(np.array([weight]), np.asarray(center)[None, :], cov[None])

    @classmethod
    def from_terms(cls, terms: Sequence[GaussianTerm], modes: int | None = None) -> "GaussianMixture":
        if not terms:
            if modes is None:
                raise ValueError("empty mixture needs an explicit mode count")
            return cls(np.zeros(0), np.zeros((0, 2 * modes)), np.zeros((0, 2 * modes, 2 * modes)))
        dims = {t.center.size for t in terms}
        if len(dims) != 1:
            raise ValueError("all terms must share the same mode count")
        return cls(
            np.array([t.weight for t in terms]),
            np.stack([t.center for t in terms]),
            np.stack([t.cov for t in terms]),
        )

    @classmethod
    def vacuum(cls, modes: int = 1) -> "GaussianMixture":
        return cls.gaussian(np.eye(2 * modes) / 4.0)

    @classmethod
    def scalar(cls, value: complex) -> "GaussianMixture":
        """A zero-mode mixture holding a plain number."""
        return cls(np.array([value]), np.zeros((1, 0)), np.zeros((1, 0, 0)))

    # basic protocol ---------------------------------------------------

    @property
    def modes(self) -> int:
        return self.covs.shape[1] // 2

    @property
    def terms(self) -> list[GaussianTerm]:
        return [GaussianTerm(w, c, v) for w, c, v in zip(self.weights, self.centers, self.covs)]

    def __len__(self) -> int:
        return self.weights.size

    def __call__(self, points: ArrayLike) -> NDArray[np.complex128]:
        """Evaluate at one point (2M,) or a batch (..., 2M)."""
        x = np.asarray(points, dtype=complex)
        if x.shape[-1] != 2 * self.modes:
            raise ValueError(f"points must end in dimension {2 * self.modes}")
        out = np.zeros(x.shape[:-1], dtype=complex)
        flat = x.reshape(-1, x.shape[-1])
        acc = out.reshape(-1)
        for w, mu, cov in zip(self.weights, self.centers, self.covs):
            if self.modes == 0:
                acc += w
                continue
            d = flat - mu
            sol = np.linalg.solve(cov, d.T).T
            quad = np.einsum("ij,ij->i", d, sol)
            acc += w * np.exp(_log_norm(cov) - 0.5 * quad)
        return out if x.ndim > 1 else out.reshape(())[()]

    def scale(self, factor: complex) -> "GaussianMixture":
        return GaussianMixture._trusted(self.weights * factor, self.centers, self.covs)

    def __neg__(self) -> "GaussianMixture":
        return self.scale(-1.0)

    def __add__(self, other: "GaussianMixture") -> "GaussianMixture":
        if other.modes != self.modes:
            raise ValueError("cannot add mixtures over different mode counts")
        return GaussianMixture._trusted(
            np.concatenate([self.weights, other.weights]),
            np.concatenate([self.centers, other.centers]),
            np.concatenate([self.covs, other.covs]),
        )

    def __sub__(self, other: "GaussianMixture") -> "GaussianMixture":
        return self + (-other)

    def conj(self) -> "GaussianMixture":
        return GaussianMixture._trusted(self.weights.conj(), self.centers.conj(), self.covs)

    def tensor(self, other: "GaussianMixture") -> "GaussianMixture":
        """Product mixture with ``other``'s modes appended after this one's."""
        n, m = len(self), len(other)
        d1, d2 = 2 * self.modes, 2 * other.modes
        covs = np.zeros((n, m, d1 + d2, d1 + d2))
        covs[:, :, :d1, :d1] = self.covs[:, None]
        covs[:, :, d1:, d1:] = other.covs[None, :]
        centers = np.concatenate(
            [np.broadcast_to(self.centers[:, None], (n, m, d1)), np.broadcast_to(other.centers[None, :], (n, m, d2))],
            axis=-1,
        )
        weights = self.weights[:, None] * other.weights[None, :]
        return GaussianMixture(weights.reshape(-1), centers.reshape(n * m, -1), covs.reshape(n * m, d1 + d2, d1 + d2))

    def simplify(self, atol: float = 0.0) -> "GaussianMixture":
        """Drop terms whose |weight| is at most ``atol``."""
        keep = np.abs(self.weights) > atol
        return GaussianMixture._trusted(self.weights[keep], self.centers[keep], self.covs[keep])


@dataclass(frozen=True)
class AffineMap:
    """x -> matrix @ x + shift, acting on the stacked phase-space vector."""

    matrix: NDArray[np.float64]
    shift: NDArray[np.float64] | None = None

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("affine matrix must be square")
        if abs(np.linalg.det(mat)) <= 1e-12:
            raise ValueError("affine matrix is not invertible")
        shift = np.zeros(mat.shape[0]) if self.shift is None else np.asarray(self.shift, dtype=float)
        if shift.shape != (mat.shape[0],):
            raise ValueError("shift length does not match matrix")
        mat.setflags(write=False)
        shift.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "shift", shift)


def apply_affine(mix: GaussianMixture, amap: AffineMap) -> GaussianMixture:
    """Push a mixture forward through ``amap``: cov -> A V A^T, center -> A mu + b.

    The resulting function is ``W(A^{-1}(x - b)) / |det A|``; for symplectic
    maps the determinant is one and this is the argument substitution used
    for squeezers and beam splitters.
    """
    A = amap.matrix
    if A.shape[0] != 2 * mix.modes:
        raise ValueError(f"map acts on dimension {A.shape[0]}, mixture has {2 * mix.modes}")
    covs = A @ mix.covs @ A.T
    covs = 0.5 * (covs + np.swapaxes(covs, -1, -2))
    centers = mix.centers @ A.T + amap.shift
    return GaussianMixture(mix.weights, centers, covs)


def _quadrature_index(modes: Iterable[int]) -> NDArray[np.intp]:
    return np.array([2 * m + k for m in modes for k in (0, 1)], dtype=np.intp)


def marginalize(mix: GaussianMixture, keep: Sequence[int]) -> GaussianMixture:
    """Integrate out every mode not listed in ``keep`` (order of ``keep`` is kept)."""
    keep = list(keep)
    if not keep:
        raise ValueError("keep must name at least one mode")
    if len(set(keep)) != len(keep) or min(keep) < 0 or max(keep) >= mix.modes:
        raise ValueError(f"invalid mode subset {keep} for {mix.modes} modes")
    idx = _quadrature_index(keep)
    return GaussianMixture._trusted(mix.weights, mix.centers[:, idx], mix.covs[:, idx[:, None], idx[None, :]])


def integrate_product(
    mix_a: GaussianMixture, mix_b: GaussianMixture, modes: Sequence[int] | None = None
) -> GaussianMixture:
    """Integrate ``mix_a * mix_b`` over the modes of ``mix_b``.

    ``mix_b`` lives on the modes of ``mix_a`` listed in ``modes`` (default: the
    trailing ones). For each term pair the joint covariance ``V + 0 (+) V~``
    is formed; the surviving modes get its Schur complement and a center shifted
    by the regression on the offset ``nu - mu_J``, and the weight picks up the
    Gaussian factor ``W_{V_JJ + V~}(nu - mu_J)``. The result lives on the
    remaining modes of ``mix_a`` in their original order; when nothing remains
    it is a zero-mode (scalar) mixture.
    """
    if modes is None:
        modes = list(range(mix_a.modes - mix_b.modes, mix_a.modes))
    modes = list(modes)
    if len(modes) != mix_b.modes or len(set(modes)) != len(modes):
        raise ValueError("modes must list each mode of mix_b exactly once")
    if modes and (min(modes) < 0 or max(modes) >= mix_a.modes):
        raise ValueError(f"modes {modes} out of range for {mix_a.modes}-mode mixture")
    rest = [m for m in range(mix_a.modes) if m not in modes]
    J = _quadrature_index(modes)
    K = _quadrature_index(rest)

    na, nb = len(mix_a), len(mix_b)
    V = mix_a.covs
    S_jj = V[:, J[:, None], J[None, :]][:, None] + mix_b.covs[None, :]  # (na, nb, j, j)
    S_kj = np.broadcast_to(V[:, K[:, None], J[None, :]][:, None], (na, nb, K.size, J.size))
    S_kk = np.broadcast_to(V[:, K[:, None], K[None, :]][:, None], (na, nb, K.size, K.size))
    offset = mix_b.centers[None, :, :] - mix_a.centers[:, None, J]  # (na, nb, j)

    _check_covariances(S_jj.reshape(-1, J.size, J.size))
    factor = _gauss(S_jj, offset)
    weights = mix_a.weights[:, None] * mix_b.weights[None, :] * factor

    if K.size:
        gain = np.linalg.solve(S_jj, np.swapaxes(S_kj, -1, -2))  # S_jj^{-1} S_jk
        covs = S_kk - S_kj @ gain
        covs = 0.5 * (covs + np.swapaxes(covs, -1, -2))
        centers = mix_a.centers[:, None, K] + np.einsum("abkj,abj->abk", S_kj, np.linalg.solve(S_jj, offset[..., None])[..., 0])
    else:
        covs = np.zeros((na, nb, 0, 0))
        centers = np.zeros((na, nb, 0), dtype=complex)
    d = K.size
    return GaussianMixture(weights.reshape(-1), centers.reshape(na * nb, d), covs.reshape(na * nb, d, d))


def total_integral(mix: GaussianMixture) -> complex:
    """Integral over all of phase space.

    Each normalized Gaussian integrates to one even for a complex center (the
    contour can be shifted back to the real axis), so this is the weight sum.
    """
    return complex(mix.weights.sum())


def overlap(mix_a: GaussianMixture, mix_b: GaussianMixture) -> complex:
    """Full integral of the product of two mixtures over the same modes."""
    if mix_a.modes != mix_b.modes:
        raise ValueError("overlap needs mixtures over the same modes")
    covs = mix_a.covs[:, None] + mix_b.covs[None, :]
    diffs = mix_a.centers[:, None, :] - mix_b.centers[None, :, :]
    return complex(np.sum(mix_a.weights[:, None] * mix_b.weights[None, :] * _gauss(covs, diffs)))


def is_conjugation_closed(mix: GaussianMixture, rtol: float = 1e-10) -> bool:
    """True when the term set maps onto itself under (weight, center) -> conj.

    Matching is by nearest term after conjugation, so the check tolerates
    floating-point noise of relative size ``rtol``.
    """
    scale = max(1.0, float(np.abs(mix.weights).max(initial=0.0)))
    used = np.zeros(len(mix), dtype=bool)
    for i in range(len(mix)):
        wc, cc = np.conj(mix.weights[i]), np.conj(mix.centers[i])
        err = (
            np.abs(mix.weights - wc) / scale
            + np.abs(mix.centers - cc).max(axis=1, initial=0.0)
            + np.abs(mix.covs - mix.covs[i]).max(axis=(1, 2), initial=0.0)
        )
        err[used] = np.inf
        j = int(np.argmin(err))
        if err[j] > rtol * 10:
            return False
        used[j] = True
    return True


# symplectic building blocks ------------------------------------------------

_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_Z = np.diag([1.0, -1.0])


def single_mode_squeezer(s: float) -> NDArray[np.float64]:
    """diag(e^{-s}, e^{s}): s > 0 squeezes along the real axis."""
    return np.diag([np.exp(-s), np.exp(s)])


def two_mode_squeezer(s: float) -> NDArray[np.float64]:
    return np.cosh(s) * np.eye(4) + np.sinh(s) * np.kron(_X, _Z)


def beam_splitter(t: float) -> NDArray[np.float64]:
    """[[t, -r], [r, t]] (x) I with r = sqrt(1 - t^2)."""
    r = np.sqrt(1.0 - t * t)
    return np.kron(np.array([[t, -r], [r, t]]), np.eye(2))


def embed(matrix: ArrayLike, modes: Sequence[int], total_modes: int) -> NDArray[np.float64]:
    """Lift a map on ``modes`` to the identity-padded map on ``total_modes``."""
    matrix = np.asarray(matrix, dtype=float)
    idx = _quadrature_index(modes)
    if matrix.shape != (idx.size, idx.size):
        raise ValueError("matrix size does not match the listed modes")
    out = np.eye(2 * total_modes)
    out[idx[:, None], idx[None, :]] = matrix
    return out
