"""
Figures of merit for single-mode Gaussian-mixture states.

All quantities are closed forms over term pairs; the Fock matrix uses the
Husimi generating function of each term, so no quadrature is involved.

Quantities quadratic in W (purity, MQI) sum products of weights. Circuit
outputs are signed mixtures whose weights reach 1e8 or more while cancelling
to a normalized state, so the pairwise sum can lose every digit. Those two
functions carry a round-off bound and, when it is too loose, evaluate the same
closed form in the number basis, where the error is only linear in the
weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln

from .fock import FockMatrix, annihilation
from .phasespace import VACUUM_COV, GaussianMixture, _gauss, overlap

MAX_FOCK_DIM = 20
# pairwise sums whose round-off bound exceeds this switch to the number basis
PAIRWISE_ATOL = 1e-9
# number-basis fallback refuses states with more than this much weight on the top two levels
TRUNCATION_ATOL = 1e-6
EPS = np.finfo(float).eps


def _single_mode(mix: GaussianMixture, what: str) -> None:
    if mix.modes != 1:
        raise ValueError(f"{what} needs a single-mode mixture, got {mix.modes} modes")


def fidelity(w_out: GaussianMixture, target: GaussianMixture) -> float:
    """pi * int W_out W_target, exact for a pure target.

    Negative round-off below 1e-12 is clamped to zero.
    """
    _single_mode(w_out, "fidelity")
    _single_mode(target, "fidelity")
    f = (np.pi * overlap(w_out, target)).real
    if -1e-12 < f < 0:
        f = 0.0
    return float(f)


def _pair_sum(terms: NDArray) -> tuple[float, float]:
    """Real part of a sum and a bound on its floating-point error."""
    return float(np.sum(terms).real), float(EPS * terms.size * np.abs(terms).sum())


def _number_basis(w: GaussianMixture, what: str) -> NDArray[np.complex128]:
    rho = fock_density_matrix(w, MAX_FOCK_DIM).entries
    # the trace deficit mixes truncation with round-off; the top levels isolate truncation
    edge = float(np.abs(np.diag(rho)[-2:]).sum())
    if edge > TRUNCATION_ATOL:
        raise ArithmeticError(
            f"{what}: pairwise sum is round-off dominated and the state reaches level {MAX_FOCK_DIM - 1} "
            f"with weight {edge:.1e}"
        )
    return rho


def purity(w: GaussianMixture) -> float:
    """pi * int W^2 for a single-mode mixture, Tr rho^2 in the number basis."""
    _single_mode(w, "purity")
    g = _gauss(w.covs[:, None] + w.covs[None, :], w.centers[:, None, :] - w.centers[None, :, :])
    val, err = _pair_sum(np.pi * w.weights[:, None] * w.weights[None, :] * g)
    if err <= PAIRWISE_ATOL:
        return val
    rho = _number_basis(w, "purity")
    return float(np.sum(np.abs(rho) ** 2))


def mean_photon_number(w: GaussianMixture) -> float:
    """<n> = <|beta|^2>_W - 1/2 with <|beta|^2> = sum_k w_k (tr V_k + mu_k . mu_k)."""
    _single_mode(w, "mean_photon_number")
    tr = np.trace(w.covs, axis1=1, axis2=2)
    mu2 = np.einsum("ki,ki->k", w.centers, w.centers)
    return float((np.sum(w.weights * (tr + mu2)) - 0.5).real)


def mqi(w: GaussianMixture) -> float:
    """(pi/2) int W [-d^2/(d beta d beta*) - 1] W, with d^2/(d beta d beta*) = Laplacian / 4.

    For a pair of terms g_i, g_j the Laplacian of g_j is
    [(x - mu_j)^T P_j^2 (x - mu_j) - tr P_j] g_j with P_j = V_j^{-1}; the
    product g_i g_j is W_{V_i+V_j}(mu_i - mu_j) times a Gaussian of covariance
    (P_i + P_j)^{-1}, whose second moment closes the integral.
    """
    _single_mode(w, "mqi")
    P = np.linalg.inv(w.covs)  # (n, 2, 2)
    Pi, Pj = P[:, None], P[None, :]
    sigma = np.linalg.inv(Pi + Pj)
    mi, mj = w.centers[:, None, :], w.centers[None, :, :]
    m = np.einsum("abij,abj->abi", sigma, np.einsum("abij,abj->abi", np.broadcast_to(Pi, sigma.shape), mi)
                  + np.einsum("abij,abj->abi", np.broadcast_to(Pj, sigma.shape), mj))
    pref = _gauss(w.covs[:, None] + w.covs[None, :], mi - mj)  # int g_i g_j
    Pj2 = np.broadcast_to(Pj @ Pj, sigma.shape)
    d = m - mj
    second = np.einsum("abij,abji->ab", Pj2, sigma) + np.einsum("abi,abij,abj->ab", d, Pj2, d)
    trP = np.broadcast_to(np.trace(Pj, axis1=2, axis2=3), second.shape)
    lap = pref * (second - trP)  # int g_i Laplacian(g_j)
    ww = w.weights[:, None] * w.weights[None, :]
    val, err = _pair_sum(np.pi / 2 * ww * (-0.25 * lap - pref))
    if err <= PAIRWISE_ATOL:
        return val
    return _mqi_number_basis(_number_basis(w, "mqi"))


def _mqi_number_basis(rho: NDArray[np.complex128]) -> float:
    """(||[a, rho]||^2 - ||rho||^2) / 2.

    [a, rho] has Wigner function dW/d beta*, so integrating the derivative by
    parts turns the phase-space form into this trace. The last row of a rho
    needs a level beyond the truncation; [a, rho] is anti-Hermitian, so that row
    is taken from the last column instead.
    """
    dim = rho.shape[0]
    a = annihilation(dim)
    c = a @ rho - rho @ a
    c[-1, :] = -np.conj(c[:, -1])
    return float(0.5 * (np.sum(np.abs(c) ** 2) - np.sum(np.abs(rho) ** 2)))


def relative_mqi(w: GaussianMixture) -> float:
    n = mean_photon_number(w)
    if n <= 1e-9:
        return float("nan")
    return mqi(w) / n


def _husimi_coefficients(weight: complex, center: NDArray, cov: NDArray, dim: int) -> NDArray[np.complex128]:
    """<m|rho|n> for one term rho with Wigner function weight * W_cov(x - center).

    pi e^{|g|^2} Q(g) = sum_{mn} <m|rho|n> g*^m g^n / sqrt(m! n!), and Q is the
    Gaussian W_{cov + V0}(x - center). Treating (g, g*) as independent variables
    the left side is c exp(-z^T K z / 2 + L.z), whose Taylor coefficients follow
    from first-order recurrences.
    """
    Q = np.linalg.inv(cov + VACUUM_COV)
    # x = T @ (g, g*)
    T = np.array([[0.5, 0.5], [-0.5j, 0.5j]])
    K = T.T @ Q @ T - np.array([[0.0, 1.0], [1.0, 0.0]])
    L = center @ Q @ T
    c0 = np.pi * weight * _gauss(cov + VACUUM_COV, -center)
    # g[m, n]: coefficient of g*^m g^n; index 0 of K/L is g, index 1 is g*
    g = np.zeros((dim, dim), dtype=complex)
    g[0, 0] = c0
    for n in range(dim - 1):
        prev = g[0, n - 1] if n >= 1 else 0.0
        g[0, n + 1] = (-K[0, 0] * prev + L[0] * g[0, n]) / (n + 1)
    for m in range(dim - 1):
        for n in range(dim):
            acc = L[1] * g[m, n]
            if n >= 1:
                acc -= K[1, 0] * g[m, n - 1]
            if m >= 1:
                acc -= K[1, 1] * g[m - 1, n]
            g[m + 1, n] = acc / (m + 1)
    k = np.arange(dim)
    lf = 0.5 * gammaln(k + 1)
    return g * np.exp(lf[:, None] + lf[None, :])


def fock_density_matrix(w: GaussianMixture, dim: int = 16) -> FockMatrix:
    """rho_{mn} = <m|rho|n> in the number basis, truncated to ``dim`` levels."""
    _single_mode(w, "fock_density_matrix")
    if not 1 <= dim <= MAX_FOCK_DIM:
        raise ValueError(f"dim must lie in [1, {MAX_FOCK_DIM}], got {dim}")
    rho = np.zeros((dim, dim), dtype=complex)
    for wt, mu, cov in zip(w.weights, w.centers, w.covs):
        rho += _husimi_coefficients(wt, mu, cov, dim)
    return FockMatrix(rho)


@dataclass(frozen=True)
class MetricsReport:
    fidelity: float
    mean_n: float
    mqi: float
    relative_mqi: float
    rho_fock: FockMatrix

    def as_dict(self, with_rho: bool = False) -> dict:
        out = {
            "fidelity": self.fidelity,
            "mean_n": self.mean_n,
            "mqi": self.mqi,
            "relative_mqi": self.relative_mqi,
        }
        if with_rho:
            out["rho_fock_real"] = self.rho_fock.entries.real.tolist()
            out["rho_fock_imag"] = self.rho_fock.entries.imag.tolist()
        return out


def metrics_report(w: GaussianMixture, target: GaussianMixture, dim: int = 16) -> MetricsReport:
    n = mean_photon_number(w)
    q = mqi(w)
    return MetricsReport(
        fidelity=fidelity(w, target),
        mean_n=n,
        mqi=q,
        relative_mqi=q / n if n > 1e-9 else float("nan"),
        rho_fock=fock_density_matrix(w, dim),
    )
