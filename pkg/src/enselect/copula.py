"""Gaussian-copula model of joint classifier errors.

Each model's error indicator is a thresholded latent standard normal;
pairwise latent correlations are recovered by matching empirical joint
error rates through the bivariate normal CDF (tetrachoric estimation),
and the assembled matrix is projected back onto the correlation cone.

Sampling is reproducible within this implementation: a numpy PCG64
generator seeded with the given seed draws the label column first
(integers), then the n x M standard-normal latent block in one call.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .data import Dataset, error_matrix
from .numerics import (
    bivariate_normal_cdf,
    std_normal_cdf,
    std_normal_quantile,
    symmetric_eigendecomposition,
)

__all__ = [
    "CLAMP_EPS",
    "EIG_EPS",
    "RHO_EPS",
    "CopulaModel",
    "EquicorrelatedSpec",
    "CopulaDiagnostics",
    "FrechetBoundWarning",
    "fit_marginals",
    "solve_tetrachoric",
    "fit_copula",
    "project_to_correlation",
    "sample",
    "sample_equicorrelated",
    "equicorrelated_model",
    "copula_diagnostics",
]

CLAMP_EPS = 1e-6  # floor/ceiling for marginal error rates before the quantile
EIG_EPS = 1e-6    # eigenvalue floor in the correlation projection
RHO_EPS = 1e-6    # keeps the tetrachoric bracket inside (-1, 1)


class FrechetBoundWarning(UserWarning):
    """A joint error rate violated the Frechet bounds and was clamped."""


@dataclass(frozen=True)
class CopulaModel:
    """Fitted latent-correlation error model.

    sigma: M x M correlation matrix (unit diagonal, PSD)
    thresholds: latent thresholds, one per model
    error_rates: marginal error probabilities, clamped away from 0 and 1
    """

    sigma: np.ndarray
    thresholds: np.ndarray
    error_rates: np.ndarray
    model_names: tuple[str, ...]

    def __post_init__(self):
        sigma = np.array(self.sigma, dtype=np.float64)
        thresholds = np.array(self.thresholds, dtype=np.float64)
        rates = np.array(self.error_rates, dtype=np.float64)
        names = tuple(str(n) for n in self.model_names)
        m = len(names)
        if sigma.shape != (m, m):
            raise ValueError("sigma shape must match the number of models")
        if thresholds.shape != (m,) or rates.shape != (m,):
            raise ValueError("thresholds and error_rates must have one entry per model")
        if np.max(np.abs(sigma - sigma.T)) > 1e-8:
            raise ValueError("sigma must be symmetric")
        if np.max(np.abs(np.diag(sigma) - 1.0)) > 1e-8:
            raise ValueError("sigma must have a unit diagonal")
        eigenvalues = np.linalg.eigvalsh((sigma + sigma.T) / 2.0)
        if eigenvalues.min() < -1e-8:
            raise ValueError("sigma must be positive semidefinite within 1e-8")
        if np.any(rates < CLAMP_EPS - 1e-12) or np.any(rates > 1 - CLAMP_EPS + 1e-12):
            raise ValueError("error rates must lie in the clamped open interval")
        if np.max(np.abs(thresholds - std_normal_quantile(rates))) > 1e-8:
            raise ValueError("thresholds must equal the normal quantile of the rates")
        for arr in (sigma, thresholds, rates):
            arr.flags.writeable = False
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "error_rates", rates)
        object.__setattr__(self, "model_names", names)

    @property
    def n_models(self) -> int:
        return len(self.model_names)

    def to_dict(self) -> dict:
        return {
            "format": 1,
            "model_names": list(self.model_names),
            "error_rates": self.error_rates.tolist(),
            "thresholds": self.thresholds.tolist(),
            "sigma": self.sigma.reshape(-1).tolist(),  # row-major
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, payload: dict) -> "CopulaModel":
        if payload.get("format") != 1:
            raise ValueError("unsupported copula model format")
        names = tuple(payload["model_names"])
        m = len(names)
        sigma = np.array(payload["sigma"], dtype=np.float64).reshape(m, m)
        return cls(sigma, payload["thresholds"], payload["error_rates"], names)

    @classmethod
    def from_json(cls, text: str) -> "CopulaModel":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class EquicorrelatedSpec:
    """One-factor pool: m models, shared latent correlation, common accuracy."""

    m: int
    rho: float
    alpha: float

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be positive")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if not 0.5 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (1/2, 1)")


@dataclass(frozen=True)
class CopulaDiagnostics:
    """Empirical-vs-model agreement summaries.

    pair_indices: the M(M-1)/2 (i, j) pairs, i < j
    pairwise_joint_*: joint error rate per pair
    simultaneous_error_hist_*: normalized frequency of exactly k models
        erring on the same row, k = 0..M
    """

    pair_indices: tuple[tuple[int, int], ...]
    pairwise_joint_empirical: np.ndarray
    pairwise_joint_model: np.ndarray
    simultaneous_error_hist_empirical: np.ndarray
    simultaneous_error_hist_model: np.ndarray
    mean_offdiag_rho: float


def fit_marginals(e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column error rates (clamped) and their latent thresholds."""
    e = np.asarray(e)
    if e.ndim != 2 or e.shape[0] < 1:
        raise ValueError("expected a nonempty N x M error matrix")
    rates = np.clip(e.mean(axis=0), CLAMP_EPS, 1.0 - CLAMP_EPS)
    return rates, std_normal_quantile(rates)


def solve_tetrachoric(tau_i: float, tau_j: float, joint_err: float) -> float:
    """Latent correlation matching a pairwise joint error probability.

    Inverts rho -> Phi2(tau_i, tau_j; rho), which is strictly increasing,
    by bisection on (-1 + RHO_EPS, 1 - RHO_EPS). Joint rates outside the
    Frechet bounds are clamped to the feasible edge with a
    FrechetBoundWarning; rates at or beyond what the bracket can reach
    return the bracket end.
    """
    joint_err = float(joint_err)
    p_i, p_j = std_normal_cdf(tau_i), std_normal_cdf(tau_j)
    lower = max(0.0, p_i + p_j - 1.0)
    upper = min(p_i, p_j)
    if joint_err < lower or joint_err > upper:
        warnings.warn(
            f"joint error rate {joint_err:.6g} outside Frechet bounds "
            f"[{lower:.6g}, {upper:.6g}]; clamping",
            FrechetBoundWarning,
            stacklevel=2,
        )
        joint_err = min(max(joint_err, lower), upper)
    lo, hi = -1.0 + RHO_EPS, 1.0 - RHO_EPS
    if joint_err <= bivariate_normal_cdf(tau_i, tau_j, lo):
        return lo
    if joint_err >= bivariate_normal_cdf(tau_i, tau_j, hi):
        return hi
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if bivariate_normal_cdf(tau_i, tau_j, mid) < joint_err:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    return 0.5 * (lo + hi)


def project_to_correlation(a: np.ndarray) -> np.ndarray:
    """Nearest-style projection onto valid correlation matrices.

    Eigenvalues are floored at EIG_EPS, the matrix reconstructed, and the
    diagonal renormalized back to exactly 1. Inputs already PSD with unit
    diagonal (smallest eigenvalue >= EIG_EPS) are fixed points up to
    floating-point error.
    """
    eigenvalues, vectors = symmetric_eigendecomposition(a)
    clipped = np.maximum(eigenvalues, EIG_EPS)
    rebuilt = (vectors * clipped) @ vectors.T
    scale = 1.0 / np.sqrt(np.diag(rebuilt))
    rebuilt = rebuilt * scale[:, None] * scale[None, :]
    rebuilt = (rebuilt + rebuilt.T) / 2.0
    np.fill_diagonal(rebuilt, 1.0)
    return rebuilt


def fit_copula(d: Dataset) -> CopulaModel:
    """Fit marginals plus pairwise latent correlations to a dataset."""
    if d.n_rows < 2:
        raise ValueError("need at least two rows to fit pairwise correlations")
    e = error_matrix(d)
    rates, thresholds = fit_marginals(e)
    m = d.n_models
    sigma = np.eye(m)
    e_float = e.astype(np.float64)
    joint = (e_float.T @ e_float) / d.n_rows
    for i in range(m):
        for j in range(i + 1, m):
            rho = solve_tetrachoric(thresholds[i], thresholds[j], joint[i, j])
            sigma[i, j] = sigma[j, i] = rho
    sigma = project_to_correlation(sigma)
    return CopulaModel(sigma, thresholds, rates, d.model_names)


def _latent_factor(sigma: np.ndarray) -> np.ndarray:
    # Any L with L @ L.T == sigma works; eigh handles the PSD-singular case
    # where Cholesky would fail.
    eigenvalues, vectors = symmetric_eigendecomposition(sigma)
    return vectors * np.sqrt(np.maximum(eigenvalues, 0.0))


def sample(model: CopulaModel, n: int, seed: int) -> Dataset:
    """Draw a synthetic dataset of n rows from a fitted model."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=n) * 2 - 1
    factor = _latent_factor(model.sigma)
    latent = rng.standard_normal((n, model.n_models)) @ factor.T
    errors = latent < model.thresholds[None, :]
    predictions = labels[:, None] * (1 - 2 * errors.astype(np.int8))
    return Dataset(labels, predictions, model.model_names)


def sample_equicorrelated(spec: EquicorrelatedSpec, n: int, seed: int) -> Dataset:
    """Draw from the shared-factor pool: Z_j = sqrt(rho) U + sqrt(1-rho) xi_j."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=n) * 2 - 1
    shared = rng.standard_normal((n, 1))
    own = rng.standard_normal((n, spec.m))
    latent = np.sqrt(spec.rho) * shared + np.sqrt(1.0 - spec.rho) * own
    tau = std_normal_quantile(1.0 - spec.alpha)
    errors = latent < tau
    predictions = labels[:, None] * (1 - 2 * errors.astype(np.int8))
    names = tuple(f"model_{j + 1}" for j in range(spec.m))
    return Dataset(labels, predictions, names)


def equicorrelated_model(spec: EquicorrelatedSpec) -> CopulaModel:
    """The constant-correlation CopulaModel equivalent of a one-factor spec."""
    sigma = np.full((spec.m, spec.m), spec.rho)
    np.fill_diagonal(sigma, 1.0)
    rate = min(max(1.0 - spec.alpha, CLAMP_EPS), 1.0 - CLAMP_EPS)
    rates = np.full(spec.m, rate)
    names = tuple(f"model_{j + 1}" for j in range(spec.m))
    return CopulaModel(sigma, std_normal_quantile(rates), rates, names)


def _pairwise_joint(e: np.ndarray) -> tuple[tuple[tuple[int, int], ...], np.ndarray]:
    m = e.shape[1]
    e_float = e.astype(np.float64)
    joint = (e_float.T @ e_float) / e.shape[0]
    pairs = tuple((i, j) for i in range(m) for j in range(i + 1, m))
    return pairs, np.array([joint[i, j] for i, j in pairs])


def _simultaneous_hist(e: np.ndarray) -> np.ndarray:
    m = e.shape[1]
    counts = np.bincount(e.sum(axis=1).astype(np.int64), minlength=m + 1)
    return counts / counts.sum()


def copula_diagnostics(
    real: Dataset, model: CopulaModel, n_synth: int, seed: int
) -> CopulaDiagnostics:
    """Empirical statistics of the real data vs a fresh synthetic sample."""
    if real.n_models != model.n_models:
        raise ValueError("dataset and model disagree on the number of models")
    e_real = error_matrix(real)
    synth = sample(model, n_synth, seed)
    e_synth = error_matrix(synth)
    pairs, joint_real = _pairwise_joint(e_real)
    _, joint_synth = _pairwise_joint(e_synth)
    m = model.n_models
    offdiag = model.sigma[~np.eye(m, dtype=bool)]
    return CopulaDiagnostics(
        pair_indices=pairs,
        pairwise_joint_empirical=joint_real,
        pairwise_joint_model=joint_synth,
        simultaneous_error_hist_empirical=_simultaneous_hist(e_real),
        simultaneous_error_hist_model=_simultaneous_hist(e_synth),
        mean_offdiag_rho=float(offdiag.mean()) if m > 1 else 0.0,
    )
