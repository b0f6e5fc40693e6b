"""
White-noise observation model: X_n(ψ_jk) = β_jk + ε_jk with
Cov(ε_jk1, ε_jk2) = ⟨ψ_jk1, ψ_jk2⟩ / n.

Noise is drawn in the harmonic domain: a_l0 ~ N(0, 1/n), and for m > 0
a_lm = (x + iy)/√(2n), so every real mode carries variance 1/n and ε_jk
inherits the needlet covariance exactly.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import gammaln

import config
from estimation.block_threshold import BlockNorm, level_statistic
from needlets.needlet_frame import (
    CoefficientPyramid,
    NeedletSystem,
    check_pyramid,
    coefficients_from_alm,
)
from sphere.cubature import top_degree
from sphere.harmonic_basis import FOUR_PI, legendre_sum
from sphere.sphere_geometry import geodesic_distances
from utils.errors import ValidationFailure
from utils.rng import stream


class ObservationModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: float = Field(gt=0, description="Sample size; the noise level per harmonic mode is 1/n")
    system: NeedletSystem = Field(description="Needlet system the coefficients live on")
    seed: int = Field(default=0, ge=0, description="Root seed of every noise stream")


def noise_alm(lmax: int, n: float, rng: np.random.Generator) -> np.ndarray:
    """White harmonic noise up to lmax. Draw layout is fixed: (l, m, re/im)."""
    draws = rng.standard_normal((lmax + 1, lmax + 1, 2))
    alm = np.empty((lmax + 1, lmax + 1), dtype=complex)
    alm[:, 0] = draws[:, 0, 0] / math.sqrt(n)
    alm[:, 1:] = (draws[:, 1:, 0] + 1j * draws[:, 1:, 1]) / math.sqrt(2.0 * n)
    return np.tril(alm)


def sample_noise(
    model: ObservationModel,
    n_index: int = 0,
    replication: int = 0,
    purpose: str = "noise",
) -> CoefficientPyramid:
    """ε_jk for one replication, from the stream (seed, purpose, n_index, replication)."""
    rng = stream(model.seed, purpose, n_index, replication)
    alm = noise_alm(model.system.lmax, model.n, rng)
    return coefficients_from_alm(model.system, alm, tag="noisy")


def sample_noisy_pyramid(
    model: ObservationModel,
    clean: CoefficientPyramid,
    n_index: int = 0,
    replication: int = 0,
) -> CoefficientPyramid:
    check_pyramid(model.system, clean)
    eps = sample_noise(model, n_index, replication)
    return clean.replace([b + e for b, e in zip(clean.entries, eps.entries)], tag="noisy")


# ── Covariance oracle ─────────────────────────────────────────────────────────

def _kernel_coeffs(system: NeedletSystem, j: int) -> np.ndarray:
    lmax = top_degree(system.B, j)
    l = np.arange(lmax + 1)
    return system.window.gains(j, lmax) ** 2 * (2 * l + 1) / FOUR_PI


def noise_covariance(model: ObservationModel, j: int, k1: int, k2: int) -> float:
    """(1/n) √(λ1 λ2) Σ_l b²(l/B^j) (2l+1)/(4π) P_l(⟨ξ_jk1, ξ_jk2⟩)."""
    system = model.system
    system.check_index(j, k1)
    system.check_index(j, k2)
    grid = system.grids[j]
    t = float(np.clip(grid.xyz[k1] @ grid.xyz[k2], -1.0, 1.0))
    lam = math.sqrt(grid.weights[k1] * grid.weights[k2])
    return float(lam * legendre_sum(_kernel_coeffs(system, j), t)) / model.n


def noise_variances(model: ObservationModel, j: int) -> np.ndarray:
    """Var(ε_jk) = ‖ψ_jk‖²/n for every k at level j."""
    grid = model.system.grids[j]
    return grid.weights * float(_kernel_coeffs(model.system, j).sum()) / model.n


def noise_covariance_matrix(model: ObservationModel, j: int) -> np.ndarray:
    """The full N_j × N_j noise covariance at level j."""
    system = model.system
    if not 0 <= j <= system.j_max:
        raise ValidationFailure(f"level {j} outside 0..{system.j_max}")
    grid = system.grids[j]
    dots = np.clip(grid.xyz @ grid.xyz.T, -1.0, 1.0)
    s = np.sqrt(grid.weights)
    return np.outer(s, s) * legendre_sum(_kernel_coeffs(system, j), dots) / model.n


def correlation_decay_constant(model: ObservationModel, j: int, M: float = 4.0) -> float:
    """C_M = max_{k1,k2} |corr(ε_jk1, ε_jk2)| (1 + B^j d(ξ_jk1, ξ_jk2))^M."""
    cov = noise_covariance_matrix(model, j)
    sd = np.sqrt(np.diag(cov))
    corr = cov / np.outer(sd, sd)
    xyz = model.system.grids[j].xyz
    d = geodesic_distances(xyz, xyz)
    return float(np.max(np.abs(corr) * (1.0 + model.system.B ** j * d) ** M))


# ── Moment checks ─────────────────────────────────────────────────────────────

def gaussian_abs_moment(sigma: np.ndarray, p: float) -> np.ndarray:
    """E|σZ|^p = σ^p 2^{p/2} Γ((p+1)/2) / √π."""
    return sigma ** p * math.exp(0.5 * p * math.log(2.0) + gammaln((p + 1) / 2.0) - 0.5 * math.log(math.pi))


class MomentReport(BaseModel):
    p: int
    replications: int
    max_z: float = Field(description="Largest |empirical − closed form| in Monte Carlo standard errors")
    mean_ratio: float = Field(description="Mean over coefficients of empirical / closed form")
    max_ratio_error: float = Field(description="Largest |empirical / closed form − 1| over coefficients")
    sup_constants: list[float] = Field(description="Per level: E sup_k |ε_jk|^p / ((j+1)^p n^{−p/2})")
    exceedance: Optional[float] = Field(default=None, description="Frequency of |Â| > κ t_n^p under pure noise")


def empirical_moment_check(
    model: ObservationModel,
    p: int,
    replications: int,
    kappa: Optional[float] = None,
    eta: float = 0.5,
    norm: BlockNorm = config.DEFAULT_BLOCK_NORM,
) -> MomentReport:
    """
    Compare empirical E|ε_jk|^p against the Gaussian closed form over every
    (j, k). With κ given, also measure how often a pure-noise block statistic
    clears κ n^{−p/2} under the given block normalisation.
    """
    if p < 2 or p % 2:
        raise ValidationFailure(f"moment order must be a positive even integer, got {p}")
    if replications < 1000:
        raise ValidationFailure(f"moment check needs at least 1000 replications, got {replications}")

    system = model.system
    sigma = [np.sqrt(noise_variances(model, j)) for j in range(system.j_max + 1)]
    closed = [gaussian_abs_moment(s, p) for s in sigma]
    s1 = [np.zeros_like(c) for c in closed]
    s2 = [np.zeros_like(c) for c in closed]
    sup_acc = np.zeros(system.j_max + 1)
    parts = system.partitions(eta) if kappa is not None else None
    exceed, blocks = 0, 0
    threshold = None if kappa is None else kappa * model.n ** (-p / 2.0)

    for rep in range(replications):
        eps = sample_noise(model, 0, rep)
        for j, e in enumerate(eps.entries):
            ep = np.abs(e) ** p
            s1[j] += ep
            s2[j] += ep * ep
            sup_acc[j] += ep.max()
            if parts is not None:
                stats = level_statistic(e, parts[j], p, norm)
                exceed += int(np.count_nonzero(np.abs(stats) > threshold))
                blocks += len(stats)

    z, ratios = [], []
    for j in range(system.j_max + 1):
        mean = s1[j] / replications
        var = np.maximum(s2[j] / replications - mean ** 2, 0.0)
        se = np.sqrt(var / replications)
        z.append(np.abs(mean - closed[j]) / np.where(se > 0, se, np.inf))
        ratios.append(mean / closed[j])
    ratios_all = np.concatenate(ratios)
    scale = model.n ** (-p / 2.0)
    return MomentReport(
        p=p,
        replications=replications,
        max_z=float(np.concatenate(z).max()),
        mean_ratio=float(ratios_all.mean()),
        max_ratio_error=float(np.abs(ratios_all - 1.0).max()),
        sup_constants=[float(sup_acc[j] / replications / ((j + 1) ** p * scale)) for j in range(system.j_max + 1)],
        exceedance=None if parts is None else exceed / blocks,
    )
