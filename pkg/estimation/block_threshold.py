"""
Block thresholding: A_{js;p} = (1/ℓ_j) Σ_{k∈R_js} |β_jk|^p, the keep-or-kill
weight w = I(|Â| > κ t_n^p), the estimator f*, and the convergence exponent
α(r, π, p) the estimator attains over Besov balls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

import config
from needlets.needlet_frame import CoefficientPyramid
from sphere.sphere_geometry import BlockPartition
from utils.errors import ValidationFailure

Boundary = Literal["printed", "continuous"]
BlockNorm = Literal["effective", "target"]


class EstimatorConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    kappa: float = Field(default=config.DEFAULT_KAPPA, ge=0, description="Threshold constant κ; inf kills every block")
    eta: float = Field(default=config.DEFAULT_ETA, gt=0, lt=1, description="Block size exponent η")
    p_stat: int = Field(default=config.DEFAULT_P_STAT, ge=1, description="Power p of the block statistic")
    n: float = Field(ge=1, description="Sample size")
    B: float = Field(default=config.DEFAULT_B, gt=1, description="Needlet bandwidth")
    block_norm: BlockNorm = Field(
        default=config.DEFAULT_BLOCK_NORM,
        description="Block statistic divisor: the block's cubature mass in points, or the target size ℓ_j",
    )

    @property
    def J_n(self) -> int:
        """Highest level kept: floor(log_B √n)."""
        return int(math.floor(0.5 * math.log(self.n) / math.log(self.B) + 1e-12))

    @property
    def t_n(self) -> float:
        return self.n ** -0.5

    @property
    def threshold(self) -> float:
        return self.kappa * self.t_n ** self.p_stat


@dataclass
class BlockStatistics:
    """Per level j ≤ J_n: the block statistic of every block and its weight."""

    values: list[np.ndarray]
    weights: list[np.ndarray]
    threshold: float

    @property
    def kept_counts(self) -> list[int]:
        return [int(w.sum()) for w in self.weights]

    @property
    def block_counts(self) -> list[int]:
        return [len(w) for w in self.weights]

    @property
    def kept_fraction(self) -> float:
        total = sum(self.block_counts)
        return sum(self.kept_counts) / total if total else 0.0


def level_statistic(beta: np.ndarray, part: BlockPartition, p: int, norm: BlockNorm = "target") -> np.ndarray:
    if len(beta) != part.count:
        raise ValidationFailure(f"level {part.level}: {len(beta)} coefficients, partition covers {part.count}")
    # |β|^p: odd powers must not let opposite signs cancel inside a block
    sums = np.bincount(part.block_of, weights=np.abs(beta) ** p, minlength=part.block_count)
    return sums / part.divisors(norm)


def block_statistic(pyr: CoefficientPyramid, part: BlockPartition, p: int, norm: BlockNorm = "target") -> np.ndarray:
    """
    A_{js;p} for every block s of the partition's level.

    With norm="target" the divisor is ℓ_j, not |R_js|. With norm="effective"
    it is the block's cubature mass (N_j/4π) Σ λ_jk, which makes the pure-noise
    mean the same for every block of a level.
    """
    if not 0 <= part.level <= pyr.j_max:
        raise ValidationFailure(f"partition level {part.level} not in pyramid levels 0..{pyr.j_max}")
    return level_statistic(pyr.entries[part.level], part, p, norm)


def threshold_weights(stats: np.ndarray, cfg: EstimatorConfig) -> np.ndarray:
    return (np.abs(stats) > cfg.threshold).astype(np.int8)


def denoise(
    noisy: CoefficientPyramid,
    parts: list[BlockPartition],
    cfg: EstimatorConfig,
) -> tuple[CoefficientPyramid, BlockStatistics]:
    """Keep level-j blocks (j ≤ J_n) whose |Â| clears κ t_n^p; zero everything else."""
    J = cfg.J_n
    if noisy.j_max < J:
        raise ValidationFailure(f"pyramid stops at level {noisy.j_max}, estimator needs J_n = {J}")
    if len(parts) <= J:
        raise ValidationFailure(f"{len(parts)} block partitions supplied, levels 0..{J} need one each")

    entries, values, weights = [], [], []
    for j, beta in enumerate(noisy.entries):
        if j > J:
            entries.append(np.zeros_like(beta))
            continue
        stats = level_statistic(beta, parts[j], cfg.p_stat, cfg.block_norm)
        w = threshold_weights(stats, cfg)
        entries.append(np.where(w[parts[j].block_of] == 1, beta, 0.0))
        values.append(stats)
        weights.append(w)
    out = CoefficientPyramid(entries=entries, B=noisy.B, tag="thresholded")
    return out, BlockStatistics(values=values, weights=weights, threshold=cfg.threshold)


# ── Convergence exponent ──────────────────────────────────────────────────────

def _zone_split(r: float, p: float, boundary: Boundary) -> float:
    if boundary == "printed":
        return 2.0 * p / (2.0 * (r + 2.0))
    if boundary == "continuous":
        return p / (r + 1.0)
    raise ValidationFailure(f"unknown zone boundary {boundary!r}")


def _check_rate_args(r: float, pi: float, p: float) -> None:
    if r <= 0 or pi < 1 or p < 1:
        raise ValidationFailure(f"need r > 0, π ≥ 1, p ≥ 1; got r={r}, π={pi}, p={p}")
    if r - 2.0 / pi < -1e-12:
        raise ValidationFailure(f"r − 2/π = {r - 2.0 / pi:.6g} < 0: rate needs r ≥ 2/π")


def rate_zone(r: float, pi: float, p: float, boundary: Boundary = "printed") -> str:
    _check_rate_args(r, pi, p)
    if math.isinf(p):
        return "sup"
    return "regular" if pi >= _zone_split(r, p, boundary) else "sparse"


def theoretical_rate(r: float, pi: float, q: float, p: float, boundary: Boundary = "printed") -> float:
    """
    α(r, π, p) with E‖f* − f‖_p^p ≲ n^{−α} over B^r_{πq}. q does not enter.

      regular:  rp / (2(r+1))
      sparse:   p(r − 2(1/π − 1/p)) / (2(r − 2(1/π − 1/2)))
      p = ∞:    (r − 2/π) / (2(r − 2(1/π − 1/2)))
    """
    if q < 1:
        raise ValidationFailure(f"q must be ≥ 1, got {q}")
    zone = rate_zone(r, pi, p, boundary)
    denom = 2.0 * (r - 2.0 * (1.0 / pi - 0.5))
    if zone == "sup":
        return (r - 2.0 / pi) / denom
    if zone == "regular":
        return r * p / (2.0 * (r + 1.0))
    return p * (r - 2.0 * (1.0 / pi - 1.0 / p)) / denom
