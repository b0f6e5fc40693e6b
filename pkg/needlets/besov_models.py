"""
Besov balls B^r_{πq}(M) through needlet coefficients.

The coefficient seminorm is

    [ Σ_j ( B^{j(r + 1/2 − 1/π)} ‖β_j·‖_π )^q ]^{1/q}      (sup over j when q = ∞)

and the generator draws random members of the ball level by level.
"""

from __future__ import annotations

import math
from typing import Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from needlets.needlet_frame import (
    CoefficientPyramid,
    NeedletSystem,
    alm_from_coefficients,
    coefficients_from_alm,
    synthesize_on_grid,
)
from sphere.cubature import integrate
from sphere.spectral import resize_alm
from utils.errors import ValidationFailure
from utils.rng import stream

_MATCH = 1e-12

LevelProfile = Literal["summable", "extremal"]


class BesovParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    r: float = Field(gt=0, description="Smoothness")
    pi: float = Field(ge=1, description="Spatial integrability index π")
    q: float = Field(ge=1, description="Fineness index; may be inf")
    M: float = Field(default=1.0, gt=0, description="Ball radius")

    @model_validator(mode="after")
    def check_norm_equivalence(self) -> "BesovParams":
        if not max(0.0, 1.0 / self.pi - 1.0 / self.q) < self.r:
            raise ValueError(
                f"r={self.r} must exceed max(0, 1/π − 1/q) = {max(0.0, 1 / self.pi - 1 / self.q):.6g}"
            )
        return self

    def check_rate_hypothesis(self) -> None:
        """Raise unless r − 2/π ≥ 0, the smoothness the convergence rate needs."""
        if self.r - 2.0 / self.pi < -_MATCH:
            raise ValidationFailure(f"r − 2/π = {self.r - 2.0 / self.pi:.6g} is negative")

    def level_exponent(self) -> float:
        return self.r + 0.5 - 1.0 / self.pi


def _lp(values: np.ndarray, p: float) -> float:
    a = np.abs(values)
    if a.size == 0:
        return 0.0
    if math.isinf(p):
        return float(a.max())
    return float((a ** p).sum() ** (1.0 / p))


def level_terms(pyr: CoefficientPyramid, params: BesovParams) -> np.ndarray:
    """B^{j(r+1/2−1/π)} ‖β_j·‖_π for every level."""
    s = params.level_exponent()
    return np.array([pyr.B ** (j * s) * _lp(beta, params.pi) for j, beta in enumerate(pyr.entries)])


def besov_seminorm(pyr: CoefficientPyramid, params: BesovParams) -> float:
    terms = level_terms(pyr, params)
    return _lp(terms, params.q)


def besov_norm(pyr: CoefficientPyramid, params: BesovParams, system: NeedletSystem) -> float:
    """‖f‖_{L_π} on the analysis grid plus the coefficient seminorm."""
    grid = system.analysis_grid
    values = np.abs(synthesize_on_grid(system, pyr, grid))
    lp = float(values.max()) if math.isinf(params.pi) else integrate(grid, values ** params.pi) ** (1.0 / params.pi)
    return lp + besov_seminorm(pyr, params)


def _level_budget(j: int, q: float, profile: str) -> float:
    """ε_j: square-summable-like for q < ∞, flat for q = ∞ or the extremal profile."""
    if profile == "extremal" or math.isinf(q):
        return 1.0
    if profile == "summable":
        return 2.0 ** (-(j + 1) / q)
    raise ValidationFailure(f"unknown level profile {profile!r}")


def generate_besov_function(
    params: BesovParams,
    system: NeedletSystem,
    seed: Union[int, np.random.Generator],
    project: bool = True,
    profile: LevelProfile = "summable",
) -> CoefficientPyramid:
    """
    Random member of B^r_{πq}(M) with seminorm exactly M.

    Each level gets N_j^{π/2} active coefficients for π < 2 (all of them for
    π ≥ 2), at positions drawn without replacement, with Gaussian amplitudes
    scaled so the level term equals ε_j. The "extremal" profile makes every
    level term equal, the shape the worst case over the ball takes. With
    `project`, the draw is then replaced by the coefficients of its synthesis
    truncated at degree B^{j_max}, which the frame reproduces exactly.
    """
    rng = seed if isinstance(seed, np.random.Generator) else stream(int(seed), "besov")
    s = params.level_exponent()
    entries = []
    for j, n_j in enumerate(system.counts):
        active = n_j if params.pi >= 2.0 else min(n_j, max(1, math.ceil(n_j ** (params.pi / 2.0))))
        support = np.sort(rng.choice(n_j, size=active, replace=False))
        amp = rng.standard_normal(active)
        beta = np.zeros(n_j)
        norm = _lp(amp, params.pi)
        if norm > 0.0:
            beta[support] = amp * (_level_budget(j, params.q, profile) / (system.B ** (j * s) * norm))
        entries.append(beta)
    pyr = CoefficientPyramid(entries=entries, B=system.B)

    if project:
        alm = alm_from_coefficients(system, pyr)
        alm = resize_alm(resize_alm(alm, math.floor(system.B ** system.j_max + 1e-9)), system.lmax)
        pyr = coefficients_from_alm(system, alm)

    total = besov_seminorm(pyr, params)
    if total == 0.0:
        return pyr
    return pyr.scaled(params.M / total)


class EmbeddingReport(BaseModel):
    pattern: Literal["fineness", "integrability", "smoothness_shift"]
    lhs: float = Field(description="Seminorm in the target space")
    rhs: float = Field(description="Seminorm in the source space")
    constant: float = Field(description="Bound C in lhs ≤ C·rhs")
    measured: float = Field(description="lhs / rhs, or 0 when both vanish")
    holds: bool


def _same(a: float, b: float) -> bool:
    return a == b or math.isclose(a, b, rel_tol=_MATCH, abs_tol=_MATCH)


def embedding_check(pyr: CoefficientPyramid, p1: BesovParams, p2: BesovParams) -> EmbeddingReport:
    """
    Check one of the three needlet-Besov embeddings on a pyramid:

      fineness:         q1 ≤ q2, same r and π    →  ‖·‖_{p2} ≤ ‖·‖_{p1}
      integrability:    π1 ≤ π2, same r and q    →  ‖·‖_{p1} ≤ C ‖·‖_{p2}
      smoothness_shift: π1 ≤ π2, r2 ≤ r1 − (1/π1 − 1/π2), same q  →  ‖·‖_{p2} ≤ ‖·‖_{p1}

    For the integrability pattern C = max_j (N_j / B^j)^{1/π1 − 1/π2}, from
    Hölder on each level.
    """
    if _same(p1.r, p2.r) and _same(p1.pi, p2.pi) and p1.q <= p2.q:
        pattern, lhs, rhs, c = "fineness", besov_seminorm(pyr, p2), besov_seminorm(pyr, p1), 1.0
    elif _same(p1.r, p2.r) and _same(p1.q, p2.q) and p1.pi < p2.pi:
        gap = 1.0 / p1.pi - 1.0 / p2.pi
        c = max((n / pyr.B ** j) ** gap for j, n in enumerate(pyr.counts))
        pattern, lhs, rhs = "integrability", besov_seminorm(pyr, p1), besov_seminorm(pyr, p2)
    elif _same(p1.q, p2.q) and p1.pi < p2.pi and p2.r <= p1.r - (1.0 / p1.pi - 1.0 / p2.pi) + _MATCH:
        pattern, lhs, rhs, c = "smoothness_shift", besov_seminorm(pyr, p2), besov_seminorm(pyr, p1), 1.0
    else:
        raise ValidationFailure(f"no embedding relates {p1.model_dump()} and {p2.model_dump()}")

    measured = 0.0 if rhs == 0.0 else lhs / rhs
    holds = lhs <= c * rhs * (1.0 + 1e-12) + 1e-300
    return EmbeddingReport(pattern=pattern, lhs=lhs, rhs=rhs, constant=c, measured=measured, holds=holds)
