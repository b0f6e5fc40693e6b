"""
Legendre polynomials, orthonormal complex spherical harmonics (Condon–Shortley
phase) and the projection kernel L_l(⟨x, y⟩) = Σ_m Y_lm(x) conj(Y_lm(y)).

Associated Legendre values are produced already normalised, so the upward
recurrence in l never leaves double range:

    λ_0^0 = 1/√(4π)
    λ_m^m = −√((2m+1)/(2m)) · sinθ · λ_{m−1}^{m−1}
    λ_{m+1}^m = √(2m+3) · x · λ_m^m
    λ_l^m = a_lm (x λ_{l−1}^m − b_lm λ_{l−2}^m)

with Y_lm(θ, φ) = λ_l^m(cos θ) e^{imφ} for m ≥ 0.
"""

from __future__ import annotations

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from sphere.sphere_geometry import SpherePoint
from utils.errors import ValidationFailure

FOUR_PI = 4.0 * math.pi
_T_SLACK = 1e-12


class HarmonicIndex(BaseModel):
    """Degree/order pair (l, m) of a spherical harmonic."""

    model_config = ConfigDict(frozen=True)

    l: int = Field(ge=0, description="Degree")
    m: int = Field(description="Order, |m| ≤ l")

    @model_validator(mode="after")
    def check_order(self) -> "HarmonicIndex":
        if abs(self.m) > self.l:
            raise ValueError(f"|m| must not exceed l, got l={self.l}, m={self.m}")
        return self


def _checked_t(t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if np.any(np.abs(arr) > 1.0 + _T_SLACK) or not np.all(np.isfinite(arr)):
        raise ValidationFailure("Legendre argument must lie in [-1, 1]")
    return np.clip(arr, -1.0, 1.0)


def legendre_series(lmax: int, t) -> np.ndarray:
    """P_0..P_lmax at t, shape (lmax+1,) + shape(t). Three-term recurrence."""
    if lmax < 0:
        raise ValidationFailure(f"degree must be non-negative, got {lmax}")
    x = _checked_t(t)
    out = np.empty((lmax + 1,) + x.shape)
    out[0] = 1.0
    if lmax >= 1:
        out[1] = x
    for l in range(2, lmax + 1):
        out[l] = ((2 * l - 1) * x * out[l - 1] - (l - 1) * out[l - 2]) / l
    return out


def legendre_P(l: int, t):
    """Legendre polynomial P_l(t); scalar in, scalar out."""
    vals = legendre_series(l, t)[l]
    return float(vals) if np.ndim(vals) == 0 else vals


def legendre_sum(coeffs: np.ndarray, t) -> np.ndarray:
    """Σ_l coeffs[l] P_l(t) without materialising every P_l at once."""
    x = _checked_t(t)
    total = np.zeros_like(x)
    p_prev = np.ones_like(x)
    total += coeffs[0] * p_prev
    if len(coeffs) == 1:
        return total
    p_cur = x.copy()
    total += coeffs[1] * p_cur
    for l in range(2, len(coeffs)):
        p_prev, p_cur = p_cur, ((2 * l - 1) * x * p_cur - (l - 1) * p_prev) / l
        if coeffs[l] != 0.0:
            total += coeffs[l] * p_cur
    return total


def assoc_legendre_table(lmax: int, x) -> np.ndarray:
    """
    Normalised associated Legendre values λ_l^m(x), laid out as
    table[m, i, l] (zero where l < m). Shape (lmax+1, len(x), lmax+1).
    """
    x = _checked_t(np.atleast_1d(x))
    n = x.shape[0]
    L = lmax + 1
    table = np.zeros((L, n, L))
    s = np.sqrt(np.maximum(0.0, 1.0 - x * x))

    pmm = np.full(n, 1.0 / math.sqrt(FOUR_PI))
    for m in range(L):
        if m > 0:
            pmm = -math.sqrt((2 * m + 1) / (2 * m)) * s * pmm
        table[m, :, m] = pmm
        if m + 1 < L:
            table[m, :, m + 1] = math.sqrt(2 * m + 3) * x * pmm

    for l in range(2, L):
        ms = np.arange(l - 1)
        a = np.sqrt((4.0 * l * l - 1.0) / (l * l - ms * ms))
        b = np.sqrt(((l - 1.0) ** 2 - ms * ms) / (4.0 * (l - 1.0) ** 2 - 1.0))
        table[: l - 1, :, l] = a[:, None] * (
            x[None, :] * table[: l - 1, :, l - 1] - b[:, None] * table[: l - 1, :, l - 2]
        )
    return table


def sph_harm_values(l: int, m: int, theta, phi) -> np.ndarray:
    """Y_lm at arrays of colatitude/longitude."""
    if l < 0 or abs(m) > l:
        raise ValidationFailure(f"invalid harmonic index l={l}, m={m}")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    lam = assoc_legendre_table(l, np.cos(theta))[abs(m), :, l]
    y = lam * np.exp(1j * abs(m) * phi)
    if m < 0:
        y = (-1) ** abs(m) * np.conj(y)
    return y


def sph_harm(idx: HarmonicIndex, x: SpherePoint) -> complex:
    """Orthonormal complex spherical harmonic Y_lm(x)."""
    return complex(sph_harm_values(idx.l, idx.m, x.theta, x.phi)[0])


def projector_kernel(l: int, x: SpherePoint, y: SpherePoint) -> float:
    """L_l(⟨x,y⟩) = (2l+1)/(4π) · P_l(⟨x,y⟩), by the addition theorem."""
    if l < 0:
        raise ValidationFailure(f"degree must be non-negative, got {l}")
    t = float(np.clip(np.dot(x.xyz, y.xyz), -1.0, 1.0))
    return (2 * l + 1) / FOUR_PI * legendre_P(l, t)
