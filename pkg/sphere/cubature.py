"""
Per-level cubature rules (ξ_jk, λ_jk): Gauss–Legendre colatitudes crossed with
equispaced longitudes. A product grid with n_θ Gauss nodes and n_φ ≥ D + 1
longitudes integrates every spherical polynomial of degree ≤ D exactly when
2·n_θ − 1 ≥ D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import roots_legendre

import config
from sphere.harmonic_basis import assoc_legendre_table
from sphere.spectral import rings_adjoint, rings_synthesis, rings_synthesis_chunked
from sphere.sphere_geometry import SpherePoint, angles_to_xyz
from utils.errors import ResourceCapError, ValidationFailure

_EDGE = 1e-9


def top_degree(B: float, j: int) -> int:
    """Largest integer degree strictly below B^{j+1}."""
    return math.ceil(B ** (j + 1) - _EDGE) - 1


def bottom_degree(B: float, j: int) -> int:
    """Smallest integer degree strictly above B^{j−1}."""
    return math.floor(B ** (j - 1) + _EDGE) + 1


def band_limits(B: float, j: int) -> tuple[int, int]:
    """Inclusive degree range (lo, hi) where b(l/B^j) can be non-zero."""
    return bottom_degree(B, j), top_degree(B, j)


def _check_B(B: float) -> None:
    if not math.isfinite(B) or B <= 1.0:
        raise ValidationFailure(f"bandwidth B must be > 1, got {B}")


@dataclass(frozen=True, eq=False)
class CubatureGrid:
    """
    Ring-major point set: rings ordered north to south, longitudes
    2πp/n_φ within each ring. Point k sits on ring k // n_φ.
    """

    level: int
    B: float
    ring_theta: np.ndarray        # (n_θ,) colatitudes, ascending
    ring_weight: np.ndarray       # (n_θ,) Gauss weights in cos θ, summing to 2
    n_phi: int
    exact_degree: int
    _tables: dict = field(default_factory=dict, repr=False)

    @property
    def n_theta(self) -> int:
        return len(self.ring_theta)

    @property
    def count(self) -> int:
        return self.n_theta * self.n_phi

    @cached_property
    def ring_cos(self) -> np.ndarray:
        return np.cos(self.ring_theta)

    @cached_property
    def phis(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.n_phi) / self.n_phi

    @cached_property
    def theta(self) -> np.ndarray:
        return np.repeat(self.ring_theta, self.n_phi)

    @cached_property
    def phi(self) -> np.ndarray:
        return np.tile(self.phis, self.n_theta)

    @cached_property
    def xyz(self) -> np.ndarray:
        return angles_to_xyz(self.theta, self.phi)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.repeat(self.ring_weight * (2.0 * math.pi / self.n_phi), self.n_phi)

    @property
    def points(self) -> list[SpherePoint]:
        return [self.point(k) for k in range(self.count)]

    def point(self, k: int) -> SpherePoint:
        if not 0 <= k < self.count:
            raise ValidationFailure(f"point index {k} out of range for {self.count} points")
        return SpherePoint(theta=float(self.theta[k]), phi=float(self.phi[k]))

    def legendre_table(self, lmax: int) -> np.ndarray:
        table = self._tables.get(lmax)
        if table is None:
            table = assoc_legendre_table(lmax, self.ring_cos)
            self._tables[lmax] = table
        return table

    def synthesize(self, alm: np.ndarray) -> np.ndarray:
        """Values of Σ a_lm Y_lm at every point, flattened ring-major."""
        lmax = alm.shape[0] - 1
        return rings_synthesis(alm, self.legendre_table(lmax), self.phis).ravel()

    def adjoint(self, values: np.ndarray, lmax: int) -> np.ndarray:
        """Σ_k v_k conj(Y_lm(ξ_k)) for l ≤ lmax, m ≥ 0."""
        v = np.asarray(values, dtype=float).reshape(self.n_theta, self.n_phi)
        return rings_adjoint(v, self.legendre_table(lmax), self.phis)

    def analyze(self, samples: np.ndarray, lmax: int) -> np.ndarray:
        """Harmonic coefficients by cubature; exact when degree(f) + lmax ≤ exact_degree."""
        samples = _checked_samples(self, samples)
        return self.adjoint(self.weights * samples, lmax)


def _checked_samples(grid: CubatureGrid, samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=float).ravel()
    if arr.shape[0] != grid.count:
        raise ValidationFailure(f"expected {grid.count} samples, got {arr.shape[0]}")
    return arr


def product_grid(n_theta: int, n_phi: int, exact_degree: int, level: int = -1,
                 B: float = float("nan"), cap: int | None = None) -> CubatureGrid:
    cap = config.GRID_POINT_CAP if cap is None else cap
    if n_theta * n_phi > cap:
        raise ResourceCapError(
            f"grid of {n_theta} x {n_phi} = {n_theta * n_phi} points exceeds the cap of {cap}"
        )
    x, w = roots_legendre(n_theta)
    order = np.argsort(-x)          # cos θ descending → θ ascending
    return CubatureGrid(
        level=level, B=B,
        ring_theta=np.arccos(np.clip(x[order], -1.0, 1.0)),
        ring_weight=w[order],
        n_phi=n_phi,
        exact_degree=exact_degree,
    )


def build_cubature(B: float, j: int, cap: int | None = None) -> CubatureGrid:
    """Level-j rule exact to degree 2·top_degree(B, j)."""
    _check_B(B)
    if j < 0:
        raise ValidationFailure(f"level must be non-negative, got {j}")
    degree = 2 * top_degree(B, j)
    return product_grid(degree // 2 + 1, degree + 1, degree, level=j, B=B, cap=cap)


def integrate(grid: CubatureGrid, samples) -> float:
    """Σ_k λ_k f(ξ_k)."""
    return float(grid.weights @ _checked_samples(grid, samples))


def sup_mesh_values(alm: np.ndarray, grid: CubatureGrid, refine: int = 2) -> np.ndarray:
    """
    Values on a mesh `refine` times denser than grid in both directions, used
    to approximate sup-norms. Legendre tables are built ring chunk by chunk.
    """
    n_theta, n_phi = refine * grid.n_theta, refine * grid.n_phi
    cap = config.GRID_POINT_CAP * refine * refine
    if n_theta * n_phi > cap:
        raise ResourceCapError(f"sup mesh of {n_theta * n_phi} points exceeds the cap of {cap}")
    x, _ = roots_legendre(n_theta)
    phis = 2.0 * math.pi * np.arange(n_phi) / n_phi
    return rings_synthesis_chunked(alm, np.sort(x)[::-1], phis).ravel()
