"""
Spherical needlet frame: window b(·), needlets ψ_jk, analysis β_jk = ⟨f, ψ_jk⟩
and the reconstruction f = Σ β_jk ψ_jk.

Everything runs through harmonic coefficients. With f = Σ a_lm Y_lm,

    β_jk = √λ_jk · Σ_l b(l/B^j) Σ_m a_lm Y_lm(ξ_jk)

so analysis is one harmonic analysis on the shared analysis grid followed, per
level, by a degree filter and a synthesis on the level-j cubature points.
Synthesis is the adjoint of that map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import roots_legendre

import config
from sphere.cubature import CubatureGrid, build_cubature, top_degree
from sphere.harmonic_basis import FOUR_PI, legendre_sum
from sphere.spectral import degree_filter, empty_alm, points_synthesis, resize_alm
from sphere.sphere_geometry import BlockPartition, PointsLike, SpherePoint, as_xyz, build_blocks
from utils.errors import ValidationFailure

PyramidTag = Literal["clean", "noisy", "thresholded"]


# ── Window ────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class NeedletWindow:
    """
    b(ξ) = sqrt(φ(ξ/B) − φ(ξ)) where φ is a C^∞ step: 1 on [0, 1/B], 0 on
    [1, ∞). φ is read from a table of the normalised mollifier integral.
    """

    B: float
    step_nodes: np.ndarray        # u ∈ [−1, 1]
    step_values: np.ndarray       # ∫_{−1}^u exp(−1/(1−t²)) dt, normalised to 1 at u = 1
    _gains: dict = field(default_factory=dict, repr=False)

    def step(self, t) -> np.ndarray:
        """φ(t)."""
        t = np.asarray(t, dtype=float)
        u = 1.0 - 2.0 * self.B / (self.B - 1.0) * (t - 1.0 / self.B)
        return np.interp(u, self.step_nodes, self.step_values)

    def b_squared(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return np.maximum(self.step(xi / self.B) - self.step(xi), 0.0)

    def __call__(self, xi):
        vals = np.sqrt(self.b_squared(xi))
        return float(vals) if vals.ndim == 0 else vals

    def gains(self, j: int, lmax: int) -> np.ndarray:
        """b(l/B^j) for l = 0..lmax."""
        key = (j, lmax)
        g = self._gains.get(key)
        if g is None:
            g = np.sqrt(self.b_squared(np.arange(lmax + 1) / self.B ** j))
            g.flags.writeable = False
            self._gains[key] = g
        return g


def build_window(B: float, table_size: int | None = None) -> NeedletWindow:
    if not math.isfinite(B) or B <= 1.0:
        raise ValidationFailure(f"bandwidth B must be > 1, got {B}")
    size = config.WINDOW_TABLE_SIZE if table_size is None else table_size
    if size < 16:
        raise ValidationFailure(f"window table needs at least 16 samples, got {size}")

    u = np.linspace(-1.0, 1.0, size)
    bump = np.zeros_like(u)
    inner = np.abs(u) < 1.0
    bump[inner] = np.exp(-1.0 / (1.0 - u[inner] ** 2))
    cum = cumulative_trapezoid(bump, u, initial=0.0)
    return NeedletWindow(B=float(B), step_nodes=u, step_values=cum / cum[-1])


def window_sum_residual(window: NeedletWindow, xi) -> float:
    """max |Σ_{j≥0} b²(ξ/B^j) − 1| over the sampled ξ ≥ 1."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(xi < 1.0):
        raise ValidationFailure("the unitary sum only holds for ξ ≥ 1")
    levels = int(math.ceil(math.log(xi.max(), window.B))) + 2
    total = sum(window.b_squared(xi / window.B ** j) for j in range(levels + 1))
    return float(np.max(np.abs(total - 1.0)))


# ── System and coefficient pyramids ───────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class NeedletSystem:
    window: NeedletWindow
    grids: list[CubatureGrid]
    j_max: int
    _partitions: dict = field(default_factory=dict, repr=False)

    @property
    def B(self) -> float:
        return self.window.B

    @property
    def analysis_grid(self) -> CubatureGrid:
        return self.grids[self.j_max]

    @property
    def lmax(self) -> int:
        """Highest degree any needlet in the system touches."""
        return top_degree(self.B, self.j_max)

    @property
    def counts(self) -> list[int]:
        return [g.count for g in self.grids]

    def partitions(self, eta: float) -> list[BlockPartition]:
        """Block partitions of every level for block exponent η, built once."""
        parts = self._partitions.get(eta)
        if parts is None:
            parts = [build_blocks(g, eta) for g in self.grids]
            self._partitions[eta] = parts
        return parts

    def check_index(self, j: int, k: int) -> None:
        if not 0 <= j <= self.j_max:
            raise ValidationFailure(f"level {j} outside 0..{self.j_max}")
        if not 0 <= k < self.grids[j].count:
            raise ValidationFailure(f"index {k} outside 0..{self.grids[j].count - 1} at level {j}")


def build_system(B: float, j_max: int, cap: int | None = None) -> NeedletSystem:
    if j_max < 0:
        raise ValidationFailure(f"j_max must be non-negative, got {j_max}")
    window = build_window(B)
    grids = [build_cubature(B, j, cap=cap) for j in range(j_max + 1)]
    return NeedletSystem(window=window, grids=grids, j_max=j_max)


@dataclass(frozen=True, eq=False)
class CoefficientPyramid:
    """β_jk for levels 0..j_max, one real array per level."""

    entries: list[np.ndarray]
    B: float
    tag: PyramidTag = "clean"

    def __post_init__(self):
        if self.tag not in ("clean", "noisy", "thresholded"):
            raise ValidationFailure(f"unknown pyramid tag {self.tag!r}")
        for j, arr in enumerate(self.entries):
            if arr.ndim != 1:
                raise ValidationFailure(f"level {j} coefficients must be one-dimensional")
            if not np.all(np.isfinite(arr)):
                raise ValidationFailure(f"level {j} holds non-finite coefficients")

    @property
    def j_max(self) -> int:
        return len(self.entries) - 1

    @property
    def levels(self) -> range:
        return range(len(self.entries))

    @property
    def counts(self) -> list[int]:
        return [len(a) for a in self.entries]

    def replace(self, entries: list[np.ndarray], tag: PyramidTag | None = None) -> "CoefficientPyramid":
        return CoefficientPyramid(entries=entries, B=self.B, tag=tag or self.tag)

    def scaled(self, c: float) -> "CoefficientPyramid":
        return self.replace([c * a for a in self.entries])

    def __add__(self, other: "CoefficientPyramid") -> "CoefficientPyramid":
        _check_same_shape(self, other)
        return self.replace([a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other: "CoefficientPyramid") -> "CoefficientPyramid":
        _check_same_shape(self, other)
        return self.replace([a - b for a, b in zip(self.entries, other.entries)])

    def equals(self, other: "CoefficientPyramid") -> bool:
        """Exact equality of every coefficient, B and the level counts."""
        return (self.B == other.B and self.counts == other.counts
                and all(np.array_equal(a, b) for a, b in zip(self.entries, other.entries)))


def _check_same_shape(a: CoefficientPyramid, b: CoefficientPyramid) -> None:
    if a.counts != b.counts:
        raise ValidationFailure(f"pyramid shapes differ: {a.counts} vs {b.counts}")


def zero_pyramid(system: NeedletSystem, tag: PyramidTag = "clean") -> CoefficientPyramid:
    return CoefficientPyramid(entries=[np.zeros(c) for c in system.counts], B=system.B, tag=tag)


def check_pyramid(system: NeedletSystem, pyr: CoefficientPyramid) -> None:
    if not math.isclose(pyr.B, system.B, rel_tol=1e-12):
        raise ValidationFailure(f"pyramid built for B={pyr.B}, system uses B={system.B}")
    if pyr.counts != system.counts:
        raise ValidationFailure(f"pyramid counts {pyr.counts} do not match system counts {system.counts}")


# ── Single needlets ───────────────────────────────────────────────────────────

def _profile_coeffs(system: NeedletSystem, j: int) -> np.ndarray:
    lmax = top_degree(system.B, j)
    l = np.arange(lmax + 1)
    return system.window.gains(j, lmax) * (2 * l + 1) / FOUR_PI


def needlet_profile(system: NeedletSystem, j: int, k: int, t) -> np.ndarray:
    """ψ_jk as a function of t = ⟨x, ξ_jk⟩ ∈ [−1, 1]."""
    system.check_index(j, k)
    lam = system.grids[j].weights[k]
    return math.sqrt(lam) * legendre_sum(_profile_coeffs(system, j), t)


def needlet_values(system: NeedletSystem, j: int, k: int, points: PointsLike) -> np.ndarray:
    system.check_index(j, k)
    xi = system.grids[j].xyz[k]
    return needlet_profile(system, j, k, np.clip(as_xyz(points) @ xi, -1.0, 1.0))


def evaluate_needlet(system: NeedletSystem, j: int, k: int, x: SpherePoint) -> float:
    """ψ_jk(x) = √λ_jk Σ_l b(l/B^j) (2l+1)/(4π) P_l(⟨x, ξ_jk⟩)."""
    return float(needlet_values(system, j, k, [x])[0])


def needlet_norm(system: NeedletSystem, j: int, k: int, p: float) -> float:
    """
    ‖ψ_jk‖_p. ψ_jk is zonal about ξ_jk, so ‖ψ‖_p^p = 2π ∫_{−1}^{1} |ψ(t)|^p dt,
    taken with Gauss–Legendre in t (exact for p = 2).
    """
    if p < 1:
        raise ValidationFailure(f"norm exponent must be ≥ 1, got {p}")
    deg = top_degree(system.B, j)
    t, w = roots_legendre(4 * deg + 64)
    vals = np.abs(needlet_profile(system, j, k, t))
    if math.isinf(p):
        return float(max(vals.max(), abs(needlet_profile(system, j, k, 1.0))))
    return float((2.0 * math.pi * (w @ vals ** p)) ** (1.0 / p))


def equatorial_index(grid: CubatureGrid) -> int:
    """Index of the grid point at longitude 0 on the ring nearest the equator."""
    ring = int(np.argmin(np.abs(grid.ring_theta - math.pi / 2)))
    return ring * grid.n_phi


# ── Analysis / synthesis ──────────────────────────────────────────────────────

def coefficients_from_alm(system: NeedletSystem, alm: np.ndarray, tag: PyramidTag = "clean") -> CoefficientPyramid:
    """β_jk of the real function with harmonic coefficients alm."""
    entries = []
    for j, grid in enumerate(system.grids):
        lmax = top_degree(system.B, j)
        filtered = degree_filter(resize_alm(alm, lmax), system.window.gains(j, lmax))
        entries.append(np.sqrt(grid.weights) * grid.synthesize(filtered))
    return CoefficientPyramid(entries=entries, B=system.B, tag=tag)


def alm_from_coefficients(system: NeedletSystem, pyr: CoefficientPyramid) -> np.ndarray:
    """Harmonic coefficients (up to system.lmax) of Σ β_jk ψ_jk."""
    check_pyramid(system, pyr)
    total = empty_alm(system.lmax)
    for j, grid in enumerate(system.grids):
        beta = pyr.entries[j]
        if not np.any(beta):
            continue
        lmax = top_degree(system.B, j)
        part = degree_filter(grid.adjoint(np.sqrt(grid.weights) * beta, lmax), system.window.gains(j, lmax))
        total += resize_alm(part, system.lmax)
    return total


def analyze(system: NeedletSystem, f_samples) -> CoefficientPyramid:
    """β_jk from samples of f on the analysis grid (ring-major order)."""
    alm = system.analysis_grid.analyze(f_samples, system.lmax)
    return coefficients_from_alm(system, alm)


def synthesize(system: NeedletSystem, pyr: CoefficientPyramid, targets: PointsLike) -> np.ndarray:
    """Σ_jk β_jk ψ_jk(x) at every target."""
    return points_synthesis(alm_from_coefficients(system, pyr), as_xyz(targets))


def synthesize_on_grid(system: NeedletSystem, pyr: CoefficientPyramid, grid: CubatureGrid) -> np.ndarray:
    return grid.synthesize(alm_from_coefficients(system, pyr))
