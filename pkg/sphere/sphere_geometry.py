"""
Points on the unit sphere, geodesic distance, maximal ε-nets, Voronoi
assignment, and the per-level block partition R_{j;s} the estimator
thresholds on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator

from utils.errors import ValidationFailure

if TYPE_CHECKING:
    from sphere.cubature import CubatureGrid

TWO_PI = 2.0 * math.pi

# Dot products closer than this to the best match count as exact Voronoi ties.
_TIE_TOL = 1e-14
# Rows per chunk when forming point x centre dot-product matrices.
_CHUNK = 8192


class SpherePoint(BaseModel):
    """A unit direction stored as (colatitude, longitude) with a Cartesian cache."""

    model_config = ConfigDict(frozen=True)

    theta: float = Field(description="Colatitude in [0, π] radians")
    phi: float = Field(description="Longitude in [0, 2π) radians")

    _xyz: np.ndarray = PrivateAttr()

    @field_validator("theta")
    @classmethod
    def check_theta(cls, v: float) -> float:
        if not math.isfinite(v) or v < 0.0 or v > math.pi:
            raise ValueError(f"colatitude must lie in [0, π], got {v}")
        return float(v)

    @field_validator("phi", mode="before")
    @classmethod
    def wrap_phi(cls, v) -> float:
        v = float(v)
        if not math.isfinite(v):
            raise ValueError(f"longitude must be finite, got {v}")
        v = math.fmod(v, TWO_PI)
        if v < 0.0:
            v += TWO_PI
        # fmod of a value a hair below 0 can land exactly on 2π
        return 0.0 if v >= TWO_PI else v

    def model_post_init(self, __context) -> None:
        st = math.sin(self.theta)
        xyz = np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])
        xyz.flags.writeable = False
        self._xyz = xyz

    @property
    def xyz(self) -> np.ndarray:
        return self._xyz

    @classmethod
    def from_xyz(cls, v: Sequence[float]) -> "SpherePoint":
        x, y, z = (float(c) for c in v)
        r = math.sqrt(x * x + y * y + z * z)
        if r == 0.0:
            raise ValidationFailure("cannot build a direction from the zero vector")
        x, y, z = x / r, y / r, z / r
        return cls(theta=math.atan2(math.hypot(x, y), z), phi=math.atan2(y, x))


PointsLike = Union[Sequence[SpherePoint], np.ndarray]


def as_xyz(points: PointsLike) -> np.ndarray:
    """(n, 3) array of unit vectors from a list of SpherePoint or an (n, 3) array."""
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValidationFailure(f"expected an (n, 3) array of unit vectors, got shape {arr.shape}")
        return arr
    if len(points) == 0:
        return np.zeros((0, 3))
    return np.stack([p.xyz for p in points])


def xyz_to_angles(xyz: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Colatitude and longitude (in [0, 2π)) for an (n, 3) array of unit vectors."""
    theta = np.arctan2(np.hypot(xyz[:, 0], xyz[:, 1]), xyz[:, 2])
    phi = np.mod(np.arctan2(xyz[:, 1], xyz[:, 0]), TWO_PI)
    return theta, phi


def angles_to_xyz(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def geodesic_distance(a: SpherePoint, b: SpherePoint) -> float:
    """Great-circle distance in radians, in [0, π]."""
    u, v = a.xyz, b.xyz
    return math.atan2(float(np.linalg.norm(np.cross(u, v))), float(np.dot(u, v)))


def geodesic_distances(xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    """Pairwise geodesic distances between the rows of two (n, 3) / (m, 3) arrays."""
    xa = np.atleast_2d(xa)
    xb = np.atleast_2d(xb)
    dots = xa @ xb.T
    cross = np.linalg.norm(np.cross(xa[:, None, :], xb[None, :, :]), axis=-1)
    return np.arctan2(cross, dots)


# ── ε-nets ────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class EpsNet:
    """A maximal ε-net: centres pairwise farther than ε, covering every candidate."""

    epsilon: float
    indices: np.ndarray            # candidate indices chosen as centres, in selection order
    center_xyz: np.ndarray         # (S, 3)

    def __len__(self) -> int:
        return len(self.indices)


def _greedy_net(xyz: np.ndarray, epsilon: float) -> np.ndarray:
    """Indices of a greedy maximal ε-net over the rows of xyz, taken in input order."""
    n = xyz.shape[0]
    if epsilon >= math.pi:
        return np.array([0], dtype=np.int64)
    cos_eps = math.cos(epsilon)
    covered = np.zeros(n, dtype=bool)
    chosen: list[int] = []
    start = 0
    while start < n:
        nxt = start + int(np.argmin(covered[start:]))
        if covered[nxt]:
            break
        chosen.append(nxt)
        covered |= xyz @ xyz[nxt] >= cos_eps
        covered[nxt] = True
        start = nxt + 1
    return np.asarray(chosen, dtype=np.int64)


def build_maximal_net(candidates: PointsLike, epsilon: float) -> EpsNet:
    """Greedy maximal ε-net: a candidate becomes a centre unless an earlier centre is within ε."""
    if not epsilon > 0.0:
        raise ValidationFailure(f"epsilon must be positive, got {epsilon}")
    xyz = as_xyz(candidates)
    if xyz.shape[0] == 0:
        raise ValidationFailure("cannot build a net over an empty candidate list")
    idx = _greedy_net(xyz, float(epsilon))
    return EpsNet(epsilon=float(epsilon), indices=idx, center_xyz=xyz[idx].copy())


# ── Voronoi cells ─────────────────────────────────────────────────────────────

def _nearest(center_xyz: np.ndarray, xyz: np.ndarray) -> np.ndarray:
    out = np.empty(xyz.shape[0], dtype=np.int64)
    for lo in range(0, xyz.shape[0], _CHUNK):
        dots = xyz[lo:lo + _CHUNK] @ center_xyz.T
        best = dots.max(axis=1, keepdims=True)
        # first index among (near-)exact ties
        out[lo:lo + _CHUNK] = np.argmax(dots >= best - _TIE_TOL, axis=1)
    return out


def voronoi_assign(centers: PointsLike, points: PointsLike) -> np.ndarray:
    """Index of the geodesically nearest centre for each point; ties go to the lowest index."""
    cxyz = as_xyz(centers)
    if cxyz.shape[0] == 0:
        raise ValidationFailure("voronoi_assign needs at least one centre")
    return _nearest(cxyz, as_xyz(points))


# ── Block partition ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class BlockPartition:
    """Grouping R_{j;s} of level-j cubature indices into Voronoi blocks."""

    level: int
    block_of: np.ndarray                 # k -> s
    block_size_target: int               # ℓ_j
    center_index: np.ndarray             # s -> grid index of the cell centre ξ_js
    epsilon: float                       # net radius the partition was grown from
    blocks: list[np.ndarray] = field(repr=False, default_factory=list)
    effective_sizes: np.ndarray | None = field(repr=False, default=None)   # s -> (N_j/4π) Σ_{k∈R_js} λ_jk

    @property
    def block_count(self) -> int:
        return len(self.center_index)

    @property
    def count(self) -> int:
        return len(self.block_of)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.block_of, minlength=self.block_count)

    def divisors(self, norm: str = "target") -> np.ndarray:
        """Per-block divisor of the block statistic: ℓ_j, or the block's cubature mass counted in mean-weight points."""
        if norm == "target":
            return np.full(self.block_count, float(self.block_size_target))
        if norm == "effective":
            if self.effective_sizes is None:
                return self.sizes.astype(float)
            return self.effective_sizes
        raise ValidationFailure(f"unknown block normalisation {norm!r}")


def block_size_for(count: int, eta: float) -> int:
    """ℓ_j = [N_j^η], never below one."""
    return max(1, int(math.floor(count ** eta + 1e-12)))


def _refined_partition(xyz: np.ndarray, epsilon: float, ell: int, mass: np.ndarray, max_rounds: int = 40):
    """Net of radius ε, then split Voronoi cells holding more than 4ℓ points or 4ℓ mean-weight points of mass."""
    centers = _greedy_net(xyz, epsilon)
    block_of = _nearest(xyz[centers], xyz)
    cap = 4 * ell
    for rnd in range(1, max_rounds + 1):
        sizes = np.bincount(block_of, minlength=len(centers))
        masses = np.bincount(block_of, weights=mass, minlength=len(centers))
        oversized = np.flatnonzero((sizes > cap) | (masses > cap))
        if oversized.size == 0:
            break
        sub_eps = epsilon / (2.0 ** rnd)
        added: list[np.ndarray] = []
        for cell in oversized:
            members = np.flatnonzero(block_of == cell)
            sub = members[_greedy_net(xyz[members], sub_eps)]
            added.append(sub[sub != centers[cell]])
        centers = np.concatenate([centers] + added)
        block_of = _nearest(xyz[centers], xyz)
    return centers, block_of


def build_blocks(grid: "CubatureGrid", eta: float, tolerance: float = 1.1) -> BlockPartition:
    """
    Partition a level grid into Voronoi blocks of about ℓ_j = [N_j^η] points.

    The net radius is bisected (in log scale) on the final block count until
    S_j is within `tolerance` of N_j / ℓ_j, keeping the closest count found.
    """
    if not 0.0 < eta < 1.0:
        raise ValidationFailure(f"eta must lie in (0, 1), got {eta}")
    xyz = grid.xyz
    n = xyz.shape[0]
    ell = block_size_for(n, eta)
    # cubature mass in units of the mean weight 4π/N_j
    mass = grid.weights * (n / (4.0 * math.pi))

    if ell == 1:
        idx = np.arange(n, dtype=np.int64)
        return BlockPartition(
            level=grid.level, block_of=idx, block_size_target=1, center_index=idx,
            epsilon=0.0, blocks=[idx[k:k + 1] for k in range(n)], effective_sizes=mass.copy(),
        )

    target = n / ell
    # a cap of radius ε covers about πε² of the 4π steradians
    guess = math.sqrt(4.0 / target)
    lo, hi = guess / 16.0, min(math.pi, guess * 16.0)
    best = None
    for _ in range(48):
        mid = math.sqrt(lo * hi)
        centers, block_of = _refined_partition(xyz, mid, ell, mass)
        miss = abs(math.log(len(centers) / target))
        if best is None or miss < best[0]:
            best = (miss, mid, centers, block_of)
        if miss <= math.log(tolerance):
            break
        if len(centers) > target:
            lo = mid
        else:
            hi = mid

    miss, eps, centers, block_of = best
    if miss > math.log(2.0):
        print(f"[Blocks] WARNING: level {grid.level}: {len(centers)} blocks for target {target:.1f}")
    order = np.argsort(block_of, kind="stable")
    bounds = np.cumsum(np.bincount(block_of, minlength=len(centers)))[:-1]
    blocks = np.split(order, bounds)
    return BlockPartition(
        level=grid.level, block_of=block_of, block_size_target=ell,
        center_index=centers, epsilon=eps, blocks=blocks,
        effective_sizes=np.bincount(block_of, weights=mass, minlength=len(centers)),
    )
