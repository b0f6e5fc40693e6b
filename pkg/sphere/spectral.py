"""
Harmonic transforms for real band-limited functions.

Coefficients are kept for m ≥ 0 only, as a complex array alm[l, m] of shape
(lmax+1, lmax+1); negative orders follow from a_{l,-m} = (-1)^m conj(a_lm).
Grids are sets of iso-latitude rings with equispaced longitudes, so every
transform factorises into a Legendre stage (batched real matmuls over m) and a
Fourier stage (one complex matmul).
"""

from __future__ import annotations

import numpy as np

from sphere.harmonic_basis import assoc_legendre_table
from sphere.sphere_geometry import xyz_to_angles

# Doubles allowed in one on-the-fly Legendre table chunk.
_TABLE_BUDGET = 4_000_000


def empty_alm(lmax: int) -> np.ndarray:
    return np.zeros((lmax + 1, lmax + 1), dtype=complex)


def resize_alm(alm: np.ndarray, lmax: int) -> np.ndarray:
    """Truncate or zero-pad to degree lmax."""
    out = empty_alm(lmax)
    n = min(lmax + 1, alm.shape[0])
    out[:n, :n] = alm[:n, :n]
    return out


def alm_lmax(alm: np.ndarray) -> int:
    return alm.shape[0] - 1


def _phases(lmax: int, phis: np.ndarray) -> np.ndarray:
    return np.exp(1j * np.outer(np.arange(lmax + 1), phis))


def _legendre_stage(table: np.ndarray, alm: np.ndarray) -> np.ndarray:
    """F[i, m] = Σ_l table[m, i, l] alm[l, m]."""
    re = np.matmul(table, np.ascontiguousarray(alm.real.T)[:, :, None])[..., 0]
    im = np.matmul(table, np.ascontiguousarray(alm.imag.T)[:, :, None])[..., 0]
    return (re + 1j * im).T


def _legendre_adjoint(table: np.ndarray, g: np.ndarray) -> np.ndarray:
    """alm[l, m] = Σ_i table[m, i, l] g[i, m]."""
    tt = table.transpose(0, 2, 1)
    re = np.matmul(tt, np.ascontiguousarray(g.real.T)[:, :, None])[..., 0]
    im = np.matmul(tt, np.ascontiguousarray(g.imag.T)[:, :, None])[..., 0]
    return (re + 1j * im).T


def rings_synthesis(alm: np.ndarray, table: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """f(θ_i, φ_p) = Σ_lm a_lm Y_lm on a ring grid; returns (n_rings, n_phi)."""
    f = _legendre_stage(table, alm)
    f[:, 1:] *= 2.0
    return (f @ _phases(alm_lmax(alm), phis)).real


def rings_adjoint(values: np.ndarray, table: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """a_lm = Σ_{i,p} v[i, p] conj(Y_lm(θ_i, φ_p)) for m ≥ 0."""
    lmax = table.shape[0] - 1
    g = values @ np.conj(_phases(lmax, phis)).T
    return _legendre_adjoint(table, g)


def points_synthesis(alm: np.ndarray, xyz: np.ndarray) -> np.ndarray:
    """Evaluate a real band-limited function at scattered unit vectors."""
    lmax = alm_lmax(alm)
    theta, phi = xyz_to_angles(np.atleast_2d(xyz))
    chunk = max(1, _TABLE_BUDGET // (lmax + 1) ** 2)
    out = np.empty(theta.shape[0])
    weights = np.full(lmax + 1, 2.0)
    weights[0] = 1.0
    for lo in range(0, theta.shape[0], chunk):
        table = assoc_legendre_table(lmax, np.cos(theta[lo:lo + chunk]))
        f = _legendre_stage(table, alm)                      # (c, M)
        ph = np.exp(1j * np.outer(phi[lo:lo + chunk], np.arange(lmax + 1)))
        out[lo:lo + chunk] = (f * ph * weights).sum(axis=1).real
    return out


def rings_synthesis_chunked(alm: np.ndarray, ring_cos: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """rings_synthesis without a cached table, for dense evaluation meshes."""
    lmax = alm_lmax(alm)
    chunk = max(1, _TABLE_BUDGET // (lmax + 1) ** 2)
    rows = []
    for lo in range(0, len(ring_cos), chunk):
        rows.append(rings_synthesis(alm, assoc_legendre_table(lmax, ring_cos[lo:lo + chunk]), phis))
    return np.vstack(rows)


def alm_energy(alm: np.ndarray) -> float:
    """∫ f² for the real function with these coefficients (Parseval)."""
    p = np.abs(alm) ** 2
    return float(p[:, 0].sum() + 2.0 * p[:, 1:].sum())


def degree_filter(alm: np.ndarray, gains: np.ndarray) -> np.ndarray:
    """Multiply every a_lm by gains[l]."""
    return alm * gains[: alm.shape[0], None]
