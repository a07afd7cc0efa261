"""
Reciprocal-space analysis of point patterns.

Structure factors are sampled on the reciprocal lattice of the pattern's
periodic box, ``k = 2*pi*(nx/Lx, ny/Ly)`` with ``|nx|, |ny| <= n_max``,
using the modulus-squared convention ``S(k) = |sum_n exp(i k.r_n)|^2 / N``
(Poisson patterns give ``S ~ 1``, Bragg peaks give ``S = N``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidArgumentError
from .pattern import DIMENSION, PointPattern

DEFAULT_ZERO_THRESHOLD = 1e-8
DEFAULT_N_MAX = 40


@dataclass(frozen=True)
class SpectralMap:
    """Structure factor samples on a square block of reciprocal-lattice indices.

    ``nx``, ``ny``, ``kx``, ``ky`` and ``s`` are flat arrays of equal length
    (the ``k = 0`` sample is included and equals ``N``).
    """

    nx: np.ndarray
    ny: np.ndarray
    kx: np.ndarray
    ky: np.ndarray
    s: np.ndarray
    n_max: int
    box: tuple[float, float]
    source: str = ""
    squared: bool = True

    @property
    def k_norm(self) -> np.ndarray:
        return np.hypot(self.kx, self.ky)

    def value_at(self, nx: int, ny: int) -> float:
        hit = np.nonzero((self.nx == nx) & (self.ny == ny))[0]
        if len(hit) == 0:
            raise KeyError((nx, ny))
        return float(self.s[hit[0]])

    def as_grid(self) -> np.ndarray:
        """``S`` reshaped to ``(2*n_max+1, 2*n_max+1)`` indexed ``[nx, ny]``."""
        side = 2 * self.n_max + 1
        return self.s.reshape(side, side)


@dataclass(frozen=True)
class StealthSummary:
    chi_achieved: float
    k_c: float
    m_constrained: int
    max_s_inside: float


def _index_grid(n_max):
    n = np.arange(-n_max, n_max + 1)
    nx, ny = np.meshgrid(n, n, indexing="ij")
    return nx.ravel(), ny.ravel()


def structure_factor(pattern: PointPattern, n_max: int = DEFAULT_N_MAX, method: str = "direct") -> SpectralMap:
    """Structure factor on all lattice vectors with ``|nx|, |ny| <= n_max``.

    ``method="direct"`` forms every phase ``k.r`` explicitly (the reference
    semantics).  ``method="separable"`` uses ``exp(i(kx x + ky y)) =
    exp(i kx x) exp(i ky y)`` to reduce the sum to one matrix product,
    which is much faster for large grids.
    """
    if n_max < 1:
        raise InvalidArgumentError("n_max must be >= 1")
    lx, ly = pattern.box
    nx, ny = _index_grid(n_max)
    kx = 2 * math.pi * nx / lx
    ky = 2 * math.pi * ny / ly
    x, y = pattern.points[:, 0], pattern.points[:, 1]
    if method == "direct":
        rho = np.empty(len(kx), dtype=complex)
        chunk = max(1, 2_000_000 // pattern.n)
        for start in range(0, len(kx), chunk):
            sl = slice(start, start + chunk)
            phase = np.outer(kx[sl], x) + np.outer(ky[sl], y)
            rho[sl] = np.exp(1j * phase).sum(axis=1)
    elif method == "separable":
        n = np.arange(-n_max, n_max + 1)
        ex = np.exp(1j * np.outer(x, 2 * math.pi * n / lx))  # (N, 2n+1)
        ey = np.exp(1j * np.outer(y, 2 * math.pi * n / ly))
        rho = (ex.T @ ey).ravel()  # [nx, ny] order matches _index_grid
    else:
        raise InvalidArgumentError(f"unknown method {method!r}")
    s = (rho.real ** 2 + rho.imag ** 2) / pattern.n
    return SpectralMap(nx, ny, kx, ky, s, n_max, pattern.box, pattern.label, True)


def stealth_summary(smap: SpectralMap, n: int, zero_threshold: float = DEFAULT_ZERO_THRESHOLD) -> StealthSummary:
    """Measure the stealthy cutoff of a sampled structure factor.

    Independent vectors (one of each ``+/-k`` pair, ``k != 0``) are walked
    shell by shell in ``|k|``; ``k_c`` is the last shell radius before the
    first vector with ``S > zero_threshold``.  Only radii fully covered by
    the sampled block are considered.
    """
    if len(smap.s) == 0:
        raise InvalidArgumentError("empty spectral map")
    nx, ny = smap.nx, smap.ny
    half = (nx > 0) | ((nx == 0) & (ny > 0))
    k = smap.k_norm[half]
    s = smap.s[half]
    complete = 2 * math.pi * smap.n_max / max(smap.box)
    inside = k <= complete * (1 + 1e-12)
    k, s = k[inside], s[inside]
    order = np.argsort(k, kind="stable")
    k, s = k[order], s[order]

    bad = np.nonzero(s > zero_threshold)[0]
    stop = bad[0] if len(bad) else len(k)
    if stop < len(k):
        # a shell is kept only if it passes entirely
        shell_r = k[stop]
        stop = int(np.searchsorted(k, shell_r * (1 - 1e-12), side="left"))
    if stop == 0:
        return StealthSummary(0.0, 0.0, 0, 0.0)
    return StealthSummary(
        chi_achieved=stop / (DIMENSION * n),
        k_c=float(k[stop - 1]),
        m_constrained=int(stop),
        max_s_inside=float(s[:stop].max()),
    )


def number_variance(pattern: PointPattern, radii, n_windows: int = 2000, seed: int = 0):
    """Monte-Carlo number variance in periodic disks.

    Window centers are drawn uniformly in the box; each radius uses the
    same centers.  The centers come from a stream keyed on ``(seed, 1)``,
    so they never replay the draws of a layout generated with the same
    integer seed.

    Returns
    -------
    radii, variance, mean : ndarray
        ``variance[i]`` is the sample variance of the count in disks of
        radius ``radii[i]`` and ``mean[i]`` the average count.
    """
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    half_box = 0.5 * min(pattern.box)
    if (radii >= half_box).any() or (radii < 0).any():
        raise InvalidArgumentError(f"radii must lie in [0, {half_box}) (half the box)")
    if n_windows < 1:
        raise InvalidArgumentError("n_windows must be >= 1")
    rng = np.random.default_rng((seed, 1))
    box = np.asarray(pattern.box)
    centers = np.minimum(rng.random((n_windows, 2)) * box, np.nextafter(box, 0))
    tree = cKDTree(pattern.points, boxsize=pattern.box)
    variance = np.empty(len(radii))
    mean = np.empty(len(radii))
    for i, r in enumerate(radii):
        counts = tree.query_ball_point(centers, r, return_length=True)
        variance[i] = counts.var()
        mean[i] = counts.mean()
    return radii, variance, mean


def growth_exponent(radii, variance) -> float:
    """Least-squares slope of ``log(variance)`` against ``log(R)``."""
    radii = np.asarray(radii, dtype=float)
    variance = np.asarray(variance, dtype=float)
    ok = (radii > 0) & (variance > 0)
    if ok.sum() < 2:
        raise InvalidArgumentError("need at least two positive samples")
    slope, _ = np.polyfit(np.log(radii[ok]), np.log(variance[ok]), 1)
    return float(slope)
