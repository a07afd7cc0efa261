"""
Point patterns for planar transducer layouts.

Every pattern lives in a periodic rectangular box ``[0, Lx) x [0, Ly)``
(square for anything a user creates; tiling may produce a rectangle).
All distances are evaluated with the minimum-image convention, and all
Fourier sums use the reciprocal lattice ``k = 2*pi*(nx/Lx, ny/Ly)``.

Stealthy hyperuniform layouts are produced by collective-coordinate
minimization: the sum of structure-factor values over every reciprocal
lattice vector inside a cutoff radius is driven to zero, with a soft
repulsion keeping elements apart by at least their physical diameter.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares, minimize
from scipy.spatial import cKDTree

from .errors import (
    ConvergenceError,
    InvalidArgumentError,
    PatternParseError,
    SeparationError,
)

logger = logging.getLogger(__name__)

DIMENSION = 2
FILE_MAGIC = "# hudarray pattern v1"


@dataclass(frozen=True)
class PointPattern:
    """Element positions (meters) in one period of a periodic box.

    Parameters
    ----------
    points : array-like, shape (N, 2)
        Coordinates; every value must lie in ``[0, L)`` along its axis.
    box : float or (float, float)
        Box side length(s) in meters.
    label : str
        Free-text provenance, e.g. ``"hud chi=0.5 seed=1"``.
    """

    points: np.ndarray
    box: tuple[float, float]
    label: str = ""

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1 and pts.size == 2:
            pts = pts.reshape(1, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidArgumentError(f"points must have shape (N, 2), got {pts.shape}")
        if pts.shape[0] < 1:
            raise InvalidArgumentError("a pattern needs at least one point")
        box = self.box
        if np.ndim(box) == 0:
            box = (float(box), float(box))
        box = (float(box[0]), float(box[1]))
        if not (box[0] > 0 and box[1] > 0 and np.isfinite(box).all()):
            raise InvalidArgumentError(f"box side lengths must be positive, got {box}")
        if not np.isfinite(pts).all():
            raise InvalidArgumentError("coordinates must be finite")
        if (pts < 0).any() or (pts[:, 0] >= box[0]).any() or (pts[:, 1] >= box[1]).any():
            raise InvalidArgumentError("all coordinates must lie in [0, L)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "box", box)
        if pts.shape[0] > 1:
            dist, pair = self.closest_pair()
            if dist <= 0:
                raise InvalidArgumentError(f"points {pair[0]} and {pair[1]} coincide")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def box_length(self) -> float:
        """Side of the square box; raises for rectangular (tiled) boxes."""
        if self.box[0] != self.box[1]:
            raise InvalidArgumentError(f"box {self.box} is not square")
        return self.box[0]

    @property
    def density(self) -> float:
        return self.n / (self.box[0] * self.box[1])

    @property
    def mean_spacing(self) -> float:
        """``sqrt(area / N)``: the average element spacing of the layout."""
        return math.sqrt(self.box[0] * self.box[1] / self.n)

    def centered(self) -> np.ndarray:
        """Coordinates relative to the box center."""
        return self.points - 0.5 * np.asarray(self.box)

    def _tree(self) -> cKDTree:
        return cKDTree(self.points, boxsize=self.box)

    def nearest_neighbor_distances(self) -> np.ndarray:
        """Periodic nearest-neighbor distance of every point.

        A point's own periodic image (at ``min(Lx, Ly)``) counts as a
        neighbor, which keeps the value finite for ``N == 1``.
        """
        self_image = min(self.box)
        if self.n == 1:
            return np.array([self_image])
        d, _ = self._tree().query(self.points, k=2)
        return np.minimum(d[:, 1], self_image)

    def mean_nearest_neighbor_distance(self) -> float:
        return float(self.nearest_neighbor_distances().mean())

    def closest_pair(self) -> tuple[float, tuple[int, int]]:
        """Smallest periodic pairwise distance and the indices achieving it."""
        if self.n == 1:
            return float(min(self.box)), (0, 0)
        d, idx = self._tree().query(self.points, k=2)
        i = int(np.argmin(d[:, 1]))
        j = int(idx[i, 1])
        return float(d[i, 1]), (min(i, j), max(i, j))

    def translated(self, shift) -> "PointPattern":
        """Rigid shift modulo the box."""
        pts = _wrap(self.points + np.asarray(shift, dtype=float), self.box)
        return PointPattern(pts, self.box, self.label)


def _wrap(points, box):
    box = np.asarray(box, dtype=float)
    pts = np.mod(points, box)
    # mod of a tiny negative number can round up to exactly L
    return np.where(pts >= box, 0.0, pts)


# --------------------------------------------------------------------------
# simple generators
# --------------------------------------------------------------------------

def generate_periodic(rows: int, cols: int, spacing: float, box_length: float | None = None) -> PointPattern:
    """Rectangular lattice of ``rows x cols`` elements.

    The lattice is centered in a square box whose side defaults to
    ``max(rows, cols) * spacing``, so the periodic images continue the
    lattice.  Passing a larger ``box_length`` embeds the same finite
    lattice in an incommensurate box (useful for comparing with a HUD
    pattern on a shared reciprocal lattice).
    """
    if rows < 1 or cols < 1:
        raise InvalidArgumentError("rows and cols must be >= 1")
    if not spacing > 0:
        raise InvalidArgumentError(f"spacing must be positive, got {spacing}")
    side = max(rows, cols) * spacing
    if box_length is None:
        box_length = side
    elif box_length < side:
        raise InvalidArgumentError(f"box_length {box_length} smaller than lattice extent {side}")
    ix, iy = np.meshgrid(np.arange(cols), np.arange(rows), indexing="xy")
    x = (ix.ravel() - (cols - 1) / 2) * spacing + box_length / 2
    y = (iy.ravel() - (rows - 1) / 2) * spacing + box_length / 2
    pts = np.column_stack([x, y])
    return PointPattern(pts, box_length, f"periodic {rows}x{cols} spacing={spacing:g}")


def generate_random(n: int, box_length: float, seed: int) -> PointPattern:
    """``n`` i.i.d. uniform points (a binomial/Poisson-like control)."""
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    if not box_length > 0:
        raise InvalidArgumentError("box_length must be positive")
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2)) * box_length
    pts = np.minimum(pts, np.nextafter(box_length, 0.0))
    return PointPattern(pts, box_length, f"random n={n} seed={seed}")


def tile(sub: PointPattern, reps_x: int, reps_y: int) -> PointPattern:
    """Periodic replication of ``sub``; copy (i, j) is shifted by (i*Lx, j*Ly).

    The result's box is ``(reps_x*Lx, reps_y*Ly)``, which is rectangular
    whenever ``reps_x != reps_y``.
    """
    if reps_x < 1 or reps_y < 1:
        raise InvalidArgumentError("reps must be >= 1")
    lx, ly = sub.box
    shifts = np.array([(i * lx, j * ly) for j in range(reps_y) for i in range(reps_x)])
    pts = (sub.points[None, :, :] + shifts[:, None, :]).reshape(-1, 2)
    label = sub.label if reps_x == reps_y == 1 else f"{sub.label} tiled {reps_x}x{reps_y}"
    return PointPattern(pts, (reps_x * lx, reps_y * ly), label)


# --------------------------------------------------------------------------
# stealthy hyperuniform generation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StealthyTargetSpec:
    """Request for a stealthy hyperuniform layout.

    ``chi`` is the stealthy parameter (fraction of constrained degrees of
    freedom); ``min_separation`` is the physical element diameter.  A
    ``chi`` so small that fewer than one constraint is requested yields an
    unconstrained (random, separation-relaxed) pattern.
    """

    n: int
    chi: float
    box_length: float
    min_separation: float = 0.0
    seed: int = 0
    tolerance: float = 1e-10
    max_iterations: int = 5000
    restarts: int = 8

    def __post_init__(self):
        if self.n < 2:
            raise InvalidArgumentError("n must be >= 2 for a stealthy pattern")
        if not 0 < self.chi <= 0.5:
            raise InvalidArgumentError(f"chi must be in (0, 0.5], got {self.chi}")
        if not self.box_length > 0:
            raise InvalidArgumentError("box_length must be positive")
        if self.min_separation < 0:
            raise InvalidArgumentError("min_separation must be >= 0")
        if self.min_separation * math.sqrt(self.n) >= self.box_length:
            raise InvalidArgumentError(
                f"min_separation {self.min_separation} infeasible for n={self.n} in box {self.box_length}"
            )
        if not self.tolerance > 0:
            raise InvalidArgumentError("tolerance must be positive")
        if self.max_iterations < 1 or self.restarts < 1:
            raise InvalidArgumentError("max_iterations and restarts must be >= 1")


@dataclass(frozen=True)
class OptimizationReport:
    objective: float
    penalty: float
    iterations: int
    restarts_used: int
    k_c: float
    m_constrained: int
    chi_requested: float
    chi_achieved: float
    seed: int


def _half_plane_indices(radius_sq: float) -> np.ndarray:
    """Integer vectors with 0 < |n|^2 <= radius_sq, one of each +/- pair."""
    m = int(math.isqrt(int(math.floor(radius_sq)))) + 1
    n = np.arange(-m, m + 1)
    nx, ny = np.meshgrid(n, n, indexing="ij")
    nx, ny = nx.ravel(), ny.ravel()
    keep = ((nx > 0) | ((nx == 0) & (ny > 0))) & (nx * nx + ny * ny <= radius_sq)
    idx = np.column_stack([nx[keep], ny[keep]])
    order = np.lexsort((idx[:, 1], idx[:, 0], (idx ** 2).sum(1)))
    return idx[order]


def constrained_shell(chi: float, n: int) -> tuple[int, int]:
    """Squared index radius and constraint count ``M`` for a requested ``chi``.

    The smallest lattice shell with ``M >= chi*N*d`` is chosen, then
    stepped inward while ``2*M >= d*(N - 1)``: each half-plane vector
    fixes two real numbers, and beyond that count the zero set is not
    generically reachable from a random start.
    """
    required = chi * n * DIMENSION
    if required < 1:
        return 0, 0
    r2 = 0
    m = 0
    shells = []
    while m < required:
        r2 += 1
        count = len(_half_plane_indices(r2))
        if count > m:
            shells.append((r2, count))
        m = count
    while shells and 2 * shells[-1][1] >= DIMENSION * (n - 1):
        shells.pop()
    if not shells:
        return 0, 0
    return shells[-1]


def constrained_wavevectors(chi: float, n: int, box_length: float) -> tuple[np.ndarray, float]:
    """Half-plane reciprocal-lattice vectors constrained for ``chi``.

    Returns
    -------
    k : ndarray, shape (M, 2)
        Wavevectors in rad/m.
    k_c : float
        Cutoff radius in rad/m (0 when nothing is constrained).
    """
    r2, _ = constrained_shell(chi, n)
    if r2 == 0:
        return np.zeros((0, 2)), 0.0
    idx = _half_plane_indices(r2)
    scale = 2 * math.pi / box_length
    return idx * scale, math.sqrt(r2) * scale


def stealth_objective(points, k_vectors) -> tuple[float, np.ndarray]:
    """Sum of ``S(k)`` over ``k_vectors`` and its gradient w.r.t. ``points``.

    ``S(k) = |sum_n exp(i k.r_n)|^2 / N``.  Units follow the inputs
    (positions in meters with k in rad/m, or any consistent pair).
    """
    points = np.asarray(points, dtype=float)
    k_vectors = np.asarray(k_vectors, dtype=float)
    n = points.shape[0]
    if len(k_vectors) == 0:
        return 0.0, np.zeros_like(points)
    phase = np.exp(1j * (points @ k_vectors.T))
    rho = phase.sum(axis=0)
    value = float((rho.real ** 2 + rho.imag ** 2).sum() / n)
    grad = -(2.0 / n) * (np.imag(phase * np.conj(rho)) @ k_vectors)
    return value, grad


def _overlap_pairs(p, reach):
    tree = cKDTree(_wrap(p, (1.0, 1.0)), boxsize=1.0)
    return tree.query_pairs(reach, output_type="ndarray")


def _separation_penalty(p, pairs, reach):
    """Sum over pairs of (1 - r/reach)^2 for r < reach, unit box."""
    grad = np.zeros_like(p)
    if len(pairs) == 0:
        return 0.0, grad
    i, j = pairs[:, 0], pairs[:, 1]
    d = p[i] - p[j]
    d -= np.round(d)
    r = np.sqrt((d ** 2).sum(axis=1))
    active = r < reach
    if not active.any():
        return 0.0, grad
    i, j, d, r = i[active], j[active], d[active], r[active]
    t = 1.0 - r / reach
    g = (-2.0 * t / (reach * r))[:, None] * d
    np.add.at(grad, i, g)
    np.add.at(grad, j, -g)
    return float((t ** 2).sum()), grad


class _Stop(Exception):
    pass


def _relax(p0, k_unit, reach, weight, max_iterations, target):
    """First stage: L-BFGS on objective + repulsion, unit box coordinates."""
    n = p0.shape[0]

    def fun(x):
        p = x.reshape(n, 2)
        val, grad = stealth_objective(p, k_unit)
        if reach > 0:
            pen, pgrad = _separation_penalty(p, _overlap_pairs(p, reach), reach)
            val += weight * pen
            grad = grad + weight * pgrad
        return val, grad.ravel()

    def stop_early(intermediate_result):
        if intermediate_result.fun <= target:
            raise StopIteration

    res = minimize(
        fun,
        p0.ravel(),
        jac=True,
        method="L-BFGS-B",
        callback=stop_early,
        options={"maxiter": max_iterations, "maxcor": 30, "ftol": 0.0, "gtol": 0.0},
    )
    return res.x.reshape(n, 2), int(res.nit)


def _polish(p, k_unit, reach, weight):
    """Second stage: Levenberg-Marquardt-style least squares on Re/Im rho(k).

    Residuals are ``rho(k)/sqrt(N)`` (real and imaginary parts) plus the
    repulsion hinge on pairs that were within two reaches when polishing
    started; their squared sum equals the first-stage objective.
    """
    n = p.shape[0]
    m = len(k_unit)
    pairs = _overlap_pairs(p, 2 * reach) if reach > 0 else np.zeros((0, 2), dtype=int)
    i, j = (pairs[:, 0], pairs[:, 1]) if len(pairs) else (np.zeros(0, int), np.zeros(0, int))
    sw = math.sqrt(weight)
    norm = 1.0 / math.sqrt(n)

    def pair_geometry(q):
        d = q[i] - q[j]
        d -= np.round(d)
        return d, np.sqrt((d ** 2).sum(axis=1))

    def residuals(x):
        q = x.reshape(n, 2)
        rho = np.exp(1j * (q @ k_unit.T)).sum(axis=0) * norm
        _, r = pair_geometry(q)
        hinge = sw * np.maximum(0.0, 1.0 - r / reach) if len(i) else np.zeros(0)
        return np.concatenate([rho.real, rho.imag, hinge])

    def jacobian(x):
        q = x.reshape(n, 2)
        dphase = (1j * np.exp(1j * (q @ k_unit.T)) * norm).T  # (M, N)
        jac = np.zeros((2 * m + len(i), n, 2))
        jac[:m] = dphase.real[:, :, None] * k_unit[:, None, :]
        jac[m:2 * m] = dphase.imag[:, :, None] * k_unit[:, None, :]
        if len(i):
            d, r = pair_geometry(q)
            g = (-sw / reach) * d / r[:, None] * (r < reach)[:, None]
            rows = 2 * m + np.arange(len(i))
            jac[rows, i] = g
            jac[rows, j] = -g
        return jac.reshape(len(jac), -1)

    res = least_squares(residuals, p.ravel(), jac=jacobian, method="trf",
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=300)
    return res.x.reshape(n, 2), int(res.nfev)


def generate_stealthy(spec: StealthyTargetSpec, penalty_weight: float = 1.0) -> tuple[PointPattern, OptimizationReport]:
    """Stealthy hyperuniform pattern by collective-coordinate minimization.

    Each attempt starts from uniform random positions, relaxes with
    L-BFGS (objective plus soft repulsion), then polishes the structure
    factor zeros with a least-squares solver.  The result is accepted
    only if the independently re-evaluated objective is below
    ``spec.tolerance`` and the hard minimum separation holds; otherwise
    a fresh random start is drawn, up to ``spec.restarts`` attempts.

    Raises
    ------
    ConvergenceError
        No attempt reached the tolerance.
    SeparationError
        Attempts converged but none respected ``min_separation``.
    """
    n, L = spec.n, spec.box_length
    r2, m = constrained_shell(spec.chi, n)
    k_phys, k_c = constrained_wavevectors(spec.chi, n, L)
    k_unit = k_phys * L
    # small margin so the soft repulsion enforces the hard bound exactly
    reach = 1.02 * spec.min_separation / L
    rng = np.random.default_rng(spec.seed)

    best = None  # (objective, points_m)
    sep_fail = None  # (distance, pair)
    total_iter = 0
    for attempt in range(spec.restarts):
        p0 = rng.random((n, 2))
        p, nit = _relax(p0, k_unit, reach, penalty_weight, spec.max_iterations, spec.tolerance * 1e-2)
        total_iter += nit
        if m > 0:
            p, nfev = _polish(p, k_unit, reach, penalty_weight)
            total_iter += nfev
        pts = _wrap(p * L, (L, L))
        objective, _ = stealth_objective(pts, k_phys)
        logger.debug("attempt %d: objective %.3e after %d iterations", attempt, objective, nit)
        if best is None or objective < best[0]:
            best = (objective, pts)
        if objective > spec.tolerance:
            continue
        candidate = PointPattern(pts, L, f"hud n={n} chi={spec.chi:g} seed={spec.seed}")
        dist, pair = candidate.closest_pair()
        if dist < spec.min_separation:
            if sep_fail is None or dist > sep_fail[0]:
                sep_fail = (dist, pair)
            continue
        penalty = 0.0
        if reach > 0:
            penalty, _ = _separation_penalty(pts / L, _overlap_pairs(pts / L, reach), reach)
        report = OptimizationReport(
            objective=objective,
            penalty=penalty,
            iterations=total_iter,
            restarts_used=attempt,
            k_c=k_c,
            m_constrained=m,
            chi_requested=spec.chi,
            chi_achieved=m / (DIMENSION * n),
            seed=spec.seed,
        )
        return candidate, report

    if sep_fail is not None:
        dist, pair = sep_fail
        raise SeparationError(
            f"closest pair {pair} at {dist:.6g} m violates min_separation {spec.min_separation:g} m",
            pair=pair, distance=dist,
        )
    raise ConvergenceError(
        f"objective {best[0]:.3e} above tolerance {spec.tolerance:.1e} after {spec.restarts} attempts",
        best_objective=best[0], best_points=best[1],
    )


# --------------------------------------------------------------------------
# file I/O
# --------------------------------------------------------------------------

def save_pattern(pattern: PointPattern, path) -> None:
    """Write ``pattern`` in the v1 text format (square boxes only)."""
    L = pattern.box_length
    lines = [f"{FILE_MAGIC} L={L!r} N={pattern.n}"]
    lines += [f"{x:.17g} {y:.17g}" for x, y in pattern.points]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_pattern(path) -> PointPattern:
    """Read a v1 pattern file, validating every row."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise PatternParseError("no points", line=None)
    header = lines[0].strip()
    if not header.startswith(FILE_MAGIC):
        raise PatternParseError(f"missing header '{FILE_MAGIC} L=... N=...'", line=1)
    fields = dict(tok.split("=", 1) for tok in header[len(FILE_MAGIC):].split() if "=" in tok)
    try:
        L = float(fields["L"])
        n_declared = int(fields["N"])
    except (KeyError, ValueError):
        raise PatternParseError("header must carry L=<meters> N=<count>", line=1) from None
    if not L > 0:
        raise PatternParseError(f"box length must be positive, got {L}", line=1)

    pts = []
    seen = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        row = raw.strip()
        if not row or row.startswith("#"):
            continue
        parts = row.split()
        if len(parts) != 2:
            raise PatternParseError(f"expected 'x y', got {row!r}", line=lineno)
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            raise PatternParseError(f"non-numeric coordinate in {row!r}", line=lineno) from None
        if not (0 <= x < L and 0 <= y < L):
            raise PatternParseError(f"coordinate ({x}, {y}) outside [0, {L})", line=lineno)
        if (x, y) in seen:
            raise PatternParseError(f"duplicate of point on line {seen[(x, y)]}", line=lineno)
        seen[(x, y)] = lineno
        pts.append((x, y))
    if not pts:
        raise PatternParseError("no points", line=None)
    if len(pts) != n_declared:
        raise PatternParseError(f"header declares N={n_declared} but file has {len(pts)} points", line=1)
    try:
        return PointPattern(np.array(pts), L, f"loaded:{path.name}")
    except InvalidArgumentError as exc:
        raise PatternParseError(str(exc)) from None
