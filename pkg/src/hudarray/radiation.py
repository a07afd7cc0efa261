"""
Far-field directivity of planar phased arrays.

Angles follow the array convention: ``theta`` is the elevation measured
from boresight (+z) and ``phi`` the azimuth in the array plane.  Cut
planes use a signed ``theta`` in ``[-90, 90]`` degrees at fixed ``phi``,
so negative ``theta`` points along ``phi + 180``.  The observation
wavevector is ``k = (2*pi*f/c) * sin(theta) * (cos(phi), sin(phi))``.

Patterns are stored as linear power relative to their own maximum;
``level_db`` converts on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import find_peaks
from scipy.special import j1

from .errors import InvalidArgumentError
from .pattern import PointPattern

SOUND_SPEED = 343.0
DB_FLOOR = -120.0
MAIN_LOBE_HALFWIDTH = math.radians(5.0)
DELAY_RESOLUTION = 0.8e-6


@dataclass(frozen=True)
class SteeringTarget:
    theta_s: float
    phi_s: float
    frequency: float
    sound_speed: float = SOUND_SPEED

    def __post_init__(self):
        if not self.frequency > 0:
            raise InvalidArgumentError("frequency must be positive")
        if not self.sound_speed > 0:
            raise InvalidArgumentError("sound_speed must be positive")
        if not abs(self.theta_s) < math.pi / 2:
            raise InvalidArgumentError("steering elevation must satisfy |theta_s| < pi/2")

    @property
    def wavevector(self) -> np.ndarray:
        return np.array(observation_wavevector(self.theta_s, self.phi_s, self.frequency, self.sound_speed))


@dataclass(frozen=True)
class PistonElement:
    """Circular piston; ``amplitude`` and ``initial_phase`` only matter for
    finite-distance field sums."""

    radius: float = 0.005
    amplitude: float = 1.0
    initial_phase: float = 0.0

    def __post_init__(self):
        if self.radius < 0:
            raise InvalidArgumentError("piston radius must be >= 0")


@dataclass(frozen=True)
class DirectivityPattern:
    """Sampled far-field power on a ``(phi, theta)`` grid, max normalized to 1.

    ``power`` has shape ``(len(phi), len(theta))``.  A cut plane has a
    single ``phi``.
    """

    theta: np.ndarray
    phi: np.ndarray
    power: np.ndarray
    frequency: float
    label: str = ""

    def __post_init__(self):
        shape = (np.size(self.phi), np.size(self.theta))
        if np.shape(self.power) != shape:
            raise InvalidArgumentError(f"power must have shape {shape}, got {np.shape(self.power)}")

    @property
    def level_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10 * np.log10(self.power)

    def export_level_db(self) -> np.ndarray:
        return np.maximum(self.level_db, DB_FLOOR)

    @property
    def amplitude(self) -> np.ndarray:
        return np.sqrt(self.power)

    @property
    def is_cut(self) -> bool:
        return len(self.phi) == 1

    def cut(self) -> tuple[np.ndarray, np.ndarray]:
        """``(theta, level_db)`` of a single-cut pattern."""
        if not self.is_cut:
            raise InvalidArgumentError("pattern is not a single cut")
        return self.theta, self.level_db[0]

    def direction_cosines(self) -> tuple[np.ndarray, np.ndarray]:
        th, ph = np.meshgrid(self.theta, self.phi)
        return np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph)


def _normalized(power):
    peak = power.max()
    if not peak > 0:
        raise InvalidArgumentError("pattern has no radiated power")
    return power / peak


def cut_grid(step_deg: float = 0.1) -> np.ndarray:
    """Signed elevation grid over [-90, 90] degrees, in radians."""
    n = int(round(180.0 / step_deg))
    return np.radians(np.linspace(-90.0, 90.0, n + 1))


def hemisphere_grid(step_deg: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """``(theta, phi)`` with theta in [0, 90] and phi in [0, 360) degrees."""
    theta = np.radians(np.arange(0.0, 90.0 + step_deg / 2, step_deg))
    phi = np.radians(np.arange(0.0, 360.0, step_deg))
    return theta, phi


def wavenumber(frequency: float, c: float = SOUND_SPEED) -> float:
    return 2 * math.pi * frequency / c


def observation_wavevector(theta, phi, frequency, c=SOUND_SPEED):
    """In-plane wavevector ``(kx, ky)`` in rad/m seen from direction (theta, phi)."""
    k = wavenumber(frequency, c) * np.sin(theta)
    return k * np.cos(phi), k * np.sin(phi)


def steering_weights(pattern: PointPattern, target: SteeringTarget) -> np.ndarray:
    """Unit phase weights ``exp(-i k_s . r_j)`` with ``r_j`` relative to the box center."""
    ks = target.wavevector
    return np.exp(-1j * (pattern.centered() @ ks))


def quantize_delays(weights, frequency: float, resolution: float = DELAY_RESOLUTION) -> np.ndarray:
    """Snap each weight's phase to the nearest multiple of ``2*pi*f*resolution``.

    This mimics per-channel delay lines with a fixed time resolution.
    """
    if not resolution > 0:
        raise InvalidArgumentError("resolution must be positive")
    weights = np.asarray(weights, dtype=complex)
    step = 2 * math.pi * frequency * resolution
    phase = np.angle(weights)
    return np.abs(weights) * np.exp(1j * step * np.round(phase / step))


def _array_power(positions, weights, kx, ky):
    """``|sum_j w_j exp(i k.r_j)|^2 / N`` for flat ``kx``, ``ky`` arrays."""
    n = len(positions)
    out = np.empty(kx.shape)
    chunk = max(1, 4_000_000 // n)
    x, y = positions[:, 0], positions[:, 1]
    for start in range(0, len(kx), chunk):
        sl = slice(start, start + chunk)
        field = np.exp(1j * (np.outer(kx[sl], x) + np.outer(ky[sl], y))) @ weights
        out[sl] = (field.real ** 2 + field.imag ** 2) / n
    return out


def array_power(pattern: PointPattern, weights, theta, phi, frequency, c=SOUND_SPEED) -> np.ndarray:
    """Unnormalized ``|A|^2`` on the ``(phi, theta)`` grid, shape ``(len(phi), len(theta))``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if theta.size == 0 or phi.size == 0:
        raise InvalidArgumentError("angle grids must be nonempty")
    if weights is None:
        weights = np.ones(pattern.n, dtype=complex)
    weights = np.asarray(weights, dtype=complex)
    if weights.shape != (pattern.n,):
        raise InvalidArgumentError(f"expected {pattern.n} weights, got {weights.shape}")
    th, ph = np.meshgrid(theta, phi)
    kx, ky = observation_wavevector(th.ravel(), ph.ravel(), frequency, c)
    power = _array_power(pattern.centered(), weights, kx, ky)
    return power.reshape(th.shape)


def array_factor(pattern: PointPattern, weights, theta, phi, frequency, c=SOUND_SPEED) -> DirectivityPattern:
    """Normalized array factor (isotropic elements)."""
    power = array_power(pattern, weights, theta, phi, frequency, c)
    return DirectivityPattern(np.atleast_1d(theta).astype(float), np.atleast_1d(phi).astype(float),
                              _normalized(power), float(frequency), f"AF {pattern.label}")


def exclusion_radius(k_c: float, frequency: float, c: float = SOUND_SPEED) -> tuple[float, bool]:
    """Angular radius ``arcsin(k_c * lambda / 2pi)`` of the quiet zone.

    Returns ``(angle, saturated)``; ``saturated`` is True when the
    argument exceeds one, i.e. the quiet zone covers the hemisphere.
    """
    if k_c < 0:
        raise InvalidArgumentError("k_c must be >= 0")
    arg = k_c / wavenumber(frequency, c)
    if arg >= 1:
        return math.pi / 2, arg > 1
    return math.asin(arg), False


def element_directivity(elem: PistonElement, theta, frequency, c=SOUND_SPEED):
    """Circular-piston far-field amplitude ``2 J1(x) / x`` with ``x = k a sin(theta)``."""
    x = wavenumber(frequency, c) * elem.radius * np.sin(np.asarray(theta, dtype=float))
    small = np.abs(x) < 1e-8
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 - x ** 2 / 8, 2 * j1(safe) / safe)


def total_directivity(pattern, weights, elem: PistonElement, theta, phi, frequency, c=SOUND_SPEED) -> DirectivityPattern:
    """Element factor times array factor: power ``|D_f(theta)|^2 |A|^2``."""
    power = array_power(pattern, weights, theta, phi, frequency, c)
    df = element_directivity(elem, np.atleast_1d(theta), frequency, c)
    power = power * (df ** 2)[None, :]
    return DirectivityPattern(np.atleast_1d(theta).astype(float), np.atleast_1d(phi).astype(float),
                              _normalized(power), float(frequency), f"piston {pattern.label}")


def piston_field(pattern, weights, elem: PistonElement, observers, frequency, c=SOUND_SPEED) -> np.ndarray:
    """Complex pressure summed over all pistons at finite-distance observers.

    Each element contributes ``A D_f(theta_j) / d_j * exp(i(phase_j + k d_j))``
    where ``d_j`` and ``theta_j`` are the distance and off-normal angle from
    element ``j`` (in the z=0 plane, facing +z) to the observer.
    """
    observers = np.atleast_2d(np.asarray(observers, dtype=float))
    if weights is None:
        weights = np.ones(pattern.n, dtype=complex)
    pos = np.column_stack([pattern.centered(), np.zeros(pattern.n)])
    diff = observers[:, None, :] - pos[None, :, :]
    d = np.linalg.norm(diff, axis=-1)
    off_normal = np.arccos(np.clip(diff[..., 2] / d, -1, 1))
    k = wavenumber(frequency, c)
    df = element_directivity(elem, off_normal, frequency, c)
    phase = np.angle(weights)[None, :] + elem.initial_phase
    contrib = elem.amplitude * np.abs(weights)[None, :] * df / d * np.exp(1j * (phase + k * d))
    return contrib.sum(axis=1)


# --------------------------------------------------------------------------
# pattern metrics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LobeMetrics:
    """Summary levels of a directivity pattern (dB re. its maximum).

    ``exclusion_floor_db`` is NaN and ``exclusion_applicable`` False when
    the quiet zone does not extend past the main-lobe cap.
    """

    psll_db: float
    exclusion_floor_db: float
    beamwidth_deg: float
    theta_exc_deg: float
    exclusion_applicable: bool

    def to_dict(self) -> dict:
        def clean(v):
            return None if v is None or (isinstance(v, float) and math.isnan(v)) else float(v)

        return {
            "psll_db": clean(self.psll_db),
            "exclusion_floor_db": clean(self.exclusion_floor_db),
            "beamwidth_deg": clean(self.beamwidth_deg),
            "theta_exc_deg": clean(self.theta_exc_deg),
        }


def angular_separation(theta, phi, theta0, phi0):
    """Great-circle angle between directions (theta, phi) and (theta0, phi0)."""
    cosang = (np.cos(theta) * np.cos(theta0)
              + np.sin(theta) * np.sin(theta0) * np.cos(phi - phi0))
    return np.arccos(np.clip(cosang, -1.0, 1.0))


def beamwidth(theta, level_db, main_theta) -> float:
    """Full -3 dB width (radians) of the lobe containing ``main_theta`` in a cut."""
    i0 = int(np.argmin(np.abs(theta - main_theta)))
    ref = level_db[i0] - 3.0

    def edge(step):
        i = i0
        while 0 <= i + step < len(theta) and level_db[i + step] >= ref:
            i += step
        j = i + step
        if not 0 <= j < len(theta):
            return theta[i]
        # linear interpolation between the last sample above and the first below
        t = (level_db[i] - ref) / (level_db[i] - level_db[j])
        return theta[i] + t * (theta[j] - theta[i])

    return float(abs(edge(+1) - edge(-1)))


def metrics(pattern: DirectivityPattern, main_lobe_direction=(0.0, 0.0),
            main_lobe_halfwidth: float = MAIN_LOBE_HALFWIDTH, theta_exc: float | None = None) -> LobeMetrics:
    """Peak side lobe level, exclusion-zone floor and -3 dB beamwidth.

    The main-lobe cap is every sample within ``main_lobe_halfwidth`` (great
    circle) of ``main_lobe_direction``.  The exclusion zone is the disk of
    radius ``sin(theta_exc)`` around the main lobe in direction-cosine
    space, which is exactly the image of the spectral cutoff disk around
    the steering wavevector.
    """
    theta0, phi0 = main_lobe_direction
    th, ph = np.meshgrid(pattern.theta, pattern.phi)
    if pattern.is_cut:
        span = (pattern.theta.min() - 1e-9, pattern.theta.max() + 1e-9)
        signed = theta0 if math.isclose(math.cos(phi0 - pattern.phi[0]), 1, abs_tol=1e-9) else -theta0
        if not span[0] <= signed <= span[1]:
            raise InvalidArgumentError("main lobe direction lies outside the sampled cut")
    level = pattern.level_db
    sep = angular_separation(th, ph, theta0, phi0)
    outside = sep > main_lobe_halfwidth
    psll = float(level[outside].max()) if outside.any() else float("nan")

    floor = float("nan")
    applicable = False
    if theta_exc is not None and theta_exc > main_lobe_halfwidth:
        ux, uy = pattern.direction_cosines()
        u0 = math.sin(theta0) * np.array([math.cos(phi0), math.sin(phi0)])
        du = np.hypot(ux - u0[0], uy - u0[1])
        annulus = outside & (du <= math.sin(theta_exc))
        if annulus.any():
            floor = float(level[annulus].max())
            applicable = True

    bw = float("nan")
    if pattern.is_cut:
        signed = theta0 if math.isclose(math.cos(phi0 - pattern.phi[0]), 1, abs_tol=1e-9) else -theta0
        bw = math.degrees(beamwidth(pattern.theta, level[0], signed))
    return LobeMetrics(psll, floor, bw, math.degrees(theta_exc) if theta_exc is not None else float("nan"), applicable)


def sidelobe_peaks(theta, level_db, main_theta, halfwidth=MAIN_LOBE_HALFWIDTH) -> tuple[np.ndarray, np.ndarray]:
    """Local maxima of a cut lying outside the main-lobe cap.

    Returns ``(theta_peaks, level_peaks)``.  Monotone skirts are not
    lobes, so only interior local maxima count.
    """
    idx, _ = find_peaks(level_db)
    keep = np.abs(theta[idx] - main_theta) > halfwidth
    idx = idx[keep]
    return theta[idx], level_db[idx]


def with_label(pattern: DirectivityPattern, label: str) -> DirectivityPattern:
    return replace(pattern, label=label)


def spacing_frequency(pattern: PointPattern, c: float = SOUND_SPEED) -> float:
    """``f0``: frequency whose half wavelength equals the mean element spacing."""
    return c / (2 * pattern.mean_spacing)


def ring_profile(pattern: PointPattern, frequency, weights=None, center=(0.0, 0.0), c=SOUND_SPEED,
                 n_radial: int = 800, n_azimuth: int = 720):
    """Azimuthally averaged ``|A|^2 / N`` around ``center`` in direction-cosine space.

    Rings of radius ``u`` in ``(0, 1]`` around the direction cosines
    ``center`` are sampled in wavevector space, so parts of a ring outside
    the visible circle are still evaluated.  With unit weights the ring
    average tends to the mean structure factor (1 for a Poisson layout).

    Returns ``(u, mean_power)``.
    """
    u = np.linspace(0.0, 1.0, n_radial + 1)[1:]
    ang = np.linspace(0.0, 2 * math.pi, n_azimuth, endpoint=False)
    uu, aa = np.meshgrid(u, ang, indexing="ij")
    k = wavenumber(frequency, c)
    kx = k * (center[0] + uu * np.cos(aa))
    ky = k * (center[1] + uu * np.sin(aa))
    if weights is None:
        weights = np.ones(pattern.n, dtype=complex)
    power = _array_power(pattern.centered(), np.asarray(weights, dtype=complex), kx.ravel(), ky.ravel())
    return u, power.reshape(uu.shape).mean(axis=1)


def measured_exclusion_angle(pattern: PointPattern, frequency, c=SOUND_SPEED, level: float = 0.5,
                             skip_cells: float = 3.0, **ring_kw) -> float:
    """Quiet-zone radius read off the array factor (radians).

    The ring-averaged ``|A|^2 / N`` is scanned outward; the edge is the
    first radius where it reaches ``level`` (interpolated), ignoring the
    first ``skip_cells`` reciprocal-lattice cells where the finite
    aperture's own side lobes dominate.  Returns NaN if it never does.
    """
    u, ring = ring_profile(pattern, frequency, c=c, **ring_kw)
    start = skip_cells * 2 * math.pi / max(pattern.box) / wavenumber(frequency, c)
    hits = np.nonzero((u > start) & (ring >= level))[0]
    if len(hits) == 0:
        return float("nan")
    i = hits[0]
    if i == 0 or u[i - 1] <= start:
        ue = u[i]
    else:
        t = (level - ring[i - 1]) / (ring[i] - ring[i - 1])
        ue = u[i - 1] + t * (u[i] - u[i - 1])
    return math.asin(min(ue, 1.0))
