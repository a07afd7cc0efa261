"""
Secondary (difference-frequency) beam of a parametric loudspeaker.

Two predictors are provided, both working on cut-plane amplitude
directivities of the two primary beams:

* product model: ``D_d = D_1 * D_2``;
* convolution model: ``D_d = (D_1 * D_2) (x) D_W`` where ``D_W`` is the
  Westervelt directivity of collimated primaries and ``(x)`` is a linear
  convolution over the elevation angle.

Products and convolutions happen on linear amplitudes; results are
renormalized so the maximum is 0 dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .radiation import SOUND_SPEED, DirectivityPattern, wavenumber

# ISO 9613-1 reference atmosphere
REFERENCE_PRESSURE_KPA = 101.325
REFERENCE_TEMPERATURE_K = 293.15
TRIPLE_POINT_K = 273.16


@dataclass(frozen=True)
class Atmosphere:
    """Air state for absorption; defaults are 20 C, 50 % relative humidity."""

    temperature_c: float = 20.0
    relative_humidity: float = 50.0
    pressure_kpa: float = REFERENCE_PRESSURE_KPA


def default_attenuation(frequency: float, atmosphere: Atmosphere | None = None, override: float | None = None) -> float:
    """Pressure-amplitude absorption coefficient of air in Np/m.

    Uses the pure-tone atmospheric absorption formula of ISO 9613-1
    (oxygen and nitrogen vibrational relaxation plus classical loss).
    At 20 C / 50 % RH this gives roughly 1.3 dB/m at 40 kHz.  A non-None
    ``override`` is returned verbatim.
    """
    if override is not None:
        return float(override)
    if not 1e3 <= frequency <= 200e3:
        raise InvalidArgumentError(f"frequency {frequency} Hz outside [1 kHz, 200 kHz]")
    atm = atmosphere or Atmosphere()
    T = atm.temperature_c + 273.15
    pa = atm.pressure_kpa / REFERENCE_PRESSURE_KPA
    psat = 10 ** (-6.8346 * (TRIPLE_POINT_K / T) ** 1.261 + 4.6151)
    h = atm.relative_humidity * psat / pa  # molar concentration of water vapour, %
    tr = T / REFERENCE_TEMPERATURE_K
    fro = pa * (24 + 4.04e4 * h * (0.02 + h) / (0.391 + h))
    frn = pa * tr ** -0.5 * (9 + 280 * h * math.exp(-4.170 * (tr ** (-1 / 3) - 1)))
    f2 = frequency ** 2
    # the ISO expression in Np/m (multiply by 8.686 for dB/m)
    return f2 * (
        1.84e-11 / pa * tr ** 0.5
        + tr ** -2.5 * (
            0.01275 * math.exp(-2239.1 / T) / (fro + f2 / fro)
            + 0.1068 * math.exp(-3352.0 / T) / (frn + f2 / frn)
        )
    )


@dataclass(frozen=True)
class ParametricSetup:
    """Primary pair and absorption for a secondary-beam prediction.

    ``alpha1``/``alpha2`` default to :func:`default_attenuation` at the
    respective frequency when left as None.
    """

    f1: float
    f2: float
    alpha1: float | None = None
    alpha2: float | None = None
    sound_speed: float = SOUND_SPEED
    model: str = "convolution"

    def __post_init__(self):
        if not (self.f1 > 0 and self.f2 > 0):
            raise InvalidArgumentError("primary frequencies must be positive")
        if self.f1 == self.f2:
            raise InvalidArgumentError("primary frequencies must differ")
        if self.model not in ("product", "convolution"):
            raise InvalidArgumentError(f"unknown model {self.model!r}")
        if self.alpha1 is None:
            object.__setattr__(self, "alpha1", default_attenuation(self.f1))
        if self.alpha2 is None:
            object.__setattr__(self, "alpha2", default_attenuation(self.f2))
        if not (self.alpha1 > 0 and self.alpha2 > 0):
            raise InvalidArgumentError("attenuation rates must be positive")

    @property
    def difference_frequency(self) -> float:
        return abs(self.f1 - self.f2)

    @property
    def alpha_sum(self) -> float:
        return self.alpha1 + self.alpha2

    @property
    def k_difference(self) -> float:
        return abs(wavenumber(self.f1, self.sound_speed) - wavenumber(self.f2, self.sound_speed))


@dataclass(frozen=True)
class SecondaryPrediction:
    cut: DirectivityPattern
    model: str
    inputs: tuple[str, str]


def westervelt_kernel(theta, alpha_sum: float, k_d: float) -> np.ndarray:
    """``alpha_s / sqrt(alpha_s^2 + k_d^2 tan^4(theta))`` on an open-interval grid."""
    theta = np.asarray(theta, dtype=float)
    if (np.abs(theta) >= math.pi / 2).any():
        raise InvalidArgumentError("Westervelt directivity is singular at |theta| = pi/2")
    t2 = np.tan(theta) ** 2
    return alpha_sum / np.sqrt(alpha_sum ** 2 + (k_d * t2) ** 2)


def westervelt_directivity(setup: ParametricSetup, theta) -> np.ndarray:
    return westervelt_kernel(theta, setup.alpha_sum, setup.k_difference)


def _check_same_grid(d1: DirectivityPattern, d2: DirectivityPattern):
    if d1.theta.shape != d2.theta.shape or d1.phi.shape != d2.phi.shape:
        raise InvalidArgumentError("primary patterns are sampled on different grids")
    if not (np.allclose(d1.theta, d2.theta, rtol=0, atol=1e-12)
            and np.allclose(d1.phi, d2.phi, rtol=0, atol=1e-12)):
        raise InvalidArgumentError("primary patterns are sampled on different grids")


def _as_prediction(amplitude, template, frequency, model, d1, d2):
    power = amplitude ** 2
    peak = power.max()
    if not peak > 0:
        raise InvalidArgumentError("primary patterns have no overlap")
    cut = DirectivityPattern(template.theta, template.phi, power / peak, frequency,
                             f"{model}({d1.label} | {d2.label})")
    return SecondaryPrediction(cut, model, (d1.label, d2.label))


def product_model(d1: DirectivityPattern, d2: DirectivityPattern) -> SecondaryPrediction:
    """Pointwise amplitude product of the primary patterns (dB levels add)."""
    _check_same_grid(d1, d2)
    amp = d1.amplitude * d2.amplitude
    return _as_prediction(amp, d1, abs(d1.frequency - d2.frequency), "product", d1, d2)


def convolution_model(d1: DirectivityPattern, d2: DirectivityPattern, setup: ParametricSetup) -> SecondaryPrediction:
    """Product directivity convolved over theta with the Westervelt kernel.

    The kernel is sampled at every grid offset strictly inside
    ``(-90, 90)`` degrees and normalized to unit sum; the convolution
    output is truncated back to the input span.
    """
    _check_same_grid(d1, d2)
    if not d1.is_cut:
        raise InvalidArgumentError("convolution model works on a single cut plane")
    theta = d1.theta
    if len(theta) < 2:
        raise InvalidArgumentError("need at least two theta samples")
    step = np.diff(theta)
    if not np.allclose(step, step[0], rtol=1e-9, atol=1e-12) or not step[0] > 0:
        raise InvalidArgumentError("convolution model needs a uniform increasing theta grid")
    step = float(step[0])
    span = theta[-1] - theta[0]
    if abs(span / step - round(span / step)) > 1e-6:
        raise InvalidArgumentError("grid step must divide the cut span")
    half = int(math.ceil((math.pi / 2) / step)) - 1
    offsets = step * np.arange(-half, half + 1)
    kernel = westervelt_directivity(setup, offsets)
    kernel = kernel / kernel.sum()
    prod = (d1.amplitude * d2.amplitude)[0]
    full = np.convolve(prod, kernel, mode="full")
    amp = full[half:half + len(prod)][None, :]
    return _as_prediction(amp, d1, setup.difference_frequency, "convolution", d1, d2)


def predict(d1: DirectivityPattern, d2: DirectivityPattern, setup: ParametricSetup) -> SecondaryPrediction:
    """Dispatch on ``setup.model``."""
    if setup.model == "product":
        return product_model(d1, d2)
    return convolution_model(d1, d2, setup)
