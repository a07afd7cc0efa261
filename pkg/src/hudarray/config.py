"""Run configuration: physical scale, grids, generation and output settings.

Stored as an INI file with flat key/value sections::

    [physics]
    sound_speed = 343.0
    design_frequency = 40000.0
    ...

Every value round-trips exactly (floats are written with ``repr``).
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import InvalidArgumentError

_SECTIONS = {
    "physics": ("sound_speed", "design_frequency", "n_elements", "min_separation",
                "piston_radius", "temperature_c", "relative_humidity", "delay_resolution"),
    "grid": ("theta_step_deg", "hemisphere_step_deg", "n_max"),
    "generation": ("seed", "tolerance", "max_iterations", "restarts", "zero_threshold"),
    "output": ("output_dir",),
}


@dataclass(frozen=True)
class RunConfig:
    """Defaults reproduce the 200-element, 40 kHz (= 3 f0) array.

    ``design_frequency`` is three times ``f0``, the frequency whose half
    wavelength equals the mean element spacing; the default box side is
    derived from it so that ``N`` elements have that spacing on average.
    """

    sound_speed: float = 343.0
    design_frequency: float = 40e3
    n_elements: int = 200
    min_separation: float = 0.010
    piston_radius: float = 0.005
    temperature_c: float = 20.0
    relative_humidity: float = 50.0
    delay_resolution: float = 0.8e-6
    theta_step_deg: float = 0.1
    hemisphere_step_deg: float = 1.0
    n_max: int = 40
    seed: int = 0
    tolerance: float = 1e-10
    max_iterations: int = 5000
    restarts: int = 8
    zero_threshold: float = 1e-8
    output_dir: str = "."

    def __post_init__(self):
        for name in ("sound_speed", "design_frequency", "n_elements", "theta_step_deg",
                     "hemisphere_step_deg", "n_max", "tolerance", "max_iterations", "restarts",
                     "zero_threshold", "delay_resolution"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"config value {name} must be positive")
        for name in ("min_separation", "piston_radius", "relative_humidity"):
            if getattr(self, name) < 0:
                raise InvalidArgumentError(f"config value {name} must be >= 0")

    @property
    def f0(self) -> float:
        return self.design_frequency / 3

    @property
    def element_spacing(self) -> float:
        """Half the wavelength at ``f0``."""
        return self.sound_speed / (2 * self.f0)

    @property
    def box_length(self) -> float:
        return self.element_spacing * math.sqrt(self.n_elements)

    def updated(self, **changes) -> "RunConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


def _types():
    return {f.name: f.type for f in fields(RunConfig)}


def save_config(config: RunConfig, path) -> None:
    parser = configparser.ConfigParser()
    values = config.to_dict()
    for section, keys in _SECTIONS.items():
        parser[section] = {k: repr(values[k]) if isinstance(values[k], float) else str(values[k]) for k in keys}
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise InvalidArgumentError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(path, encoding="utf-8")
    types = _types()
    values = {}
    for section in parser.sections():
        for key, raw in parser[section].items():
            if key not in types:
                raise InvalidArgumentError(f"unknown config key {section}.{key}")
            kind = types[key]
            try:
                values[key] = int(raw) if kind == "int" else float(raw) if kind == "float" else raw
            except ValueError:
                raise InvalidArgumentError(f"bad value for {section}.{key}: {raw!r}") from None
    return RunConfig(**values)
