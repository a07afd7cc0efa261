"""Stealthy hyperuniform transducer layouts, array directivity and
parametric-loudspeaker secondary-beam prediction."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    HudArrayError,
    InvalidArgumentError,
    PatternParseError,
    SeparationError,
)
from .pattern import (  # noqa: E402
    OptimizationReport,
    PointPattern,
    StealthyTargetSpec,
    generate_periodic,
    generate_random,
    generate_stealthy,
    load_pattern,
    save_pattern,
    tile,
)
from .spectral import SpectralMap, StealthSummary, number_variance, stealth_summary, structure_factor  # noqa: E402
from .radiation import (  # noqa: E402
    DirectivityPattern,
    PistonElement,
    SteeringTarget,
    array_factor,
    element_directivity,
    exclusion_radius,
    metrics,
    observation_wavevector,
    quantize_delays,
    steering_weights,
    total_directivity,
)
from .parametric import (  # noqa: E402
    ParametricSetup,
    SecondaryPrediction,
    convolution_model,
    default_attenuation,
    product_model,
    westervelt_directivity,
)
from .config import RunConfig, load_config, save_config  # noqa: E402
