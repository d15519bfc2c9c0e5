"""Photon-pair radiation from orbiting dielectric and gravitating bodies."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    InvalidInputError,
    NumericalFailure,
    OutOfRegimeError,
    PairRadianceError,
    SingularInputError,
)
from .phase_space import angular_distribution, differential_rate, reduce_pair, spectrum
from .quadrature import IE, IM, dimensionless_integrals, integrate_reduced, mc_estimate
from .rates import (
    closed_form_rate,
    crosscheck_report,
    graviton_power,
    power_binary_dielectric_closed,
    power_binary_metric_closed,
    power_ratio,
    power_sphere_closed,
    total_rate_numeric,
)
from .sampler import sample_pairs
from .sources import (
    AlphaVariant,
    BinaryConfig,
    BinaryDielectricSource,
    BinaryMetricSource,
    SphereConfig,
    SphereSource,
)
from .special import Helicity, bessel_j, form_factor
from .units import CONSTANTS, M_SUN, OrbitInput, derive_orbit

__all__ = [
    "__version__", "AlphaVariant", "BinaryConfig", "BinaryDielectricSource", "BinaryMetricSource",
    "CONSTANTS", "ConfigError", "M_SUN", "Helicity", "IE", "IM", "InvalidInputError", "NumericalFailure",
    "OrbitInput", "OutOfRegimeError", "PairRadianceError", "SingularInputError", "SphereConfig",
    "SphereSource", "angular_distribution", "bessel_j", "closed_form_rate", "crosscheck_report",
    "derive_orbit", "differential_rate", "dimensionless_integrals", "form_factor", "graviton_power",
    "integrate_reduced", "mc_estimate", "power_binary_dielectric_closed",
    "power_binary_metric_closed", "power_ratio", "power_sphere_closed", "reduce_pair", "sample_pairs", "spectrum",
    "total_rate_numeric",
]
