"""Python interface to the fractal cutout simulator core."""

from ._core import (
    DomainError,
    InvalidSpaceError,
    PressureAnalyzer,
    Space,
    UnsupportedSpaceError,
    alpha_zero,
    average_density,
    covering_exponent,
    gamma_sweep,
    gamma_zero,
    load_space,
    load_space_file,
    martingale_check,
    spectrum,
    survival_estimate,
    survival_probability,
)

__all__ = [
    "DomainError",
    "InvalidSpaceError",
    "PressureAnalyzer",
    "Space",
    "UnsupportedSpaceError",
    "alpha_zero",
    "average_density",
    "covering_exponent",
    "gamma_sweep",
    "gamma_zero",
    "load_space",
    "load_space_file",
    "martingale_check",
    "spectrum",
    "survival_estimate",
    "survival_probability",
]

__version__ = "0.1.0"
