"""Numerics for pinched hyperbolic surfaces: zeta products, Eisenstein series, scattering modes."""

from .errors import (
    BudgetExceeded,
    ConfigError,
    ConstructionError,
    ConvergenceWarning,
    DomainError,
    FitError,
    InsufficientData,
    NotHyperbolic,
    PinchlabError,
    PoleError,
    RemovableSingularityWarning,
)
from .wordlang import SurfaceSpec, build_pants, cyclic_model

__version__ = "0.1.0"
