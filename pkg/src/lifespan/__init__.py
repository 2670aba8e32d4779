"""Probability that a wireless sensor network lasts a given time."""
from .errors import (ConfigError, ConvergenceError, DomainError, InvalidModelError,
                     LifespanError)
from .geometry import Circle, RegularPolygon
from .models import AdjustableEnergy, FixedRangeEnergy, Poisson, PositionPoisson, TimeDriven
from .multihop import RingConfig, multihop_ccdf
from .network import LifetimeQuery, SurvivalMoments, network_ccdf, network_pdf, survival_moments

__version__ = "0.1.0"

__all__ = [
    "AdjustableEnergy",
    "Circle",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "FixedRangeEnergy",
    "InvalidModelError",
    "LifespanError",
    "LifetimeQuery",
    "Poisson",
    "PositionPoisson",
    "RegularPolygon",
    "RingConfig",
    "SurvivalMoments",
    "TimeDriven",
    "multihop_ccdf",
    "network_ccdf",
    "network_pdf",
    "survival_moments",
]
