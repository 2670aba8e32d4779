"""Lifetime law of a single sensor.

A sensor that can afford ``p`` packets and sends them as a Poisson stream of
rate ``lam`` dies at the ``p``-th arrival, a gamma-distributed time, so its
survival past ``tau`` is an upper incomplete gamma value in ``lam * tau``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, InvalidModelError
from .models import FixedRangeEnergy
from .specfun import gaussian_ccdf, regularized_upper_gamma

__all__ = [
    "SensorSurvival",
    "survival_exact",
    "survival_floor",
    "survival_clt",
    "survival_fixed_range",
    "lifetime_time_driven",
]


@dataclass(frozen=True)
class SensorSurvival:
    """P(t_i >= tau) for a sensor with capacity ``p`` and rate ``lam``."""

    p: float
    lam: float
    tau: float
    s: float

    @classmethod
    def evaluate(cls, p, lam, tau):
        return cls(p, lam, tau, survival_exact(p, lam, tau))


def _check(p, lam, tau):
    if not (math.isfinite(p) and p > 0):
        raise DomainError(f"packet capacity must be positive, got {p}")
    if not (math.isfinite(lam) and lam > 0):
        raise DomainError(f"rate must be positive, got {lam}")
    if not (math.isfinite(tau) and tau >= 0):
        raise DomainError(f"lifetime threshold must be nonnegative, got {tau}")


def survival_exact(p, lam, tau):
    """Survival with a real-valued capacity: 1 - P(p, lam * tau).

    The fractional part of ``p`` is kept, trading exactness for a law that
    is smooth in the node position. :func:`survival_floor` is the exact
    integer-packet version.
    """
    _check(p, lam, tau)
    return regularized_upper_gamma(p, lam * tau)


def survival_floor(p, lam, tau):
    """Survival when exactly floor(p) packets are sent.

    A node that cannot afford a single packet dies at time 0, which is
    still ">= tau" at tau = 0.
    """
    _check(p, lam, tau)
    m = math.floor(p)
    if tau == 0:
        return 1.0
    if m == 0:
        return 0.0
    return regularized_upper_gamma(m, lam * tau)


def survival_clt(p, lam, tau):
    """Normal approximation: death time ~ N(p / lam, p / lam^2)."""
    _check(p, lam, tau)
    return gaussian_ccdf((lam * tau - p) / math.sqrt(p))


def survival_fixed_range(energy: FixedRangeEnergy, lam, tau):
    """Survival when every node transmits to the same fixed range."""
    if not isinstance(energy, FixedRangeEnergy):
        raise InvalidModelError("survival_fixed_range needs a FixedRangeEnergy model")
    return survival_exact(energy.capacity, lam, tau)


def lifetime_time_driven(p, period):
    """Deterministic lifetime floor(p) * period of a periodically reporting node."""
    if not (math.isfinite(p) and p > 0):
        raise DomainError(f"packet capacity must be positive, got {p}")
    if not (math.isfinite(period) and period > 0):
        raise DomainError(f"period must be positive, got {period}")
    return math.floor(p) * period
