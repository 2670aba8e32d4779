"""Per-packet energy cost and packet-generation models.

Units are SI joules and meters; time is in hours throughout, so rates are
packets per hour.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import DomainError

__all__ = [
    "AdjustableEnergy",
    "FixedRangeEnergy",
    "EnergyModel",
    "Poisson",
    "PositionPoisson",
    "TimeDriven",
    "TrafficModel",
    "fold_bit_constants",
    "packet_energy",
    "packet_capacity",
    "sample_interarrival",
]


def fold_bit_constants(e_t, e_o, packet_bits):
    """Per-bit constants (J/bit/m^alpha, J/bit) to per-packet ``(k, c)``."""
    return packet_bits * e_t, packet_bits * e_o


def _check_energy(k, c, alpha, initial_energy):
    for name, value in (("k", k), ("c", c), ("alpha", alpha), ("initial_energy", initial_energy)):
        if not (math.isfinite(value) and value > 0):
            raise DomainError(f"{name} must be positive and finite, got {value}")
    if not 2.0 <= alpha <= 4.0:
        warnings.warn(f"path-loss exponent {alpha} is outside the usual range [2, 4]", stacklevel=3)


@dataclass(frozen=True)
class AdjustableEnergy:
    """Transmit power adapted to the sink distance: e(d) = k d^alpha + c."""

    k: float
    c: float
    alpha: float
    initial_energy: float

    def __post_init__(self):
        _check_energy(self.k, self.c, self.alpha, self.initial_energy)

    @classmethod
    def from_bits(cls, e_t, e_o, packet_bits, alpha, initial_energy):
        k, c = fold_bit_constants(e_t, e_o, packet_bits)
        return cls(k, c, alpha, initial_energy)


@dataclass(frozen=True)
class FixedRangeEnergy:
    """Fixed transmit power reaching ``range_m``: every packet costs e(range_m)."""

    range_m: float
    k: float
    c: float
    alpha: float
    initial_energy: float

    def __post_init__(self):
        _check_energy(self.k, self.c, self.alpha, self.initial_energy)
        if not (math.isfinite(self.range_m) and self.range_m > 0):
            raise DomainError(f"range_m must be positive, got {self.range_m}")

    @classmethod
    def from_bits(cls, range_m, e_t, e_o, packet_bits, alpha, initial_energy):
        k, c = fold_bit_constants(e_t, e_o, packet_bits)
        return cls(range_m, k, c, alpha, initial_energy)

    @property
    def capacity(self):
        """Packet capacity p_f shared by every node."""
        return self.initial_energy / (self.k * self.range_m ** self.alpha + self.c)


EnergyModel = Union[AdjustableEnergy, FixedRangeEnergy]


@dataclass(frozen=True)
class Poisson:
    """Poisson packet generation with ``rate`` packets per hour."""

    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise DomainError(f"rate must be positive, got {self.rate}")

    def rate_at(self, d):
        return np.full_like(np.asarray(d, dtype=float), self.rate)


@dataclass(frozen=True)
class PositionPoisson:
    """Poisson generation whose rate depends on the distance to the sink."""

    rate_fn: Callable

    @classmethod
    def from_table(cls, distances, rates):
        """Piecewise-linear rate through ``(distance, rate)`` points, flat beyond the ends."""
        distances = np.asarray(distances, dtype=float)
        rates = np.asarray(rates, dtype=float)
        if distances.ndim != 1 or distances.shape != rates.shape or distances.size == 0:
            raise DomainError("rate table needs matching, nonempty distance and rate columns")
        if np.any(np.diff(distances) <= 0):
            raise DomainError("rate table distances must be strictly increasing")
        if np.any(rates <= 0) or not np.all(np.isfinite(rates)):
            raise DomainError("rate table rates must be positive")
        table = _RateTable(tuple(distances), tuple(rates))
        return cls(table)

    def rate_at(self, d):
        lam = np.asarray(self.rate_fn(np.asarray(d, dtype=float)), dtype=float)
        if np.any(~(lam > 0)):
            raise DomainError("position-dependent rate must be positive everywhere")
        return lam


@dataclass(frozen=True)
class _RateTable:
    distances: tuple
    rates: tuple

    def __call__(self, d):
        return np.interp(d, self.distances, self.rates)


@dataclass(frozen=True)
class TimeDriven:
    """One packet every ``period`` hours."""

    period: float

    def __post_init__(self):
        if not (math.isfinite(self.period) and self.period > 0):
            raise DomainError(f"period must be positive, got {self.period}")


TrafficModel = Union[Poisson, PositionPoisson, TimeDriven]


def packet_energy(energy: EnergyModel, d):
    """Energy in joules to send one packet from distance ``d`` meters."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0) or np.any(np.isnan(d)):
        raise DomainError("distance must be nonnegative")
    if isinstance(energy, FixedRangeEnergy):
        out = np.full_like(d, energy.k * energy.range_m ** energy.alpha + energy.c)
    else:
        out = energy.k * d ** energy.alpha + energy.c
    return out[()] if out.ndim == 0 else out


def packet_capacity(energy: EnergyModel, d):
    """Real-valued packet capacity E_i / e(d); the simulator takes its floor."""
    return energy.initial_energy / packet_energy(energy, d)


def sample_interarrival(traffic: TrafficModel, d, rng, size=None):
    """Hours between consecutive packets of a node at distance ``d``.

    Poisson variants use the exponential inverse CDF, -ln(1 - u) / rate.
    """
    if isinstance(traffic, TimeDriven):
        if size is None:
            return traffic.period
        return np.full(size, traffic.period)
    rate = float(traffic.rate_at(d)) if np.ndim(d) == 0 else traffic.rate_at(d)
    u = rng.random(size)
    return -np.log1p(-u) / rate
