"""Deployment areas with the sink at the center.

Nodes are uniform over the area. For each shape this module gives the
density and CDF of the node-to-sink distance, the induced density of the
packet capacity p = E_i / (k d^alpha + c), and samplers for the simulator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import DomainError, InvalidModelError
from .models import AdjustableEnergy, EnergyModel, FixedRangeEnergy
from .specfun import QuadratureSpec, integrate

__all__ = [
    "Circle",
    "RegularPolygon",
    "AreaShape",
    "CapacitySupport",
    "distance_pdf",
    "distance_cdf",
    "capacity_support",
    "capacity_pdf",
    "capacity_cdf",
    "capacity_expectation",
    "sample_distance",
    "sample_distances",
]


@dataclass(frozen=True)
class Circle:
    radius: float

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise DomainError(f"radius must be positive, got {self.radius}")

    @classmethod
    def with_area(cls, area):
        return cls(math.sqrt(area / math.pi))

    @property
    def inradius(self):
        return self.radius

    @property
    def circumradius(self):
        return self.radius

    @property
    def area(self):
        return math.pi * self.radius ** 2


@dataclass(frozen=True)
class RegularPolygon:
    """Regular ``sides``-gon with edge length ``side`` meters, sink at the centroid."""

    sides: int
    side: float

    def __post_init__(self):
        if int(self.sides) != self.sides or self.sides < 3:
            raise DomainError(f"a polygon needs an integer number of sides >= 3, got {self.sides}")
        if not (math.isfinite(self.side) and self.side > 0):
            raise DomainError(f"side length must be positive, got {self.side}")

    @classmethod
    def with_area(cls, sides, area):
        """Polygon of the given area; used to compare shapes at equal size."""
        return cls(sides, math.sqrt(4.0 * area * math.tan(math.pi / sides) / sides))

    @property
    def inradius(self):
        return 0.5 * self.side / math.tan(math.pi / self.sides)

    @property
    def circumradius(self):
        return 0.5 * self.side / math.sin(math.pi / self.sides)

    @property
    def area(self):
        return 0.25 * self.sides * self.side ** 2 / math.tan(math.pi / self.sides)


AreaShape = Union[Circle, RegularPolygon]


@dataclass(frozen=True)
class CapacitySupport:
    """Range of packet capacities: farthest node (``lo``) to a node at the sink (``hi``)."""

    lo: float
    hi: float


# ---------------------------------------------------------------------------
# distance law
# ---------------------------------------------------------------------------

def _arc_fraction(shape, x):
    # share of the circle of radius x lying inside the shape, times 2*pi
    if isinstance(shape, Circle):
        return np.full_like(x, 2.0 * math.pi)
    ratio = np.clip(shape.inradius / np.maximum(x, shape.inradius), -1.0, 1.0)
    return 2.0 * math.pi - 2.0 * shape.sides * np.arccos(ratio)


def distance_pdf(shape: AreaShape, x):
    """Density of the node-to-sink distance, per meter."""
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x <= shape.circumradius)
    xs = np.where(inside, x, 0.0)
    out = np.where(inside, xs * _arc_fraction(shape, xs) / shape.area, 0.0)
    return out[()] if out.ndim == 0 else out


def distance_cdf(shape: AreaShape, x):
    """P(d <= x): area of the disk of radius x inside the shape, over the shape's area."""
    x = np.asarray(x, dtype=float)
    xs = np.clip(x, 0.0, shape.circumradius)
    covered = math.pi * xs ** 2
    if isinstance(shape, RegularPolygon):
        ri = shape.inradius
        outer = xs > ri
        xo = np.where(outer, xs, ri)
        # n circular segments cut off by the edges
        segment = xo ** 2 * np.arccos(ri / xo) - ri * np.sqrt(np.maximum(xo ** 2 - ri ** 2, 0.0))
        covered = covered - np.where(outer, shape.sides * segment, 0.0)
    out = np.where(x >= shape.circumradius, 1.0, covered / shape.area)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# capacity law
# ---------------------------------------------------------------------------

def _require_adjustable(energy):
    if isinstance(energy, FixedRangeEnergy):
        raise InvalidModelError(
            "capacity is deterministic under a fixed transmission range; it has no density")
    if not isinstance(energy, AdjustableEnergy):
        raise InvalidModelError(f"unsupported energy model {type(energy).__name__}")


def capacity_support(shape: AreaShape, energy: EnergyModel) -> CapacitySupport:
    _require_adjustable(energy)
    e = energy
    return CapacitySupport(e.initial_energy / (e.k * shape.circumradius ** e.alpha + e.c),
                           e.initial_energy / e.c)


def _capacity_density(shape, energy, x, d_pow):
    """f_p at capacities ``x`` whose distances satisfy d**alpha == d_pow."""
    e = energy
    base = 2.0 * e.initial_energy / (e.k * e.alpha * shape.area * x ** 2)
    base = base * d_pow ** ((2.0 - e.alpha) / e.alpha)
    if isinstance(shape, Circle):
        return math.pi * base
    d = d_pow ** (1.0 / e.alpha)
    ri = shape.inradius
    angle = np.where(d > ri, np.arccos(np.clip(ri / np.maximum(d, ri), -1.0, 1.0)), 0.0)
    return base * (math.pi - shape.sides * angle)


def capacity_pdf(shape: AreaShape, energy: EnergyModel, x):
    """Density of the packet capacity p, per packet; zero off the support."""
    _require_adjustable(energy)
    sup = capacity_support(shape, energy)
    x = np.asarray(x, dtype=float)
    inside = (x >= sup.lo) & (x < sup.hi)
    xs = np.where(inside, x, sup.lo)
    d_pow = (energy.initial_energy - energy.c * xs) / (energy.k * xs)
    out = np.where(inside, _capacity_density(shape, energy, xs, np.maximum(d_pow, 0.0)), 0.0)
    return out[()] if out.ndim == 0 else out


def capacity_cdf(shape: AreaShape, energy: EnergyModel, x):
    """P(p <= x), i.e. the probability that the node sits at distance >= d(x)."""
    _require_adjustable(energy)
    sup = capacity_support(shape, energy)
    x = np.asarray(x, dtype=float)
    xs = np.clip(x, sup.lo, sup.hi)
    d = np.maximum((energy.initial_energy - energy.c * xs) / (energy.k * xs), 0.0) ** (1.0 / energy.alpha)
    out = np.where(x <= sup.lo, 0.0, np.where(x >= sup.hi, 1.0, 1.0 - distance_cdf(shape, d)))
    return out[()] if out.ndim == 0 else out


def capacity_expectation(shape: AreaShape, energy: EnergyModel, g: Callable,
                         spec: QuadratureSpec | None = None) -> float:
    """E[g(p)] = integral of g(x) f_p(x) over the capacity support.

    The integral runs over the gap u = E_i/c - x, so the density near the
    singular upper end is evaluated from E_i - c x = c u without
    cancellation. Polygons are split where the nearest-edge circle begins.
    ``g`` must accept numpy arrays.
    """
    _require_adjustable(energy)
    e = energy
    sup = capacity_support(shape, energy)

    def integrand(u):
        x = sup.hi - u
        d_pow = e.c * u / (e.k * x)
        return g(x) * _capacity_density(shape, e, x, d_pow)

    width = sup.hi - sup.lo
    breaks = [0.0]
    if isinstance(shape, RegularPolygon):
        x_break = e.initial_energy / (e.k * shape.inradius ** e.alpha + e.c)
        breaks.append(sup.hi - x_break)
    breaks.append(width)
    return math.fsum(integrate(integrand, a, b, spec, vectorized=True)
                     for a, b in zip(breaks[:-1], breaks[1:]) if b > a)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _inside_polygon(shape, x, y):
    angles = 2.0 * math.pi * np.arange(shape.sides) / shape.sides
    proj = np.multiply.outer(x, np.cos(angles)) + np.multiply.outer(y, np.sin(angles))
    return np.all(proj <= shape.inradius * (1.0 + 1e-12), axis=-1)


def sample_distance(shape: AreaShape, rng) -> float:
    """One node-to-sink distance for a uniformly placed node.

    Only ``rng.random()`` is used, so any object providing it will do.
    """
    if isinstance(shape, Circle):
        return shape.radius * math.sqrt(rng.random())
    rc = shape.circumradius
    while True:
        r = rc * math.sqrt(rng.random())
        theta = 2.0 * math.pi * rng.random()
        if _inside_polygon(shape, r * math.cos(theta), r * math.sin(theta)):
            return r


def sample_distances(shape: AreaShape, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` i.i.d. distances; polygons by rejection from the circumscribed disk."""
    if isinstance(shape, Circle):
        return shape.radius * np.sqrt(rng.random(size))
    rc = shape.circumradius
    out = np.empty(size)
    filled = 0
    accept = shape.area / (math.pi * rc ** 2)
    while filled < size:
        batch = int((size - filled) / accept * 1.1) + 16
        r = rc * np.sqrt(rng.random(batch))
        theta = 2.0 * math.pi * rng.random(batch)
        keep = r[_inside_polygon(shape, r * np.cos(theta), r * np.sin(theta))]
        take = min(keep.size, size - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out
