"""Multi-hop networks partitioned into rings of width r around the sink.

Ring i relays the traffic of every ring outside it, split evenly across its
own nodes. Lifetime is decided by the first ring alone: it ends when a
``beta`` share of the first-ring nodes have died.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidModelError
from .geometry import AreaShape, Circle, distance_cdf
from .models import FixedRangeEnergy
from .specfun import binomial_log_pmf, gaussian_ccdf, regularized_upper_gamma

__all__ = [
    "RingConfig",
    "ring_count",
    "ring_probability",
    "ring_probabilities",
    "ring_rate",
    "first_ring_moments",
    "multihop_ccdf",
]


@dataclass(frozen=True)
class RingConfig:
    """Ring layout of ``nodes`` uniformly placed nodes with transmission range ``range_m``.

    ``rate`` is the per-node packet generation rate (packets per hour).
    """

    shape: AreaShape
    range_m: float
    nodes: int
    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.range_m) and self.range_m > 0):
            raise DomainError(f"range_m must be positive, got {self.range_m}")
        if int(self.nodes) != self.nodes or self.nodes < 1:
            raise DomainError(f"nodes must be a positive integer, got {self.nodes}")
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise DomainError(f"rate must be positive, got {self.rate}")

    @property
    def radius(self):
        return self.shape.circumradius


def ring_count(cfg: RingConfig) -> int:
    """n = ceil(R / r); the outermost ring is truncated when r does not divide R."""
    return max(1, math.ceil(cfg.radius / cfg.range_m * (1.0 - 1e-12)))


def ring_probability(cfg: RingConfig, i: int) -> float:
    """Probability that a uniformly placed node lands in ring ``i`` (1-based).

    For a circle and R a multiple of r this is r^2 (2i - 1) / R^2; in
    general it is the share of the area between radii (i-1) r and i r.
    """
    n = ring_count(cfg)
    if int(i) != i or not 1 <= i <= n:
        raise DomainError(f"ring index must be in 1..{n}, got {i}")
    r = cfg.range_m
    if isinstance(cfg.shape, Circle) and i < n:
        return r * r * (2 * i - 1) / cfg.radius ** 2
    outer = 1.0 if i == n else float(distance_cdf(cfg.shape, i * r))
    return outer - float(distance_cdf(cfg.shape, (i - 1) * r))


def ring_probabilities(cfg: RingConfig) -> np.ndarray:
    return np.array([ring_probability(cfg, i) for i in range(1, ring_count(cfg) + 1)])


def ring_rate(cfg: RingConfig, i: int, counts) -> float:
    """Per-node transmit rate in ring ``i``: own traffic plus everything from outside."""
    counts = [int(c) for c in counts]
    if sum(counts) != cfg.nodes:
        raise DomainError(f"ring counts sum to {sum(counts)}, expected {cfg.nodes}")
    if int(i) != i or not 1 <= i <= len(counts):
        raise DomainError(f"ring index must be in 1..{len(counts)}, got {i}")
    if counts[i - 1] == 0:
        raise DomainError(f"ring {i} is empty; its per-node rate is undefined")
    carried = cfg.nodes - sum(counts[: i - 1])
    return cfg.rate * carried / counts[i - 1]


def _check_energy(cfg, energy):
    if not isinstance(energy, FixedRangeEnergy):
        raise InvalidModelError("multi-hop analysis needs a FixedRangeEnergy model")
    if not math.isclose(energy.range_m, cfg.range_m, rel_tol=1e-12):
        raise DomainError(
            f"energy model range {energy.range_m} m differs from ring range {cfg.range_m} m")


def first_ring_moments(cfg: RingConfig, energy: FixedRangeEnergy, tau: float, n1: int,
                       *, capacity: str = "continuous") -> float:
    """Survival mean of a first-ring node given ``n1`` first-ring nodes."""
    _check_energy(cfg, energy)
    if n1 < 1:
        raise DomainError("the first ring is empty")
    p = energy.capacity
    if capacity == "floor":
        p = math.floor(p)
        if p == 0:
            return 1.0 if tau == 0 else 0.0
    elif capacity != "continuous":
        raise DomainError(f"capacity must be 'continuous' or 'floor', got {capacity!r}")
    lam1 = cfg.rate * cfg.nodes / n1
    return regularized_upper_gamma(p, lam1 * tau)


def multihop_ccdf(cfg: RingConfig, energy: FixedRangeEnergy, tau: float, beta: float,
                  *, capacity: str = "continuous", truncate_sd: float | None = None) -> float:
    """P(L >= tau) for the first ring, averaged over the binomial first-ring count.

    An empty first ring cannot reach the sink, so it contributes 0 for
    tau > 0; at tau = 0 the answer is 1.

    Args:
        truncate_sd: if given, only counts within this many standard
            deviations of N q_1 are summed.
    """
    _check_energy(cfg, energy)
    if not (math.isfinite(tau) and tau >= 0):
        raise DomainError(f"tau must be nonnegative, got {tau}")
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    if tau == 0:
        return 1.0
    n = cfg.nodes
    q1 = ring_probability(cfg, 1)
    lo, hi = 1, n
    if truncate_sd is not None:
        mean = n * q1
        sd = math.sqrt(n * q1 * (1.0 - q1))
        lo = max(1, math.floor(mean - truncate_sd * sd))
        hi = min(n, math.ceil(mean + truncate_sd * sd))
    terms = []
    for j in range(lo, hi + 1):
        log_w = binomial_log_pmf(n, j, q1)
        if log_w < -745.0:
            continue
        mu = first_ring_moments(cfg, energy, tau, j, capacity=capacity)
        a = 1.0 - beta - mu
        var = mu - mu * mu
        if var > 0.0:
            cond = gaussian_ccdf(math.sqrt(j) * a / math.sqrt(var))
        elif abs(a) <= 1e-12:
            cond = 0.5
        else:
            cond = 1.0 if a < 0 else 0.0
        terms.append(cond * math.exp(log_w))
    return min(1.0, math.fsum(terms))
