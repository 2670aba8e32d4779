"""Single-hop network lifetime.

Each of N nodes survives past tau with probability mu (averaged over its
random position), so the number alive at tau is approximately normal with
mean N mu and variance N mu (1 - mu). The network achieves tau while at
least (1 - beta) N nodes are alive.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, DomainError, InvalidModelError
from .geometry import (AreaShape, RegularPolygon, capacity_cdf, capacity_expectation,
                       capacity_support, distance_pdf)
from .models import (AdjustableEnergy, EnergyModel, FixedRangeEnergy, Poisson,
                     PositionPoisson, TimeDriven, TrafficModel, packet_capacity)
from .sensor import survival_clt, survival_exact, survival_floor
from .specfun import QuadratureSpec, gaussian_ccdf, integrate, log_gamma_pdf

__all__ = [
    "SurvivalMoments",
    "LifetimeQuery",
    "Verdict",
    "BoundDirection",
    "CAPACITY_MODES",
    "survival_moments",
    "sensor_death_density",
    "network_ccdf",
    "network_pdf",
    "asymptotic_predict",
    "decay_rate",
    "asymptotic_error_bound",
    "hetero_bound_direction",
    "threshold_for_survival",
]

TIE_TOLERANCE = 1e-12
CAPACITY_MODES = ("continuous", "floor", "clt")
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class SurvivalMoments:
    """Mean of the survival indicator of a randomly placed node at ``tau``."""

    mu: float
    tau: float

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise DomainError(f"mu must lie in [0, 1], got {self.mu}")

    @property
    def sigma(self):
        return math.sqrt(self.mu - self.mu * self.mu)


@dataclass(frozen=True)
class LifetimeQuery:
    """Does a network of ``nodes`` nodes last ``tau`` hours before a ``beta`` share dies?

    ``beta = 1 / nodes`` asks about the first node death.
    """

    tau: float
    beta: float
    nodes: int

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau >= 0):
            raise DomainError(f"tau must be nonnegative, got {self.tau}")
        if not 0.0 < self.beta <= 1.0:
            raise DomainError(f"beta must lie in (0, 1], got {self.beta}")
        if int(self.nodes) != self.nodes or self.nodes < 1:
            raise DomainError(f"nodes must be a positive integer, got {self.nodes}")


class Verdict(enum.Enum):
    ACHIEVES_ALMOST_SURELY = "ACHIEVES"
    FAILS_ALMOST_SURELY = "FAILS"
    CRITICAL = "CRITICAL"


class BoundDirection(enum.Enum):
    UPPER_BOUND = "UPPER"
    LOWER_BOUND = "LOWER"
    EXACT = "EXACT"


# ---------------------------------------------------------------------------
# mu
# ---------------------------------------------------------------------------

def _sensor_law(capacity):
    if capacity == "continuous":
        return survival_exact
    if capacity == "floor":
        return survival_floor
    if capacity == "clt":
        return survival_clt
    raise DomainError(f"capacity mode must be one of {CAPACITY_MODES}, got {capacity!r}")


def _floor_weights(shape, energy):
    """Integer capacities m and P(floor(p) = m) for an adjustable-power node."""
    sup = capacity_support(shape, energy)
    m = np.arange(math.floor(sup.lo), math.floor(sup.hi) + 1)
    weights = np.diff(capacity_cdf(shape, energy, np.append(m, m[-1] + 1).astype(float)))
    keep = weights > 0
    return m[keep], weights[keep]


def _distance_breaks(shape, energy, capacity):
    points = []
    if isinstance(shape, RegularPolygon):
        points.append(shape.inradius)
    if capacity == "floor" and isinstance(energy, AdjustableEnergy):
        # floor(p(d)) jumps wherever p(d) crosses an integer
        m, _ = _floor_weights(shape, energy)
        e = energy
        d = ((e.initial_energy / m[m > 0] - e.c) / e.k) ** (1.0 / e.alpha)
        points.extend(float(x) for x in d if 0 < x < shape.circumradius)
    return points


def survival_moments(shape: AreaShape, energy: EnergyModel, traffic: TrafficModel, tau: float,
                     *, capacity: str = "continuous",
                     spec: QuadratureSpec | None = None) -> SurvivalMoments:
    """Survival probability mu of a uniformly placed node at ``tau`` hours.

    Args:
        capacity: per-node law. ``"continuous"`` keeps the real-valued
            capacity in the incomplete gamma function, ``"floor"`` uses
            the integer packet count (exact, and what the simulator does),
            ``"clt"`` uses the normal approximation of the death time.
    """
    if not (math.isfinite(tau) and tau >= 0):
        raise DomainError(f"tau must be nonnegative, got {tau}")
    law = _sensor_law(capacity)
    if tau == 0:
        return SurvivalMoments(1.0, tau)
    try:
        mu = _mu(shape, energy, traffic, float(tau), capacity, law, spec)
    except ConvergenceError as exc:
        raise ConvergenceError(
            f"survival mean at tau={tau} h ({type(shape).__name__}, {capacity} capacity): {exc}",
            estimate=exc.estimate, error=exc.error) from exc
    return SurvivalMoments(min(1.0, max(0.0, mu)), tau)


def _mu(shape, energy, traffic, tau, capacity, law, spec):
    fixed = isinstance(energy, FixedRangeEnergy)
    if isinstance(traffic, TimeDriven):
        # floor(p) * T >= tau  <=>  p >= ceil(tau / T)
        need = math.ceil(tau / traffic.period * (1.0 - 1e-12))
        if fixed:
            return 1.0 if math.floor(energy.capacity) >= need else 0.0
        return 1.0 - float(capacity_cdf(shape, energy, float(need)))

    if isinstance(traffic, Poisson):
        lam = traffic.rate
        if fixed:
            return law(energy.capacity, lam, tau)
        if capacity == "floor":
            m, w = _floor_weights(shape, energy)
            s = np.array([law(float(mi), lam, tau) if mi > 0 else 0.0 for mi in m])
            return math.fsum(s * w)
        vec = np.vectorize(lambda x: law(x, lam, tau), otypes=[float])
        return capacity_expectation(shape, energy, vec, spec)

    if isinstance(traffic, PositionPoisson):
        def integrand(d):
            p = packet_capacity(energy, d) * np.ones_like(d)
            lam = traffic.rate_at(d)
            return np.array([law(pi, li, tau) if pi >= 1 or capacity != "floor" else 0.0
                             for pi, li in zip(p, lam)]) * distance_pdf(shape, d)
        return integrate(integrand, 0.0, shape.circumradius, spec, vectorized=True,
                         breakpoints=_distance_breaks(shape, energy, capacity))

    raise InvalidModelError(f"unsupported traffic model {type(traffic).__name__}")


def sensor_death_density(shape: AreaShape, energy: EnergyModel, traffic: TrafficModel, tau: float,
                         *, capacity: str = "continuous",
                         spec: QuadratureSpec | None = None) -> float:
    """-d mu / d tau: density of the death time of a randomly placed node.

    Equal to lam * exp(-lam tau) * c(tau) with
    c(tau) = integral of f_p(x) (lam tau)^(x-1) / Gamma(x) dx; the product is
    formed in log space because (lam tau)^(x-1) alone overflows.
    """
    if not isinstance(traffic, Poisson):
        raise InvalidModelError("the lifetime density needs homogeneous Poisson traffic")
    if capacity not in ("continuous", "floor"):
        raise DomainError(f"capacity must be 'continuous' or 'floor', got {capacity!r}")
    if not (math.isfinite(tau) and tau > 0):
        raise DomainError(f"tau must be positive, got {tau}")
    lam = traffic.rate
    y = lam * tau

    def kernel(a):
        return math.exp(log_gamma_pdf(a, y))

    if isinstance(energy, FixedRangeEnergy):
        p = energy.capacity if capacity == "continuous" else math.floor(energy.capacity)
        return lam * kernel(p) if p > 0 else 0.0
    if capacity == "floor":
        m, w = _floor_weights(shape, energy)
        return lam * math.fsum(wi * kernel(float(mi)) for mi, wi in zip(m, w) if mi > 0)
    vec = np.vectorize(kernel, otypes=[float])
    return lam * capacity_expectation(shape, energy, vec, spec)


# ---------------------------------------------------------------------------
# network level
# ---------------------------------------------------------------------------

def _degenerate(a):
    if abs(a) <= TIE_TOLERANCE:
        return 0.5
    return 1.0 if a < 0 else 0.0


def network_ccdf(query: LifetimeQuery, moments: SurvivalMoments) -> float:
    """P(L >= tau) = Q(sqrt(N) (1 - beta - mu) / sigma).

    With sigma = 0 every node behaves identically, and the answer is 1, 0 or
    1/2 by the sign of 1 - beta - mu.
    """
    if not math.isclose(query.tau, moments.tau, rel_tol=1e-12, abs_tol=1e-12):
        raise DomainError(f"query tau {query.tau} differs from moments tau {moments.tau}")
    a = 1.0 - query.beta - moments.mu
    sigma = moments.sigma
    if sigma == 0.0:
        return _degenerate(a)
    return gaussian_ccdf(math.sqrt(query.nodes) * a / sigma)


def network_pdf(tau: float, query: LifetimeQuery, shape: AreaShape, energy: EnergyModel,
                traffic: TrafficModel, spec: QuadratureSpec | None = None,
                *, capacity: str = "continuous") -> float:
    """Density of the network lifetime at ``tau``, per hour.

    ``query`` supplies beta and N; its own tau is ignored.
    """
    moments = survival_moments(shape, energy, traffic, tau, capacity=capacity, spec=spec)
    mu = moments.mu
    var = mu - mu * mu
    if var <= 0.0:
        return 0.0
    death = sensor_death_density(shape, energy, traffic, tau, capacity=capacity, spec=spec)
    if death <= 0.0:
        return 0.0
    n = query.nodes
    beta = query.beta
    a = 1.0 - beta - mu
    slope = 1.0 - mu - beta * (1.0 - 2.0 * mu)
    if slope <= 0.0:
        return 0.0
    log_pdf = (0.5 * math.log(n) - math.log(2.0) - _LOG_SQRT_2PI + math.log(slope)
               - 1.5 * math.log(var) + math.log(death) - n * a * a / (2.0 * var))
    return math.exp(log_pdf)


def threshold_for_survival(target_mu: float, shape: AreaShape, energy: EnergyModel,
                           traffic: TrafficModel, *, capacity: str = "continuous",
                           spec: QuadratureSpec | None = None, xtol: float = 1e-9) -> float:
    """The tau at which the node survival mean equals ``target_mu``."""
    if not 0.0 < target_mu < 1.0:
        raise DomainError(f"target_mu must lie in (0, 1), got {target_mu}")

    def gap(t):
        return survival_moments(shape, energy, traffic, t, capacity=capacity, spec=spec).mu - target_mu

    if isinstance(energy, FixedRangeEnergy):
        scale = energy.capacity
    else:
        scale = capacity_support(shape, energy).hi
    rate = getattr(traffic, "rate", None) or 1.0 / getattr(traffic, "period", 1.0)
    hi = 2.0 * scale / rate + 1.0
    for _ in range(60):
        if gap(hi) < 0:
            break
        hi *= 2.0
    else:
        raise ConvergenceError(f"could not bracket tau for mu = {target_mu}")
    return brentq(gap, 0.0, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)


# ---------------------------------------------------------------------------
# large-N behaviour and heterogeneous populations
# ---------------------------------------------------------------------------

def asymptotic_predict(beta: float, mu: float) -> Verdict:
    """Limit of P(L >= tau) as N grows, from the sign of a = 1 - beta - mu."""
    if not 0.0 <= mu <= 1.0:
        raise DomainError(f"mu must lie in [0, 1], got {mu}")
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    a = 1.0 - beta - mu
    if abs(a) <= TIE_TOLERANCE:
        return Verdict.CRITICAL
    return Verdict.FAILS_ALMOST_SURELY if a > 0 else Verdict.ACHIEVES_ALMOST_SURELY


def decay_rate(beta: float, mu: float) -> float:
    """Exponent r with prediction error ~ exp(-r N): a^2 / (2 sigma^2)."""
    var = mu - mu * mu
    a = 1.0 - beta - mu
    if var == 0.0:
        return math.inf if a != 0 else 0.0
    return a * a / (2.0 * var)


def asymptotic_error_bound(nodes: int, beta: float, mu: float) -> float:
    """Upper bound on the distance of P(L >= tau) from its limit, Q(x) < phi(x) / x."""
    var = mu - mu * mu
    a = 1.0 - beta - mu
    if var == 0.0:
        return 0.0 if a != 0 else 0.5
    x = math.sqrt(nodes) * abs(a) / math.sqrt(var)
    if x == 0.0:
        return 0.5
    return min(0.5, math.exp(-0.5 * x * x - _LOG_SQRT_2PI) / x)


def hetero_bound_direction(query: LifetimeQuery, mean_mu: float) -> BoundDirection:
    """How the identical-node formula relates to a population with unequal survival means.

    Unequal means can only shrink the variance of the alive count, so the
    formula overstates the success probability when 1 - beta - mu > 0 and
    understates it when negative.
    """
    if not 0.0 <= mean_mu <= 1.0:
        raise DomainError(f"mean_mu must lie in [0, 1], got {mean_mu}")
    a = 1.0 - query.beta - mean_mu
    if abs(a) <= TIE_TOLERANCE:
        return BoundDirection.EXACT
    return BoundDirection.UPPER_BOUND if a > 0 else BoundDirection.LOWER_BOUND
