"""Special functions and adaptive quadrature.

Everything here is pure and stateless. The incomplete gamma routines work
in log space so that shape parameters in the thousands (multi-hop packet
capacities) neither overflow ``Gamma(a)`` nor lose the tiny tails that the
network formulas amplify.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "regularized_lower_gamma",
    "regularized_upper_gamma",
    "log_gamma_pdf",
    "gaussian_ccdf",
    "integrate",
    "binomial_log_pmf",
]

_EPS = np.finfo(float).eps
_LOG_2PI = math.log(2.0 * math.pi)
_TINY = 1e-300


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for :func:`integrate`.

    The result is accepted once the summed panel error estimate is at most
    ``max(abs_tol, rel_tol * |result|)``.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if not self.abs_tol >= 0:
            raise DomainError(f"abs_tol must be nonnegative, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise DomainError(f"max_subdivisions must be >= 1, got {self.max_subdivisions}")


DEFAULT_QUADRATURE = QuadratureSpec()


# ---------------------------------------------------------------------------
# incomplete gamma
# ---------------------------------------------------------------------------

def _check_gamma_args(a, x):
    a = float(a)
    x = float(x)
    if not (math.isfinite(a) and math.isfinite(x)):
        raise DomainError(f"non-finite argument: a={a}, x={x}")
    if a <= 0:
        raise DomainError(f"shape a must be positive, got {a}")
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    return a, x


def _stirling_correction(a):
    # lgamma(a) - [(a - 1/2) ln a - a + ln(2 pi)/2], valid for a >= 10
    inv = 1.0 / a
    inv2 = inv * inv
    return inv * (1.0 / 12 - inv2 * (1.0 / 360 - inv2 * (1.0 / 1260 - inv2 * (1.0 / 1680 - inv2 / 1188))))


def _log_prefactor(a, x):
    """ln(x**a * exp(-x) / Gamma(a)), without forming the large cancelling terms."""
    t = (x - a) / a
    # the cancellation only bites near x = a
    if a < 10.0 or abs(t) > 0.5:
        return a * math.log(x) - x - math.lgamma(a)
    # a*ln(x/a) - (x - a) = a*(log1p(t) - t)
    return a * (math.log1p(t) - t) + 0.5 * (math.log(a) - _LOG_2PI) - _stirling_correction(a)


def _max_iter(a):
    return 200 + int(30.0 * math.sqrt(a))


def _lower_series(a, x):
    """Series for P(a, x); converges quickly for x < a + 1."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_max_iter(a)):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * _EPS:
            return math.exp(_log_prefactor(a, x) + math.log(total))
    raise ConvergenceError(f"incomplete gamma series did not converge for a={a}, x={x}")


def _upper_fraction(a, x):
    """Continued fraction for Q(a, x) (modified Lentz); used for x >= a + 1."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _max_iter(a)):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.exp(_log_prefactor(a, x) + math.log(h))
    raise ConvergenceError(f"incomplete gamma continued fraction did not converge for a={a}, x={x}")


def regularized_lower_gamma(a, x):
    """Regularized lower incomplete gamma function P(a, x) = gamma(a, x) / Gamma(a).

    This is the CDF at ``x`` of a unit-rate gamma variable with shape ``a``.

    >>> round(regularized_lower_gamma(1.0, math.log(2.0)), 12)
    0.5
    """
    a, x = _check_gamma_args(a, x)
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return min(1.0, _lower_series(a, x))
    return max(0.0, 1.0 - _upper_fraction(a, x))


def regularized_upper_gamma(a, x):
    """Complement Q(a, x) = 1 - P(a, x), computed directly in the upper tail."""
    a, x = _check_gamma_args(a, x)
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _lower_series(a, x))
    return min(1.0, _upper_fraction(a, x))


def log_gamma_pdf(a, x):
    """Log density of the unit-rate gamma distribution with shape ``a`` at ``x > 0``."""
    a, x = _check_gamma_args(a, x)
    if x == 0.0:
        if a < 1:
            return math.inf
        return 0.0 if a == 1 else -math.inf
    return _log_prefactor(a, x) - math.log(x)


# ---------------------------------------------------------------------------
# normal tail
# ---------------------------------------------------------------------------

def gaussian_ccdf(x):
    """Standard normal tail probability Q(x) = P(Z >= x)."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"gaussian_ccdf needs a finite argument, got {x}")
    return 0.5 * math.erfc(x / math.sqrt(2.0))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

# 15-point Kronrod extension of the 7-point Gauss rule; no node sits on a
# panel endpoint, so integrable endpoint singularities are never evaluated.
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG_FULL = np.zeros(15)
_WG_FULL[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


class _Clustered:
    """Integrand in t on [0, 1] under x = lo + (hi - lo) * (3t^2 - 2t^3).

    The Jacobian 6t(1 - t) vanishes at both ends, which turns inverse
    square-root endpoint singularities into bounded integrands. Nodes near
    an end are placed relative to that end so they stay distinct from it.
    """

    def __init__(self, f, lo, hi, vectorized):
        self.f = f
        self.lo = lo
        self.hi = hi
        self.width = hi - lo
        self.vectorized = vectorized

    def points(self, t):
        near_hi = t > 0.5
        s = 1.0 - t
        x = np.where(near_hi,
                     self.hi - self.width * (s * s * (1.0 + 2.0 * t)),
                     self.lo + self.width * (t * t * (3.0 - 2.0 * t)))
        return np.clip(x, self.lo, self.hi)

    def __call__(self, t):
        xs = self.points(t)
        if self.vectorized:
            fx = np.asarray(self.f(xs), dtype=float)
        else:
            fx = np.array([self.f(float(x)) for x in xs], dtype=float)
        if not np.all(np.isfinite(fx)):
            bad = xs[~np.isfinite(fx)][0]
            raise DomainError(f"integrand is not finite at x={bad!r}")
        return fx * (6.0 * self.width) * t * (1.0 - t)


def _gk15(g, a, b):
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    fx = g(center + half * _NODES)
    kronrod = half * float(_WK @ fx)
    gauss = half * float(_WG_FULL @ fx)
    abs_half = abs(half)
    resabs = abs_half * float(_WK @ np.abs(fx))
    mean = kronrod / (2.0 * half) if half else 0.0
    resasc = abs_half * float(_WK @ np.abs(fx - mean))
    err = abs(kronrod - gauss)
    # QUADPACK's error scaling: pessimistic for rough panels, sharp for smooth ones
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > np.finfo(float).tiny / (50.0 * _EPS):
        err = max(50.0 * _EPS * resabs, err)
    return kronrod, err


def integrate(f: Callable, lo: float, hi: float, spec: QuadratureSpec | None = None,
              *, vectorized: bool = False, breakpoints=()) -> float:
    """Adaptive Gauss-Kronrod quadrature of ``f`` over ``[lo, hi]``.

    The interval is first mapped onto [0, 1] by a cubic substitution that
    clusters nodes at both ends; the panel with the largest error estimate
    is then bisected until the total estimate meets the tolerance in
    ``spec``. The 15-point rule never touches a panel boundary, so
    integrable endpoint singularities are never evaluated.

    Args:
        f: integrand. Scalar in, scalar out unless ``vectorized`` is set, in
            which case it receives a numpy array of nodes.
        lo, hi: finite limits with ``lo < hi``.
        spec: tolerances; defaults to :data:`DEFAULT_QUADRATURE`.
        breakpoints: interior points where ``f`` jumps or kinks. Each piece
            is integrated separately; no rule can see a jump that falls
            between a panel's outermost node and its edge.

    Raises:
        ConvergenceError: tolerance not met within ``spec.max_subdivisions``
            panels; carries the best estimate and its error bound.
    """
    spec = spec or DEFAULT_QUADRATURE
    lo = float(lo)
    hi = float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError(f"integration limits must be finite, got [{lo}, {hi}]")
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    inner = sorted({float(b) for b in breakpoints if lo < b < hi})
    if inner:
        edges = [lo, *inner, hi]
        return math.fsum(integrate(f, a, b, spec, vectorized=vectorized)
                         for a, b in zip(edges[:-1], edges[1:]))

    g = _Clustered(f, lo, hi, vectorized)
    value, err = _gk15(g, 0.0, 1.0)
    # max-heap on error; ties broken by position so runs are reproducible
    active = [(-err, 0.0, 1.0, value)]
    frozen_values = []
    frozen_errors = []
    while True:
        total = math.fsum([p[3] for p in active] + frozen_values)
        total_err = math.fsum([-p[0] for p in active] + frozen_errors)
        if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
            return total
        n_panels = len(active) + len(frozen_values)
        if not active or n_panels >= spec.max_subdivisions:
            raise ConvergenceError(
                f"quadrature on [{lo}, {hi}] stalled at {n_panels} panels with "
                f"error estimate {total_err:.3e}",
                estimate=total, error=total_err)
        neg_err, a, b, val = heapq.heappop(active)
        mid = 0.5 * (a + b)
        if not (a < mid < b) or (b - a) <= 64.0 * _EPS * max(abs(a), abs(b)):
            # panel is at floating-point resolution; it cannot be refined further
            frozen_values.append(val)
            frozen_errors.append(-neg_err)
            continue
        left, left_err = _gk15(g, a, mid)
        right, right_err = _gk15(g, mid, b)
        heapq.heappush(active, (-left_err, a, mid, left))
        heapq.heappush(active, (-right_err, mid, b, right))


# ---------------------------------------------------------------------------
# binomial
# ---------------------------------------------------------------------------

def binomial_log_pmf(n: int, j: int, q: float) -> float:
    """Natural log of the Binomial(n, q) probability mass at ``j``.

    Uses log-gamma so that ``n`` in the tens of thousands is fine; returns
    ``-inf`` for impossible outcomes at ``q`` equal to 0 or 1.
    """
    if int(n) != n or int(j) != j:
        raise DomainError(f"n and j must be integers, got n={n}, j={j}")
    n = int(n)
    j = int(j)
    q = float(q)
    if n < 0 or not 0 <= j <= n:
        raise DomainError(f"need 0 <= j <= n, got n={n}, j={j}")
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [0, 1], got {q}")
    if q == 0.0:
        return 0.0 if j == 0 else -math.inf
    if q == 1.0:
        return 0.0 if j == n else -math.inf
    log_choose = math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1)
    return log_choose + j * math.log(q) + (n - j) * math.log1p(-q)
