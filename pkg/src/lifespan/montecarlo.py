"""Brute-force simulation of network lifetimes.

Every trial places nodes, draws each node's death time as the sum of its
packet inter-arrival times, and records the time at which the dead share
first reaches beta. Trial ``i`` draws from its own stream, derived from the
master seed and ``i`` alone, so results do not depend on how trials are
spread over threads.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import norm

from .errors import DomainError, InvalidModelError
from .geometry import AreaShape, sample_distances
from .models import (AdjustableEnergy, FixedRangeEnergy, PositionPoisson, TimeDriven,
                     TrafficModel, packet_capacity)
from .multihop import RingConfig, ring_probabilities

__all__ = [
    "SUM_SAMPLER_LIMIT",
    "TrialResult",
    "EmpiricalCcdf",
    "EnergyMix",
    "ComparisonReport",
    "dead_count_index",
    "trial_rng",
    "worker_count",
    "death_times",
    "single_hop_trial",
    "multi_hop_trial",
    "simulate_single_hop",
    "simulate_single_hop_betas",
    "simulate_multi_hop",
    "simulate_multi_hop_betas",
    "empirical_vs_analytic",
]

SUM_SAMPLER_LIMIT = 10_000
SAMPLERS = ("auto", "sum", "gamma")


@dataclass(frozen=True)
class TrialResult:
    death_times: np.ndarray
    network_lifetime: float


class EmpiricalCcdf:
    """Empirical P(L >= tau) from a set of simulated lifetimes."""

    def __init__(self, samples):
        samples = np.sort(np.asarray(samples, dtype=float))
        if samples.ndim != 1 or samples.size == 0:
            raise DomainError("an empirical ccdf needs at least one sample")
        samples.setflags(write=False)
        self.samples = samples

    def __len__(self):
        return self.samples.size

    def eval(self, tau):
        """Fraction of samples >= tau."""
        tau = np.asarray(tau, dtype=float)
        below = np.searchsorted(self.samples, tau, side="left")
        out = (self.samples.size - below) / self.samples.size
        return out[()] if out.ndim == 0 else out

    def count(self, tau):
        return self.samples.size - int(np.searchsorted(self.samples, tau, side="left"))

    def ci(self, tau, level=0.99):
        """Two-sided Wilson score interval for the ccdf at ``tau``."""
        if not 0.0 < level < 1.0:
            raise DomainError(f"confidence level must lie in (0, 1), got {level}")
        n = self.samples.size
        phat = self.eval(tau)
        z = norm.ppf(0.5 + 0.5 * level)
        denom = 1.0 + z * z / n
        centre = (phat + z * z / (2 * n)) / denom
        half = z * np.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
        return np.minimum(centre - half, phat), np.maximum(centre + half, phat)

    def __eq__(self, other):
        return isinstance(other, EmpiricalCcdf) and np.array_equal(self.samples, other.samples)

    __hash__ = None


@dataclass(frozen=True)
class EnergyMix:
    """A population split into classes with fixed node counts.

    Nodes of class ``j`` use ``models[j]``; ``counts`` must sum to N.
    """

    models: tuple
    counts: tuple

    def __post_init__(self):
        if len(self.models) != len(self.counts) or not self.models:
            raise DomainError("energy mix needs one count per model")
        if any(int(c) != c or c < 0 for c in self.counts):
            raise DomainError("energy mix counts must be nonnegative integers")

    @property
    def nodes(self):
        return int(sum(self.counts))


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------

def dead_count_index(beta: float, nodes: int) -> int:
    """k = ceil(beta N), clamped to [1, N]; lifetime is the k-th smallest death time.

    The ceiling tolerates the round-off in products like 0.3 * 20.
    """
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    return min(nodes, max(1, math.ceil(beta * nodes - 1e-9)))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def worker_count(threads: int | None = None) -> int:
    """Threads to use.

    LIFESPAN_THREADS, when set, is both the default and an upper bound;
    otherwise the default is the CPU count.
    """
    cap = os.environ.get("LIFESPAN_THREADS")
    limit = None
    if cap:
        try:
            limit = int(cap)
        except ValueError:
            raise DomainError(f"LIFESPAN_THREADS must be an integer, got {cap!r}") from None
    n = threads if threads is not None else (limit or os.cpu_count() or 1)
    if limit is not None:
        n = min(n, limit)
    return max(1, int(n))


def death_times(packets, rates, rng: np.random.Generator, sampler: str = "auto") -> np.ndarray:
    """Death time of each node: the ``packets[i]``-th arrival of a rate ``rates[i]`` stream.

    ``sum`` adds the exponential gaps one by one; ``gamma`` draws the sum
    from its gamma law directly. ``auto`` sums unless some node holds more
    than ``SUM_SAMPLER_LIMIT`` packets. Nodes with no packets die at 0.
    """
    packets = np.asarray(packets, dtype=np.int64)
    rates = np.broadcast_to(np.asarray(rates, dtype=float), packets.shape)
    if sampler not in SAMPLERS:
        raise DomainError(f"sampler must be one of {SAMPLERS}, got {sampler!r}")
    if sampler == "auto":
        sampler = "sum" if packets.size == 0 or packets.max() <= SUM_SAMPLER_LIMIT else "gamma"
    out = np.zeros(packets.shape)
    live = packets > 0
    if not live.any():
        return out
    m = packets[live]
    if sampler == "gamma":
        totals = rng.standard_gamma(m.astype(float))
    else:
        gaps = rng.standard_exponential(int(m.sum()))
        starts = np.concatenate(([0], np.cumsum(m)[:-1]))
        totals = np.add.reduceat(gaps, starts)
    out[live] = totals / rates[live]
    return out


def _packets_and_rates(shape, energy, traffic, nodes, rng):
    if isinstance(energy, EnergyMix):
        if energy.nodes != nodes:
            raise DomainError(f"energy mix holds {energy.nodes} nodes, expected {nodes}")
        d = sample_distances(shape, rng, nodes)
        caps = np.concatenate([
            np.broadcast_to(packet_capacity(model, d[start:start + count]), (count,))
            for model, count, start in zip(energy.models, energy.counts,
                                           np.cumsum((0,) + tuple(energy.counts))[:-1])
        ])
    else:
        if isinstance(energy, FixedRangeEnergy) and not isinstance(traffic, PositionPoisson):
            d = np.zeros(nodes)
        else:
            d = sample_distances(shape, rng, nodes)
        caps = np.broadcast_to(packet_capacity(energy, d), (nodes,))
    packets = np.floor(caps).astype(np.int64)
    if isinstance(traffic, TimeDriven):
        return packets, None, traffic.period
    return packets, traffic.rate_at(d), None


def _order_stats(times, betas):
    s = np.sort(times)
    return np.array([s[dead_count_index(b, s.size) - 1] for b in betas])


def single_hop_trial(shape: AreaShape, energy, traffic: TrafficModel, nodes: int, beta: float,
                     rng: np.random.Generator, sampler: str = "auto") -> TrialResult:
    """One deployment and its lifetime."""
    packets, rates, period = _packets_and_rates(shape, energy, traffic, nodes, rng)
    if period is not None:
        times = packets * period
    else:
        times = death_times(packets, rates, rng, sampler)
    return TrialResult(times, float(_order_stats(times, [beta])[0]))


def multi_hop_trial(cfg: RingConfig, energy: FixedRangeEnergy, beta: float,
                    rng: np.random.Generator, sampler: str = "auto") -> TrialResult:
    """One deployment of the ring model; only first-ring death times are kept.

    An empty first ring ends the network at time 0.
    """
    counts = rng.multinomial(cfg.nodes, ring_probabilities(cfg))
    n1 = int(counts[0])
    if n1 == 0:
        return TrialResult(np.zeros(0), 0.0)
    lam1 = cfg.rate * cfg.nodes / n1
    packets = np.full(n1, math.floor(energy.capacity), dtype=np.int64)
    times = death_times(packets, lam1, rng, sampler)
    return TrialResult(times, float(_order_stats(times, [beta])[0]))


def _run(trial_fn: Callable, trials: int, seed: int, threads: int | None) -> np.ndarray:
    if int(trials) != trials or trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials}")
    if int(seed) != seed or seed < 0:
        raise DomainError(f"seed must be a nonnegative integer, got {seed}")
    seed = int(seed)
    workers = min(worker_count(threads), trials)

    def block(bounds):
        lo, hi = bounds
        return [trial_fn(trial_rng(seed, i)) for i in range(lo, hi)]

    edges = np.linspace(0, trials, min(trials, 8 * workers) + 1).astype(int)
    chunks = list(zip(edges[:-1], edges[1:]))
    if workers == 1:
        parts = [block(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, chunks))
    return np.array([row for part in parts for row in part], dtype=float)


def _check_betas(betas):
    betas = [float(b) for b in betas]
    if not betas:
        raise DomainError("at least one beta is required")
    for b in betas:
        dead_count_index(b, 1)
    return betas


# ---------------------------------------------------------------------------
# public simulators
# ---------------------------------------------------------------------------

def simulate_single_hop_betas(shape: AreaShape, energy, traffic: TrafficModel, nodes: int,
                              betas: Sequence[float], trials: int, seed: int, *,
                              sampler: str = "auto", threads: int | None = None):
    """One set of deployments, read off at several dead-node ratios.

    Returns a dict mapping each beta to its :class:`EmpiricalCcdf`.
    """
    if not isinstance(energy, (AdjustableEnergy, FixedRangeEnergy, EnergyMix)):
        raise InvalidModelError(f"unsupported energy model {type(energy).__name__}")
    if int(nodes) != nodes or nodes < 1:
        raise DomainError(f"nodes must be a positive integer, got {nodes}")
    betas = _check_betas(betas)

    def trial(rng):
        packets, rates, period = _packets_and_rates(shape, energy, traffic, int(nodes), rng)
        times = packets * period if period is not None else death_times(packets, rates, rng, sampler)
        return _order_stats(times, betas)

    table = _run(trial, trials, seed, threads)
    return {b: EmpiricalCcdf(table[:, j]) for j, b in enumerate(betas)}


def simulate_single_hop(shape: AreaShape, energy, traffic: TrafficModel, nodes: int, beta: float,
                        trials: int, seed: int, *, sampler: str = "auto",
                        threads: int | None = None) -> EmpiricalCcdf:
    """Empirical lifetime ccdf of a single-hop network over ``trials`` deployments."""
    return simulate_single_hop_betas(shape, energy, traffic, nodes, [beta], trials, seed,
                                     sampler=sampler, threads=threads)[float(beta)]


def simulate_multi_hop_betas(cfg: RingConfig, energy: FixedRangeEnergy, betas: Sequence[float],
                             trials: int, seed: int, *, sampler: str = "auto",
                             threads: int | None = None):
    if not isinstance(energy, FixedRangeEnergy):
        raise InvalidModelError("multi-hop simulation needs a FixedRangeEnergy model")
    betas = _check_betas(betas)
    probs = ring_probabilities(cfg)
    m = math.floor(energy.capacity)

    def trial(rng):
        n1 = int(rng.multinomial(cfg.nodes, probs)[0])
        if n1 == 0:
            return np.zeros(len(betas))
        times = death_times(np.full(n1, m, dtype=np.int64), cfg.rate * cfg.nodes / n1, rng, sampler)
        return _order_stats(times, betas)

    table = _run(trial, trials, seed, threads)
    return {b: EmpiricalCcdf(table[:, j]) for j, b in enumerate(betas)}


def simulate_multi_hop(cfg: RingConfig, energy: FixedRangeEnergy, beta: float, trials: int,
                       seed: int, *, sampler: str = "auto",
                       threads: int | None = None) -> EmpiricalCcdf:
    """Empirical first-ring lifetime ccdf of the ring model."""
    return simulate_multi_hop_betas(cfg, energy, [beta], trials, seed, sampler=sampler,
                                    threads=threads)[float(beta)]


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonReport:
    """Per-tau comparison of an analytic ccdf with an empirical one."""

    tau: np.ndarray
    empirical: np.ndarray
    analytic: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    level: float
    columns: tuple = field(default=("tau", "empirical", "analytic", "deviation",
                                    "ci_low", "ci_high", "covered"))

    @property
    def deviation(self):
        return self.analytic - self.empirical

    @property
    def covered(self):
        return (self.analytic >= self.ci_low) & (self.analytic <= self.ci_high)

    @property
    def half_width(self):
        return np.maximum(self.empirical - self.ci_low, self.ci_high - self.empirical)

    @property
    def max_abs_deviation(self):
        return float(np.max(np.abs(self.deviation)))

    def within(self, tolerance: float) -> np.ndarray:
        """|deviation| <= max(tolerance, CI half-width), pointwise."""
        return np.abs(self.deviation) <= np.maximum(tolerance, self.half_width)

    def rows(self):
        dev = self.deviation
        cov = self.covered
        for j in range(self.tau.size):
            yield (float(self.tau[j]), float(self.empirical[j]), float(self.analytic[j]),
                   float(dev[j]), float(self.ci_low[j]), float(self.ci_high[j]), bool(cov[j]))


def empirical_vs_analytic(emp: EmpiricalCcdf, f: Callable[[float], float], tau_grid,
                          level: float = 0.99) -> ComparisonReport:
    tau = np.asarray(tau_grid, dtype=float).ravel()
    if tau.size == 0:
        raise DomainError("the comparison grid is empty")
    lo, hi = emp.ci(tau, level)
    return ComparisonReport(
        tau=tau,
        empirical=np.asarray(emp.eval(tau), dtype=float).reshape(tau.shape),
        analytic=np.array([float(f(t)) for t in tau]),
        ci_low=np.asarray(lo, dtype=float).reshape(tau.shape),
        ci_high=np.asarray(hi, dtype=float).reshape(tau.shape),
        level=level,
    )
