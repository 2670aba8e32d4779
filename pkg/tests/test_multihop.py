import math

import pytest

from lifespan.errors import DomainError, InvalidModelError
from lifespan.geometry import Circle, RegularPolygon
from lifespan.models import AdjustableEnergy, FixedRangeEnergy
from lifespan.multihop import (RingConfig, multihop_ccdf, ring_count, ring_probabilities,
                               ring_probability, ring_rate)
from lifespan.specfun import binomial_log_pmf

from conftest import C_REF, K_REF


def ring(r=20.0, nodes=500, radius=100.0, rate=1.0):
    return RingConfig(Circle(radius), r, nodes, rate)


def energy_for(r, initial=0.1):
    return FixedRangeEnergy(r, K_REF, C_REF, 4.0, initial)


def test_ring_probability_examples():
    cfg = ring()
    assert ring_count(cfg) == 5
    assert ring_probability(cfg, 1) == pytest.approx(0.04, rel=1e-15)
    assert ring_probability(cfg, 5) == pytest.approx(0.36, rel=1e-14)
    assert math.fsum(ring_probabilities(cfg)) == pytest.approx(1.0, abs=1e-15)


def test_ring_probability_general_shape():
    square = RegularPolygon.with_area(4, 1e4)
    cfg = RingConfig(square, 20.0, 500, 1.0)
    assert ring_probability(cfg, 1) == pytest.approx(400 * math.pi / 1e4, rel=1e-13)
    assert round(ring_probability(cfg, 1), 4) == 0.1257
    assert math.fsum(ring_probabilities(cfg)) == pytest.approx(1.0, abs=1e-14)


def test_truncated_outer_ring():
    cfg = ring(r=30.0)
    assert ring_count(cfg) == 4
    probs = ring_probabilities(cfg)
    assert probs[-1] == pytest.approx(1 - 0.81, rel=1e-13)
    assert math.fsum(probs) == pytest.approx(1.0, abs=1e-15)


def test_ring_probability_out_of_range():
    with pytest.raises(DomainError):
        ring_probability(ring(), 0)
    with pytest.raises(DomainError):
        ring_probability(ring(), 6)


def test_ring_rate_examples():
    assert ring_rate(ring(), 1, [20, 100, 100, 100, 180]) == pytest.approx(25.0)
    single = ring(r=150.0, nodes=40)
    assert ring_count(single) == 1
    assert ring_rate(single, 1, [40]) == 1.0
    assert ring_rate(ring(nodes=100), 2, [10, 30, 60]) == pytest.approx(3.0)
    with pytest.raises(DomainError):
        ring_rate(ring(nodes=100), 2, [10, 0, 90])
    with pytest.raises(DomainError):
        ring_rate(ring(nodes=100), 1, [10, 20])


def test_outer_ring_carries_own_traffic_only():
    counts = [20, 100, 100, 100, 180]
    assert ring_rate(ring(rate=2.0), 5, counts) == 2.0
    rates = [ring_rate(ring(), i, counts) for i in range(1, 6)]
    assert all(r >= 1.0 for r in rates)


def test_ccdf_at_zero_and_full_beta():
    cfg = ring()
    e = energy_for(20.0)
    assert multihop_ccdf(cfg, e, 0.0, 0.3) == 1.0
    # with N1 >= 1 the whole first ring survives 1 hour; P(N1 = 0) = 0.96^500
    value = multihop_ccdf(cfg, e, 1.0, 1.0)
    assert value == pytest.approx(1.0 - 0.96 ** 500, abs=1e-12)


def test_empty_first_ring_counts_as_dead():
    cfg = RingConfig(Circle(100.0), 1.0, 10, 1.0)
    e = energy_for(1.0)
    p_empty = math.exp(binomial_log_pmf(10, 0, ring_probability(cfg, 1)))
    assert multihop_ccdf(cfg, e, 1e-6, 0.3) <= 1.0 - p_empty + 1e-15


def test_truncation_changes_little():
    for r in (10.0, 20.0, 50.0):
        cfg = ring(r=r)
        e = energy_for(r)
        for tau in (40.0, 80.0, 300.0):
            full = multihop_ccdf(cfg, e, tau, 0.3)
            cut = multihop_ccdf(cfg, e, tau, 0.3, truncate_sd=8)
            assert abs(full - cut) < 1e-9


def test_ccdf_range_and_monotone_in_tau():
    cfg = ring()
    e = energy_for(20.0)
    values = [multihop_ccdf(cfg, e, t, 0.3) for t in range(0, 200, 5)]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))


def test_ccdf_validates_energy():
    cfg = ring()
    with pytest.raises(DomainError):
        multihop_ccdf(cfg, energy_for(25.0), 10.0, 0.3)
    with pytest.raises(InvalidModelError):
        multihop_ccdf(cfg, AdjustableEnergy(K_REF, C_REF, 4.0, 0.1), 10.0, 0.3)
    with pytest.raises(DomainError):
        multihop_ccdf(cfg, energy_for(20.0), -1.0, 0.3)
    with pytest.raises(DomainError):
        multihop_ccdf(cfg, energy_for(20.0), 1.0, 0.0)


def test_config_validation():
    with pytest.raises(DomainError):
        RingConfig(Circle(100.0), 0.0, 10, 1.0)
    with pytest.raises(DomainError):
        RingConfig(Circle(100.0), 10.0, 0, 1.0)
    with pytest.raises(DomainError):
        RingConfig(Circle(100.0), 10.0, 10, -1.0)
