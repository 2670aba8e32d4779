import math

import numpy as np
import pytest

from lifespan.errors import DomainError, InvalidModelError
from lifespan.models import AdjustableEnergy, FixedRangeEnergy
from lifespan.sensor import (SensorSurvival, lifetime_time_driven, survival_clt, survival_exact,
                             survival_fixed_range, survival_floor)
from oracles import lower_gamma_mp

from conftest import C_REF, K_REF


def test_exact_examples():
    assert survival_exact(1.0, 1.0, 0.693147) == pytest.approx(0.5, abs=1e-6)
    assert survival_exact(37.2, 2.0, 0.0) == 1.0
    tail = float(lower_gamma_mp(220, 100))
    assert survival_exact(220.0, 1.0, 100.0) == pytest.approx(1.0 - tail, abs=1e-16)


def test_clt_examples():
    assert survival_clt(100.0, 1.0, 100.0) == 0.5
    assert survival_clt(100.0, 1.0, 90.0) == pytest.approx(0.841345, abs=1e-6)


@pytest.mark.parametrize("p", [100.0, 150.5, 220.0, 1000.0, 1991.7])
def test_clt_close_to_exact(p):
    xs = np.linspace(p - 4 * math.sqrt(p), p + 4 * math.sqrt(p), 200)
    gap = max(abs(survival_clt(p, 1.0, x) - survival_exact(p, 1.0, x)) for x in xs)
    assert gap <= 0.02


def test_fixed_range_examples():
    e = FixedRangeEnergy(20.0, K_REF, C_REF, 4.0, 0.1)
    assert survival_fixed_range(e, 25.0, 75.0) == survival_exact(e.capacity, 25.0, 75.0)
    assert survival_fixed_range(e, 25.0, 0.0) == 1.0
    unit = FixedRangeEnergy(20.0, K_REF, C_REF, 4.0, C_REF + K_REF * 20.0 ** 4)
    assert unit.capacity == pytest.approx(1.0, rel=1e-15)
    assert survival_fixed_range(unit, 1.0, math.log(2.0)) == pytest.approx(0.5, abs=1e-14)
    with pytest.raises(InvalidModelError):
        survival_fixed_range(AdjustableEnergy(K_REF, C_REF, 4.0, 0.1), 1.0, 1.0)


def test_time_driven_examples():
    assert lifetime_time_driven(10.7, 2.0) == 20.0
    assert lifetime_time_driven(0.9, 5.0) == 0.0
    assert lifetime_time_driven(1.0, 3.0) == 3.0


@pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (-1.0, 1.0, 1.0), (1.0, 0.0, 1.0),
                                  (1.0, 1.0, -1.0), (math.nan, 1.0, 1.0)])
def test_domain_errors(args):
    for fn in (survival_exact, survival_floor, survival_clt):
        with pytest.raises(DomainError):
            fn(*args)


def test_floor_conventions():
    assert survival_floor(0.5, 1.0, 0.0) == 1.0
    assert survival_floor(0.5, 1.0, 1e-9) == 0.0
    assert survival_floor(5.9, 2.0, 1.3) == survival_exact(5.0, 2.0, 1.3)


def test_depends_only_on_product():
    rng = np.random.default_rng(11)
    for _ in range(100):
        p = rng.uniform(0.5, 500)
        x = rng.uniform(0, 2 * p)
        s = rng.uniform(0.01, 100)
        assert survival_exact(p, s, x / s) == pytest.approx(survival_exact(p, 1.0, x), rel=1e-12, abs=1e-300)


def test_monotonicity():
    taus = np.linspace(0.0, 400.0, 81)
    for p in (5.0, 50.0, 220.0):
        values = [survival_exact(p, 1.0, t) for t in taus]
        resolvable = [v for v in values if 1e-300 < v < 1.0 - 1e-15]
        assert all(b < a for a, b in zip(resolvable, resolvable[1:]))
    ps = np.linspace(1.0, 300.0, 60)
    values = [survival_exact(p, 1.0, 150.0) for p in ps]
    assert all(b >= a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("p", [100.3, 150.9, 219.94, 1991.7])
def test_fractional_capacity_gap(p):
    # survival moves by at most 1/sqrt(2 pi p) per extra packet, so dropping the
    # fractional part shifts it by about frac(p) / sqrt(2 pi floor(p))
    frac = p - math.floor(p)
    xs = np.linspace(p - 5 * math.sqrt(p), p + 5 * math.sqrt(p), 400)
    gap = max(survival_exact(p, 1.0, x) - survival_exact(math.floor(p), 1.0, x) for x in xs)
    bound = frac / math.sqrt(2 * math.pi * math.floor(p))
    assert 0.0 <= gap <= 1.05 * bound
    assert gap >= 0.9 * bound


def test_sensor_survival_record():
    rec = SensorSurvival.evaluate(220.0, 1.0, 210.0)
    assert rec.s == survival_exact(220.0, 1.0, 210.0)
    assert 0.0 <= rec.s <= 1.0
