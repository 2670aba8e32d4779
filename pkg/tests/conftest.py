"""Shared fixtures and the per-criterion acceptance summary."""
import math

import pytest

from lifespan.geometry import Circle
from lifespan.models import AdjustableEnergy, FixedRangeEnergy, Poisson

# 1000-bit packets at 0.0013 pJ/bit/m^4 and 50 nJ/bit
K_REF = 1.3e-12
C_REF = 5e-5

_ACCEPTANCE = {}


@pytest.fixture
def ref_energy():
    return AdjustableEnergy(K_REF, C_REF, 4.0, 11e-3)


@pytest.fixture
def ref_disc():
    return Circle(10.0)


@pytest.fixture
def unit_rate():
    return Poisson(1.0)


@pytest.fixture
def ring_energy():
    return FixedRangeEnergy(20.0, K_REF, C_REF, 4.0, 0.1)


@pytest.fixture
def equal_area():
    return 100.0 * math.pi


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    key = props["criterion"]
    entry = _ACCEPTANCE.setdefault(key, {"ok": True, "detail": ""})
    if report.when == "call" or report.failed:
        entry["ok"] = entry["ok"] and report.passed
        if props.get("detail"):
            entry["detail"] = props["detail"]


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE):
        entry = _ACCEPTANCE[key]
        status = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {key:>2}: {status}  {entry['detail']}")
