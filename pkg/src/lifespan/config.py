"""Scenario files: JSON in, validated model objects out.

A scenario looks like::

    {
      "shape":   {"shape": "circle", "radius_m": 10},
      "energy":  {"e_t": 1.3e-15, "e_o": 5e-8, "packet_bits": 1000,
                  "alpha": 4, "initial_energy_j": 0.011},
      "traffic": {"rate_per_h": 1.0},
      "nodes": 500,
      "betas": [0.1, 0.3, 0.5],
      "tau_range": {"start": 150, "stop": 250, "num": 21},
      "trials": 10000,
      "seed": 1
    }

Alternatives (exactly one of each group):

* shape: ``radius_m`` or ``area_m2`` for circles; ``side_m`` or ``area_m2``
  for ``{"shape": "polygon", "sides": n}``.
* energy: ``e_t``/``e_o``/``packet_bits`` or ``k``/``c``; ``range_m``
  switches to a fixed transmission range.
* traffic: ``rate_per_h``, ``rate_table`` (``distance_m`` and ``rate_per_h``
  columns) or ``period_h``.
* ``beta`` or ``betas``; ``tau``, ``taus`` or ``tau_range``; ``nodes`` may
  be a number or a sorted list.

Optional keys: ``mode`` (``single-hop`` or ``multi-hop``), ``ranges_m``
(multi-hop sweep; defaults to ``energy.range_m``), ``capacity``
(``continuous``, ``floor`` or ``clt``), ``sampler``, ``level``,
``tolerance``, ``sensor_distances_m`` and ``quadrature``.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, LifespanError
from .geometry import AreaShape, Circle, RegularPolygon
from .models import (AdjustableEnergy, EnergyModel, FixedRangeEnergy, Poisson,
                     PositionPoisson, TimeDriven, TrafficModel)
from .network import CAPACITY_MODES
from .specfun import QuadratureSpec

__all__ = [
    "FieldError",
    "Scenario",
    "load_config",
    "apply_override",
    "config_digest",
    "build_scenario",
    "locate_field",
]

MODES = ("single-hop", "multi-hop")
TOP_KEYS = {
    "shape", "energy", "traffic", "nodes", "beta", "betas", "tau", "taus", "tau_range",
    "mode", "ranges_m", "capacity", "sampler", "trials", "seed", "level", "tolerance",
    "sensor_distances_m", "quadrature", "comment",
}


class FieldError(ConfigError):
    """A validation failure tied to a dotted config path."""

    def __init__(self, path: str, message: str, line: int | None = None):
        self.path = path
        self.line = line
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class Scenario:
    shape: AreaShape
    energy: EnergyModel
    traffic: TrafficModel
    nodes: tuple
    betas: tuple
    taus: tuple
    mode: str = "single-hop"
    ranges_m: tuple = ()
    capacity: str = "continuous"
    sampler: str = "auto"
    trials: int = 1000
    seed: int = 0
    level: float = 0.99
    tolerance: float = 0.02
    sensor_distances_m: tuple = (0.0,)
    quadrature: QuadratureSpec | None = None


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def load_config(path) -> tuple[dict, str]:
    """Parse a JSON scenario file; returns the object and the raw text."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FieldError("<json>", f"{exc.msg} (column {exc.colno})", exc.lineno) from None
    if not isinstance(data, dict):
        raise FieldError("<root>", "a scenario must be a JSON object", 1)
    return data, text


def apply_override(data: dict, assignment: str) -> dict:
    """Apply ``dotted.path=value``; the value is read as JSON, else kept as a string."""
    if "=" not in assignment:
        raise FieldError(assignment, "override must look like key.path=value")
    path, raw = assignment.split("=", 1)
    keys = [k for k in path.strip().split(".")]
    if not all(keys):
        raise FieldError(path, "empty key in override path")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    out = copy.deepcopy(data)
    node = out
    for depth, key in enumerate(keys[:-1]):
        child = node.get(key)
        if child is None:
            child = node[key] = {}
        if not isinstance(child, dict):
            raise FieldError(".".join(keys[:depth + 1]), "cannot override inside a non-object")
        node = child
    node[keys[-1]] = value
    return out


def config_digest(data: dict) -> str:
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def locate_field(text: str, path: str) -> int | None:
    """Best-effort line number of the last key in ``path`` within the raw JSON."""
    if not text or not path or path.startswith("<"):
        return None
    key = path.split(".")[-1].split("[")[0]
    match = re.search(r'"%s"\s*:' % re.escape(key), text)
    if match is None:
        return None
    return text.count("\n", 0, match.start()) + 1


# ---------------------------------------------------------------------------
# field readers
# ---------------------------------------------------------------------------

def _get(section, key, path, required=True):
    if key not in section:
        if required:
            raise FieldError(f"{path}{key}", "required field is missing")
        return None
    return section[key]


def _number(value, path, *, positive=False, nonnegative=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FieldError(path, f"expected a number, got {json.dumps(value)}")
    value = float(value)
    if not math.isfinite(value):
        raise FieldError(path, "must be finite")
    if positive and value <= 0:
        raise FieldError(path, f"must be positive, got {value:g}")
    if nonnegative and value < 0:
        raise FieldError(path, f"must be nonnegative, got {value:g}")
    if integer:
        if value != int(value):
            raise FieldError(path, f"must be an integer, got {value:g}")
        return int(value)
    return value


def _one_of(section, keys, path):
    present = [k for k in keys if k in section]
    if len(present) != 1:
        options = " | ".join(keys)
        found = ", ".join(present) if present else "none"
        raise FieldError(path.rstrip(".") or "<root>",
                         f"exactly one of ({options}) is required, found {found}")
    return present[0]


def _object(data, key):
    section = _get(data, key, "")
    if not isinstance(section, dict):
        raise FieldError(key, "expected an object")
    return section


def _sweep(value, path, **checks):
    items = value if isinstance(value, list) else [value]
    if not items:
        raise FieldError(path, "sweep must not be empty")
    out = [_number(v, f"{path}[{j}]", **checks) for j, v in enumerate(items)]
    if any(b <= a for a, b in zip(out[:-1], out[1:])):
        raise FieldError(path, "sweep values must be strictly increasing")
    return tuple(out)


# ---------------------------------------------------------------------------
# sections
# ---------------------------------------------------------------------------

def _shape(data):
    s = _object(data, "shape")
    kind = _get(s, "shape", "shape.")
    if kind == "circle":
        key = _one_of(s, ("radius_m", "area_m2"), "shape.")
        value = _number(s[key], f"shape.{key}", positive=True)
        return Circle(value) if key == "radius_m" else Circle.with_area(value)
    if kind == "polygon":
        sides = _number(_get(s, "sides", "shape."), "shape.sides", integer=True)
        if sides < 3:
            raise FieldError("shape.sides", f"a polygon needs at least 3 sides, got {sides}")
        key = _one_of(s, ("side_m", "area_m2"), "shape.")
        value = _number(s[key], f"shape.{key}", positive=True)
        return RegularPolygon(sides, value) if key == "side_m" else RegularPolygon.with_area(sides, value)
    raise FieldError("shape.shape", f"unknown shape {json.dumps(kind)}; use circle or polygon")


def _energy(data):
    e = _object(data, "energy")
    if "e_t" in e or "e_o" in e or "packet_bits" in e:
        if "k" in e or "c" in e:
            raise FieldError("energy", "give either e_t/e_o/packet_bits or k/c, not both")
        bits = _number(_get(e, "packet_bits", "energy."), "energy.packet_bits", positive=True)
        k = bits * _number(_get(e, "e_t", "energy."), "energy.e_t", positive=True)
        c = bits * _number(_get(e, "e_o", "energy."), "energy.e_o", positive=True)
    else:
        k = _number(_get(e, "k", "energy."), "energy.k", positive=True)
        c = _number(_get(e, "c", "energy."), "energy.c", positive=True)
    alpha = _number(_get(e, "alpha", "energy."), "energy.alpha", positive=True)
    initial = _number(_get(e, "initial_energy_j", "energy."), "energy.initial_energy_j",
                      positive=True)
    if "range_m" in e:
        return FixedRangeEnergy(_number(e["range_m"], "energy.range_m", positive=True),
                                k, c, alpha, initial)
    return AdjustableEnergy(k, c, alpha, initial)


def _traffic(data):
    t = _object(data, "traffic")
    key = _one_of(t, ("rate_per_h", "rate_table", "period_h"), "traffic.")
    if key == "rate_per_h":
        return Poisson(_number(t[key], "traffic.rate_per_h", positive=True))
    if key == "period_h":
        return TimeDriven(_number(t[key], "traffic.period_h", positive=True))
    table = t[key]
    if not isinstance(table, dict):
        raise FieldError("traffic.rate_table", "expected an object with distance_m and rate_per_h")
    dist = _sweep(_get(table, "distance_m", "traffic.rate_table."),
                  "traffic.rate_table.distance_m", nonnegative=True)
    rates = _get(table, "rate_per_h", "traffic.rate_table.")
    if not isinstance(rates, list) or len(rates) != len(dist):
        raise FieldError("traffic.rate_table.rate_per_h", "needs one rate per distance")
    rates = [_number(r, f"traffic.rate_table.rate_per_h[{j}]", positive=True)
             for j, r in enumerate(rates)]
    return PositionPoisson.from_table(dist, rates)


def _taus(data):
    key = _one_of(data, ("tau", "taus", "tau_range"), "")
    if key != "tau_range":
        return _sweep(data[key], key, nonnegative=True)
    spec = data[key]
    if not isinstance(spec, dict):
        raise FieldError("tau_range", "expected an object with start, stop and num")
    start = _number(_get(spec, "start", "tau_range."), "tau_range.start", nonnegative=True)
    stop = _number(_get(spec, "stop", "tau_range."), "tau_range.stop", nonnegative=True)
    num = _number(_get(spec, "num", "tau_range."), "tau_range.num", positive=True, integer=True)
    if num > 1 and stop <= start:
        raise FieldError("tau_range.stop", "must exceed start")
    return tuple(float(x) for x in np.linspace(start, stop, num))


def _choice(data, key, options, default):
    value = data.get(key, default)
    if value not in options:
        raise FieldError(key, f"must be one of {', '.join(options)}, got {json.dumps(value)}")
    return value


def build_scenario(data: dict) -> Scenario:
    """Validate a parsed config and build the model objects.

    Raises :class:`FieldError` naming the offending dotted path.
    """
    unknown = sorted(set(data) - TOP_KEYS)
    if unknown:
        raise FieldError(unknown[0], "unknown field")
    try:
        shape = _shape(data)
        energy = _energy(data)
        traffic = _traffic(data)
    except FieldError:
        raise
    except LifespanError as exc:
        raise FieldError("<model>", str(exc)) from None

    nodes = _sweep(_get(data, "nodes", ""), "nodes", positive=True, integer=True)
    beta_key = _one_of(data, ("beta", "betas"), "")
    betas = _sweep(data[beta_key], beta_key, positive=True)
    if betas[-1] > 1:
        raise FieldError(beta_key, f"dead-node ratio must not exceed 1, got {betas[-1]:g}")
    taus = _taus(data)

    mode = _choice(data, "mode", MODES, "single-hop")
    ranges = ()
    if mode == "multi-hop":
        if "ranges_m" in data:
            ranges = _sweep(data["ranges_m"], "ranges_m", positive=True)
        elif isinstance(energy, FixedRangeEnergy):
            ranges = (energy.range_m,)
        else:
            raise FieldError("ranges_m", "multi-hop mode needs ranges_m or energy.range_m")
        if not isinstance(traffic, Poisson):
            raise FieldError("traffic", "multi-hop mode needs a constant rate_per_h")

    capacity = _choice(data, "capacity", CAPACITY_MODES, "continuous")
    sampler = _choice(data, "sampler", ("auto", "sum", "gamma"), "auto")
    trials = _number(data.get("trials", 1000), "trials", positive=True, integer=True)
    seed = _number(data.get("seed", 0), "seed", nonnegative=True, integer=True)
    level = _number(data.get("level", 0.99), "level", positive=True)
    if level >= 1:
        raise FieldError("level", "confidence level must be below 1")
    tolerance = _number(data.get("tolerance", 0.02), "tolerance", nonnegative=True)
    distances = _sweep(data.get("sensor_distances_m", 0.0), "sensor_distances_m", nonnegative=True)

    quad = None
    if "quadrature" in data:
        q = data["quadrature"]
        if not isinstance(q, dict):
            raise FieldError("quadrature", "expected an object")
        try:
            quad = QuadratureSpec(**{k: v for k, v in q.items()})
        except TypeError as exc:
            raise FieldError("quadrature", str(exc)) from None
        except LifespanError as exc:
            raise FieldError("quadrature", str(exc)) from None

    return Scenario(shape=shape, energy=energy, traffic=traffic, nodes=nodes, betas=betas,
                    taus=taus, mode=mode, ranges_m=ranges, capacity=capacity, sampler=sampler,
                    trials=trials, seed=seed, level=level, tolerance=tolerance,
                    sensor_distances_m=distances, quadrature=quad)
