"""Scenario configuration files (JSON, strict keys).

Example
-------
::

    {
      "geometry": {"kind": "two_finite_intervals", "T": 1.5, "L": 2.0},
      "masses": {"m1": 1.0, "m2": 2.0},
      "initial": {"psi1_left": {"type": "gaussian_window", "center": -1.0, "width": 0.25}},
      "boundary": {"alpha1_left": {"type": "zero"}},
      "quadrature": {"tail_tolerance": 1e-4},
      "reference": {"dx": 0.0009765625},
      "query": {"x_left": [-2.0, 0.0], "x_right": [0.0, 2.0], "x_count": 21,
                "t": [0.5, 1.0, 1.5]},
      "output": {"dir": "out"},
      "erratum_fixes": true
    }

Missing initial or boundary entries are zero profiles.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError
from .massive.evaluate import QuadratureSpec
from .model import Geometry, GeometryKind, Region
from .profiles import ZeroProfile, profile_from_dict
from .scenario import BOUNDARY_KEYS, INITIAL_KEYS, Scenario

_TOP_KEYS = {"geometry", "masses", "initial", "boundary", "quadrature", "reference",
             "query", "output", "erratum_fixes"}
_REQUIRED = {"geometry", "masses", "query"}
_QUAD_KEYS = {f.name for f in fields(QuadratureSpec)}


@dataclass(frozen=True)
class QueryGrid:
    """Uniform x grid per region and a list of times."""

    x_left: tuple
    x_right: tuple
    x_count: int
    t: tuple

    def positions(self, region: Region) -> np.ndarray:
        lo, hi = self.x_left if region is Region.LEFT else self.x_right
        return np.linspace(lo, hi, self.x_count)


@dataclass(frozen=True)
class ScenarioConfig:
    """Parsed configuration; see the module docstring for the file layout."""

    scenario: Scenario
    quadrature: QuadratureSpec
    reference_dx: float
    query: QueryGrid
    output_dir: str = "out"
    erratum_fixes: bool = False
    source: Optional[str] = field(default=None, compare=False)

    @property
    def variant(self) -> str:
        return "corrected" if self.erratum_fixes else "printed"

    def to_dict(self) -> dict:
        sc = self.scenario
        geo = {"kind": sc.geometry.kind.value, "T": sc.geometry.T}
        if sc.geometry.finite:
            geo["L"] = sc.geometry.L
        out = {
            "geometry": geo,
            "masses": {"m1": sc.m1, "m2": sc.m2},
            "initial": {k: p.to_dict() for k, p in zip(INITIAL_KEYS, sc.initial)},
        }
        if sc.boundary is not None:
            out["boundary"] = {k: p.to_dict() for k, p in zip(BOUNDARY_KEYS, sc.boundary)}
        default = QuadratureSpec()
        quad = {f.name: getattr(self.quadrature, f.name) for f in fields(QuadratureSpec)
                if getattr(self.quadrature, f.name) != getattr(default, f.name)}
        if quad:
            out["quadrature"] = quad
        out["reference"] = {"dx": self.reference_dx}
        q = self.query
        out["query"] = {"x_left": list(q.x_left), "x_right": list(q.x_right),
                        "x_count": q.x_count, "t": list(q.t)}
        out["output"] = {"dir": self.output_dir}
        out["erratum_fixes"] = self.erratum_fixes
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _line_of(text: Optional[str], path: str) -> Optional[int]:
    """Line of the first occurrence of the last key of a dotted path."""
    if not text or not path:
        return None
    key = path.split(".")[-1].split("[")[0]
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _check_keys(obj, allowed, where, required=()):
    if not isinstance(obj, dict):
        raise ConfigError("expected an object", field=where)
    extra = set(obj) - set(allowed)
    if extra:
        bad = sorted(extra)[0]
        raise ConfigError(f"unknown key {bad!r}", field=f"{where}.{bad}" if where else bad)
    missing = set(required) - set(obj)
    if missing:
        raise ConfigError(f"missing key {sorted(missing)[0]!r}", field=where or None)


def _number(obj, key, where, positive=False, nonnegative=False):
    v = obj.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
        raise ConfigError(f"expected a finite number, got {v!r}", field=f"{where}.{key}")
    if positive and not v > 0:
        raise ConfigError(f"must be positive, got {v}", field=f"{where}.{key}")
    if nonnegative and v < 0:
        raise ConfigError(f"must be nonnegative, got {v}", field=f"{where}.{key}")
    return float(v)


def _tiles(length, dx):
    n = round(length / dx)
    return n >= 0 and abs(n * dx - length) <= 1e-12 * max(1.0, length)


def parse_config(data: dict, text: Optional[str] = None) -> ScenarioConfig:
    """Validate a decoded configuration mapping."""
    try:
        return _parse(data, text)
    except ConfigError as exc:
        if exc.line is None and exc.field is not None:
            line = _line_of(text, exc.field)
            if line is not None:
                raise ConfigError(str(exc).split("] ", 1)[-1], field=exc.field, line=line) from exc
        raise


def _parse(data, text):
    _check_keys(data, _TOP_KEYS, "", _REQUIRED)

    g = data["geometry"]
    _check_keys(g, {"kind", "T", "L"}, "geometry", {"kind", "T"})
    try:
        kind = GeometryKind(g["kind"])
    except ValueError:
        raise ConfigError(f"unknown geometry kind {g['kind']!r}; use "
                          f"{[k.value for k in GeometryKind]}", field="geometry.kind")
    T = _number(g, "T", "geometry", positive=True)
    L = _number(g, "L", "geometry", positive=True) if "L" in g else None
    try:
        geometry = Geometry(kind, T, L)
    except ValueError as exc:
        raise ConfigError(str(exc), field="geometry.L") from exc

    ms = data["masses"]
    _check_keys(ms, {"m1", "m2"}, "masses", {"m1", "m2"})
    m1 = _number(ms, "m1", "masses", nonnegative=True)
    m2 = _number(ms, "m2", "masses", nonnegative=True)

    def profiles(section, keys):
        block = data.get(section, {})
        _check_keys(block, keys, section)
        return tuple(profile_from_dict(block[k], f"{section}.{k}") if k in block else ZeroProfile()
                     for k in keys)

    initial = profiles("initial", INITIAL_KEYS)
    boundary = None
    if "boundary" in data:
        boundary = profiles("boundary", BOUNDARY_KEYS)
        if not geometry.finite and any(not isinstance(b, ZeroProfile) for b in boundary):
            raise ConfigError("outer boundary data needs finite intervals", field="boundary")
        if not geometry.finite:
            boundary = None
    try:
        scenario = Scenario(geometry, m1, m2, initial, boundary)
    except ValueError as exc:
        raise ConfigError(str(exc), field="masses") from exc

    quad = data.get("quadrature", {})
    _check_keys(quad, _QUAD_KEYS, "quadrature")
    try:
        spec = QuadratureSpec(**quad)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), field="quadrature") from exc

    ref = data.get("reference", {})
    _check_keys(ref, {"dx"}, "reference")
    dx = _number(ref, "dx", "reference", positive=True) if "dx" in ref else 2.0 ** -10
    if not _tiles(T, dx):
        raise ConfigError(f"dx={dx} does not tile T={T}", field="reference.dx")
    if geometry.finite and not _tiles(L, dx):
        raise ConfigError(f"dx={dx} does not tile L={L}", field="reference.dx")

    q = data["query"]
    _check_keys(q, {"x_left", "x_right", "x_count", "t"}, "query", {"x_left", "x_right", "t"})
    ranges = {}
    for region, key in ((Region.LEFT, "x_left"), (Region.RIGHT, "x_right")):
        r = q[key]
        if (not isinstance(r, list) or len(r) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in r)):
            raise ConfigError("expected [low, high]", field=f"query.{key}")
        lo, hi = float(r[0]), float(r[1])
        blo, bhi = geometry.region_bounds(region)
        if not (blo <= lo <= hi <= bhi):
            raise ConfigError(f"range [{lo}, {hi}] outside region [{blo}, {bhi}]", field=f"query.{key}")
        ranges[key] = (lo, hi)
    count = q.get("x_count", 21)
    if isinstance(count, bool) or not isinstance(count, int) or count < 1:
        raise ConfigError(f"expected a positive integer, got {count!r}", field="query.x_count")
    ts = q["t"]
    if not isinstance(ts, list) or not ts:
        raise ConfigError("expected a nonempty list of times", field="query.t")
    times = []
    for i, tv in enumerate(ts):
        if isinstance(tv, bool) or not isinstance(tv, (int, float)) or not 0 < tv <= T:
            raise ConfigError(f"time {tv!r} outside (0, T]", field=f"query.t[{i}]")
        if not _tiles(float(tv), dx):
            raise ConfigError(f"time {tv} is not a multiple of reference dx={dx}", field=f"query.t[{i}]")
        times.append(float(tv))
    grid = QueryGrid(ranges["x_left"], ranges["x_right"], count, tuple(times))

    out = data.get("output", {})
    _check_keys(out, {"dir"}, "output")
    out_dir = out.get("dir", "out")
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError("expected a directory name", field="output.dir")
    fixes = data.get("erratum_fixes", False)
    if not isinstance(fixes, bool):
        raise ConfigError("expected true or false", field="erratum_fixes")
    return ScenarioConfig(scenario, spec, dx, grid, out_dir, fixes, text)


def loads(text: str) -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    return parse_config(data, text)


def load_config(path) -> ScenarioConfig:
    """Read and validate a configuration file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return loads(text)
