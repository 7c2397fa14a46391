"""Quadrature of the massive integral representations.

Every formula is ``int exp(ikx) F(k) dk`` over the real line with ``F`` a
sum of slot coefficients times transforms.  Inside its region the
corrected formula reconstructs the odd extension of the solution about
x = 0, which has a value jump at the interface and, on finite intervals,
value and slope jumps at x = -L and x = +L.  Those jumps make ``F`` decay
only like 1/k.  They are removed analytically: known blocks with the same
jumps are subtracted in k and added back in x, which is an exact identity
for any formula.  The remainder decays fast enough for a truncated
composite Gauss-Legendre rule.

The truncation radius starts from the initial-data decay envelope and is
doubled until the remainder on the annulus ``K <= |k| <= 2K`` is below the
tail tolerance.
"""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import QuadratureBudgetExceeded, TraceHorizonExceeded
from ..model import Component, Geometry, QueryPoint, Region
from ..profiles import SpatialTransform, time_transform_imag
from ..quadrature import gauss_legendre
from ..reference import TraceTable
from ..scenario import Scenario
from .terms import compile_terms

log = logging.getLogger(__name__)

_OTHER = {Region.LEFT: Region.RIGHT, Region.RIGHT: Region.LEFT}


@dataclass(frozen=True)
class QuadratureSpec:
    """k-space truncation and panel rule.

    Parameters
    ----------
    k_max : float, optional
        Initial truncation radius; by default the smallest k where the
        initial-data envelope times k drops below ``tail_tolerance``, and at
        least ``k_min``.
    panels : int, optional
        Number of panels on ``[0, k_max]``; by default the panel width is
        ``pi / (|x| + t + L_eff)``.
    nodes_per_panel : int
    tail_tolerance : float
        Bound on the remainder integral over the annulus ``[K, 2K]``.
    k_max_limit : float
        Largest radius the doubling may reach.  It is further capped at
        ``2 / dt`` of the trace table, beyond which the per-knot time rule
        no longer resolves ``exp(i alpha s)``.
    adaptive : bool
        Disable to integrate over ``[-k_max, k_max]`` only.
    """

    k_max: Optional[float] = None
    panels: Optional[int] = None
    nodes_per_panel: int = 16
    tail_tolerance: float = 1e-4
    k_max_limit: float = 1600.0
    k_min: float = 32.0
    adaptive: bool = True

    def __post_init__(self):
        if self.k_max is not None and not self.k_max > 0:
            raise ValueError("k_max must be positive")
        if self.panels is not None and self.panels < 1:
            raise ValueError("panels must be positive")
        if self.nodes_per_panel < 1 or not self.tail_tolerance > 0:
            raise ValueError("invalid quadrature settings")

    def initial_k_max(self, profiles) -> float:
        if self.k_max is not None:
            return float(self.k_max)
        k = self.k_min
        for p in profiles:
            kp = p.kmax_for(self.tail_tolerance)
            if kp is not None:
                k = max(k, kp)
        return k

    def panel_width(self, x_extent: float, t: float, L_eff: float, K: float) -> float:
        if self.panels is not None:
            return K / self.panels
        return np.pi / (x_extent + t + L_eff)


@dataclass
class Evaluation:
    """Values at a batch of points plus quadrature bookkeeping."""

    values: np.ndarray
    k_max: float
    panel_width: float
    n_nodes: int
    tail_estimate: Optional[float]
    per_term: dict = field(default_factory=dict)


def _half_grid(a, b, width, n):
    panels = max(1, int(np.ceil((b - a) / width - 1e-9)))
    edges = np.linspace(a, b, panels + 1)
    g, w = gauss_legendre(n)
    half = 0.5 * np.diff(edges)
    nodes = ((edges[:-1] + half)[:, None] + half[:, None] * g).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def _mirror(v):
    return np.concatenate([v[::-1], v])


class MassiveEvaluator:
    """Evaluate the massive representations for one scenario and trace table.

    Parameters
    ----------
    scenario : Scenario
        Both masses must be positive.
    traces : TraceTable
        Interface (and outer-boundary) traces, typically from the reference
        solver.
    variant : {"corrected", "printed", "printed_minimal"}
    spec : QuadratureSpec
    """

    def __init__(self, scenario: Scenario, traces: TraceTable, variant: str = "corrected",
                 spec: QuadratureSpec = QuadratureSpec()):
        if scenario.m1 <= 0 or scenario.m2 <= 0:
            raise ValueError("the massive representation needs positive masses")
        self.scenario = scenario
        self.traces = traces
        self.variant = variant
        self.spec = spec
        geo = scenario.geometry
        self._spatial = {(r, c): SpatialTransform(scenario.initial_profile(r, c), r, geo)
                         for r in Region for c in Component}
        self._trace_cache = {}
        times = traces.times
        self._trace_k_limit = 2.0 / (times[1] - times[0]) if times.size > 1 else np.inf
        self._lock = threading.Lock()

    # -- slot values -----------------------------------------------------
    def _trace_transforms(self, region, kpos, t):
        """Time transforms of every trace row at +-alpha(k), shared by all
        components of a region evaluated on the same grid."""
        key = (region, float(t), kpos.tobytes())
        with self._lock:
            hit = self._trace_cache.get(key)
        if hit is not None:
            return hit
        a = np.hypot(kpos, self.scenario.mass(region))
        out = self.traces.time_transform_pair(tuple(self.traces.rows), a, t)
        with self._lock:
            if len(self._trace_cache) >= 32:
                self._trace_cache.clear()
            self._trace_cache[key] = out
        return out

    def _boundary_transform(self, region, component, kpos, t, sgn, rows):
        """Time transform of the outer-boundary value: inflow from the
        prescribed profile, outflow from the trace table."""
        inflow = (region is Region.LEFT) == (component is Component.PSI1)
        if inflow:
            a = np.hypot(kpos, self.scenario.mass(region))
            return time_transform_imag(self.scenario.boundary_profile(region, component), sgn * a, t)
        row = f"psi{int(component)}_at_{'minusL' if region is Region.LEFT else 'L'}"
        return rows[row][0 if sgn > 0 else 1]

    def _slot_values(self, slots, region, kpos, t):
        k = np.concatenate([-kpos[::-1], kpos])
        rows = None
        if any(slot[0] in "HGQ" for slot in slots):
            rows = self._trace_transforms(region, kpos, t)
        vals = {}
        for slot in slots:
            kind, idx, sign = slot[0], slot[1], slot[2]
            sgn = 1.0 if sign == "p" else -1.0
            pick = 0 if sign == "p" else 1
            comp = Component(int(idx))
            if kind == "I":
                vals[slot] = self._spatial[(region, comp)](sgn * k)
            elif kind == "J":
                vals[slot] = self._spatial[(_OTHER[region], comp)](sgn * k)
            elif kind == "H":
                vals[slot] = _mirror(rows[f"psi{idx}_at_0"][pick])
            elif kind == "G":
                vals[slot] = _mirror(self._boundary_transform(region, comp, kpos, t, sgn, rows))
            elif kind == "Q":
                vals[slot] = _mirror(rows["psi1_at_L"][pick])
            else:
                raise KeyError(slot)
        return vals

    # -- jump blocks -----------------------------------------------------
    def jumps(self, region: Region, component: Component, t: float):
        """Jumps of the odd extension as (position, value, slope, curvature, inward).

        Spatial derivatives come from the traces through the equations:
        psi1_x = -psi1_t - i m psi2, psi2_x = psi2_t + i m psi1 and
        psi_xx = psi_tt + m^2 psi for both components.
        """
        tr = self.traces
        c = int(component)
        m = self.scenario.mass(region)
        J = complex(tr.value(f"psi{c}_at_0", t))
        W0 = complex(tr.derivative(f"psi{c}_at_0", t, 2)) + m * m * J
        sgn = -1.0 if region is Region.LEFT else 1.0
        out = [(0.0, 2 * sgn * J, 0.0, 2 * sgn * W0, sgn)]
        geo = self.scenario.geometry
        if geo.finite:
            L = geo.L
            side = "minusL" if region is Region.LEFT else "L"
            v = {n: complex(tr.value(f"psi{n}_at_{side}", t)) for n in (1, 2)}
            dv = {n: complex(tr.derivative(f"psi{n}_at_{side}", t)) for n in (1, 2)}
            V = v[c]
            D = -dv[1] - 1j * m * v[2] if c == 1 else dv[2] + 1j * m * v[1]
            W = complex(tr.derivative(f"psi{c}_at_{side}", t, 2)) + m * m * V
            if region is Region.LEFT:
                out += [(-L, V, D, W, 1.0), (L, V, -D, W, -1.0)]
            else:
                out += [(L, -V, -D, -W, -1.0), (-L, -V, D, -W, 1.0)]
        return out

    @staticmethod
    def _jump_hat(jumps, k):
        # transforms of sign(u) e^-|u| / 2, |u| e^-|u| / 2 and sign(u) u^2 e^-|u| / 4
        out = np.zeros(k.shape, dtype=complex)
        d = 1.0 + k * k
        for c, s, q, r, _ in jumps:
            ph = np.exp(-1j * k * c)
            out += ph * (s * (-1j * k) / d + q * (1.0 - k * k) / d ** 2
                         + r * 1j * k * (k * k - 3.0) / d ** 3)
        return out / (2 * np.pi)

    @staticmethod
    def _jump_x(jumps, x):
        out = np.zeros(x.shape, dtype=complex)
        for c, s, q, r, inward in jumps:
            u = x - c
            sg = np.where(u == 0, inward, np.sign(u))
            au = np.abs(u)
            out += np.exp(-au) * (0.5 * s * sg + 0.5 * q * au + 0.25 * r * sg * au * au)
        return out

    # -- main entry ------------------------------------------------------
    def evaluate(self, region: Region, component: Component, x, t: float,
                 diagnostics: bool = False) -> Evaluation:
        """Evaluate one component at positions ``x`` (same region) and time ``t``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        geo = self.scenario.geometry
        for xv in (x.min(), x.max()):
            QueryPoint(float(xv), t, region).check(geo)
        if t > self.traces.horizon * (1 + 1e-12):
            raise TraceHorizonExceeded(f"t={t} beyond trace horizon {self.traces.horizon}")
        spec = self.spec
        terms = compile_terms(self.variant, geo.kind, region, component)
        slots = sorted({s for term in terms for s in term.slots})
        m = self.scenario.mass(region)
        m_o = self.scenario.mass(_OTHER[region])
        L = geo.L if geo.finite else 0.0
        L_eff = geo.L if geo.finite else max(self.scenario.support_radius, 1.0)
        profiles = [p for p in self.scenario.initial if not p.is_zero]
        if geo.finite:
            profiles += [p for p in self.scenario.boundary if not p.is_zero]
        K = spec.initial_k_max(profiles)
        width = spec.panel_width(float(np.max(np.abs(x))), t, L_eff, K)
        jumps = self.jumps(region, component, t)

        def piece(a, b):
            kpos, wpos = _half_grid(a, b, width, spec.nodes_per_panel)
            k = np.concatenate([-kpos[::-1], kpos])
            w = _mirror(wpos)
            vals = self._slot_values(slots, region, kpos, t)
            params = {"k": k, "alpha": np.hypot(k, m), "m": m, "alpha_o": np.hypot(k, m_o),
                      "m_o": m_o, "t": t, "L": L}
            per = [term.evaluate(vals, params) for term in terms]
            resid = sum(per) - self._jump_hat(jumps, k)
            phase = np.exp(1j * np.outer(x, k))
            sums = phase @ (resid * w)
            per_sums = {f"integral_{term.index}": phase @ (p * w) for term, p in zip(terms, per)} \
                if diagnostics else {}
            bound = float(np.sum(np.abs(resid) * w))
            per_bound = [float(np.sum(np.abs(p) * w)) for p in per]
            return sums, per_sums, bound, per_bound, k.size

        total, per_total, _, _, n_nodes = piece(0.0, K)
        tail = None
        if spec.adaptive:
            while True:
                ann, per_ann, tail, per_bound, n_ann = piece(K, 2 * K)
                total = total + ann
                n_nodes += n_ann
                for key, v in per_ann.items():
                    per_total[key] = per_total[key] + v
                K *= 2
                if tail <= spec.tail_tolerance:
                    break
                if 2 * K > min(spec.k_max_limit, self._trace_k_limit):
                    worst = terms[int(np.argmax(per_bound))]
                    raise QuadratureBudgetExceeded(
                        f"tail {tail:.3e} above {spec.tail_tolerance:.1e} at k_max={K:g}",
                        term=f"{region.name.lower()} psi{int(component)} integral {worst.index} "
                             f"({', '.join(worst.slots)})")
        values = total + self._jump_x(jumps, x)
        if diagnostics:
            per_total["jump_blocks"] = values - sum(per_total.values())
        log.debug("massive %s psi%d t=%g: K=%g nodes=%d tail=%s", region.name, component,
                  t, K, n_nodes, tail)
        return Evaluation(values, K, width, n_nodes, tail, per_total)


def _single(scenario, traces, q, component, spec, variant):
    ev = MassiveEvaluator(scenario, traces, variant, spec)
    return complex(ev.evaluate(q.region, component, [q.x], q.t).values[0])


def eval_massive_halfline(scenario: Scenario, traces: TraceTable, q: QueryPoint,
                          component: Component, spec: QuadratureSpec = QuadratureSpec(),
                          variant: str = "corrected") -> complex:
    """Two-half-line representation at one point."""
    if scenario.geometry.finite:
        raise ValueError("scenario is posed on finite intervals")
    return _single(scenario, traces, q, component, spec, variant)


def eval_massive_finite(scenario: Scenario, traces: TraceTable, q: QueryPoint,
                        component: Component, spec: QuadratureSpec = QuadratureSpec(),
                        variant: str = "corrected") -> complex:
    """Finite-interval representation at one point."""
    if not scenario.geometry.finite:
        raise ValueError("scenario is posed on half-lines")
    return _single(scenario, traces, q, component, spec, variant)
