"""Exact massless solution by transport along characteristics.

With zero mass psi1 moves right and psi2 moves left at unit speed.  Values
that cross the interface are read from the other region's initial data, and
in the finite case values entering through x = -L or x = +L come from the
outer-boundary profiles.  Ties on a characteristic through a corner resolve
to the initial-data branch.
"""
from __future__ import annotations

import numpy as np

from .model import Component, QueryPoint, Region
from .scenario import Scenario


def _L(scenario):
    return scenario.geometry.L if scenario.geometry.finite else np.inf


def interface_trace(scenario: Scenario, component: Component, s):
    """psi_component(0, s) for s >= 0, shared by both regions."""
    s = np.asarray(s, dtype=float)
    L = _L(scenario)
    if component is Component.PSI1:
        init = scenario.initial_profile(Region.LEFT, Component.PSI1)
        bnd = scenario.boundary_profile(Region.LEFT, Component.PSI1)
        src = lambda: init(-s)
    else:
        init = scenario.initial_profile(Region.RIGHT, Component.PSI2)
        bnd = scenario.boundary_profile(Region.RIGHT, Component.PSI2)
        src = lambda: init(s)
    if np.isinf(L):
        return src()
    return np.where(s <= L, src(), bnd(s - L))


def massless_field(scenario: Scenario, x, t, region: Region, component: Component):
    """Vectorized massless solution for one region and component."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    L = _L(scenario)
    init = scenario.initial_profile(region, component)
    if region is Region.LEFT and component is Component.PSI1:
        out = init(x - t)
        if np.isfinite(L):
            bnd = scenario.boundary_profile(Region.LEFT, Component.PSI1)
            out = np.where(x - t >= -L, out, bnd(t - x - L))
        return out
    if region is Region.LEFT:
        return np.where(x + t <= 0, init(x + t), interface_trace(scenario, Component.PSI2, x + t))
    if component is Component.PSI1:
        return np.where(x >= t, init(x - t), interface_trace(scenario, Component.PSI1, t - x))
    out = init(x + t)
    if np.isfinite(L):
        bnd = scenario.boundary_profile(Region.RIGHT, Component.PSI2)
        out = np.where(x + t <= L, out, bnd(x + t - L))
    return out


def eval_massless(scenario: Scenario, q: QueryPoint, component: Component) -> complex:
    """Massless solution at one query point.

    Raises
    ------
    ValueError
        If ``t`` exceeds the time horizon or ``x`` is outside the region.
    """
    q.check(scenario.geometry)
    if q.t > scenario.geometry.T:
        raise ValueError(f"t={q.t} exceeds the horizon T={scenario.geometry.T}")
    return complex(massless_field(scenario, q.x, q.t, q.region, component))


# slots read by each massless component: own initial data and, where the
# characteristic can cross x = 0, the other component's interface trace
MASSLESS_DEPENDENCIES = {
    (Region.LEFT, Component.PSI1): frozenset({"I1"}),
    (Region.LEFT, Component.PSI2): frozenset({"I2", "trace2"}),
    (Region.RIGHT, Component.PSI1): frozenset({"I1", "trace1"}),
    (Region.RIGHT, Component.PSI2): frozenset({"I2"}),
}
