"""Problem statement shared by all solvers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import Component, Geometry, Region, RegionParams
from .profiles import Profile, ZeroProfile

INITIAL_KEYS = ("psi1_left", "psi2_left", "psi1_right", "psi2_right")
BOUNDARY_KEYS = ("alpha1_left", "alpha2_left", "alpha1_right", "alpha2_right")


def _key(region: Region, component: Component) -> int:
    return 2 * (int(region) - 1) + (int(component) - 1)


@dataclass(frozen=True)
class Scenario:
    """Geometry, masses, the four initial profiles and (finite case) the
    four outer-boundary profiles.

    Profiles are ordered (psi1, psi2) for the left region then the right
    region.  Boundary profiles are functions of time: ``alpha1_left`` and
    ``alpha2_left`` live at x = -L, the others at x = +L.
    """

    geometry: Geometry
    m1: float
    m2: float
    initial: tuple
    boundary: Optional[tuple] = None

    def __post_init__(self):
        RegionParams(Region.LEFT, self.m1)
        RegionParams(Region.RIGHT, self.m2)
        if len(self.initial) != 4:
            raise ValueError("need four initial profiles")
        if self.geometry.finite:
            if self.boundary is None:
                object.__setattr__(self, "boundary", (ZeroProfile(),) * 4)
            if len(self.boundary) != 4:
                raise ValueError("need four boundary profiles")
        elif self.boundary is not None and any(not b.is_zero for b in self.boundary):
            raise ValueError("outer boundary data is only allowed for finite intervals")
        else:
            object.__setattr__(self, "boundary", None)

    def mass(self, region: Region) -> float:
        return self.m1 if region is Region.LEFT else self.m2

    def initial_profile(self, region: Region, component: Component) -> Profile:
        return self.initial[_key(region, component)]

    def boundary_profile(self, region: Region, component: Component) -> Profile:
        if self.boundary is None:
            return ZeroProfile()
        return self.boundary[_key(region, component)]

    @property
    def massless(self) -> bool:
        return self.m1 == 0 and self.m2 == 0

    @property
    def support_radius(self) -> float:
        """Largest |x| reached by the support of any nonzero initial profile."""
        r = 0.0
        for p in self.initial:
            if not p.is_zero:
                r = max(r, abs(p.support[0]), abs(p.support[1]))
        return r

    def with_masses(self, m1: float, m2: float) -> "Scenario":
        return Scenario(self.geometry, m1, m2, self.initial, self.boundary)

    def compatibility_mismatch(self) -> dict:
        """Corner mismatches between initial data and interface/boundary data."""
        p = self.initial
        out = {
            "interface_psi1": abs(complex(p[0](0.0)) - complex(p[2](0.0))),
            "interface_psi2": abs(complex(p[1](0.0)) - complex(p[3](0.0))),
        }
        if self.geometry.finite:
            L = self.geometry.L
            b = self.boundary
            out["left_psi1"] = abs(complex(p[0](-L)) - complex(b[0](0.0)))
            out["left_psi2"] = abs(complex(p[1](-L)) - complex(b[1](0.0)))
            out["right_psi1"] = abs(complex(p[2](L)) - complex(b[2](0.0)))
            out["right_psi2"] = abs(complex(p[3](L)) - complex(b[3](0.0)))
        return out
