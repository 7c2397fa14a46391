"""Domain types, dispersion branches and the 2x2 spectral matrix algebra.

The system solved throughout the package is

    d_t psi1 + d_x psi1 = -i m psi2,
    d_t psi2 - d_x psi2 = -i m psi1,

posed on a left region (x < 0) and a right region (x > 0) that share the
interface x = 0, with a constant mass per region.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np


class GeometryKind(enum.Enum):
    TWO_HALF_LINES = "two_half_lines"
    TWO_FINITE_INTERVALS = "two_finite_intervals"


class Region(enum.IntEnum):
    LEFT = 1
    RIGHT = 2


class Branch(enum.Enum):
    PLUS = 1
    MINUS = 2


class Component(enum.IntEnum):
    PSI1 = 1
    PSI2 = 2


@dataclass(frozen=True)
class Geometry:
    """Spatial layout and time horizon.

    Parameters
    ----------
    kind : GeometryKind
    T : float
        Positive time horizon.
    L : float, optional
        Interval length; required for finite intervals, forbidden otherwise.
    """

    kind: GeometryKind
    T: float
    L: Optional[float] = None

    def __post_init__(self):
        if not np.isfinite(self.T) or self.T <= 0:
            raise ValueError(f"time horizon T must be positive, got {self.T}")
        if self.kind is GeometryKind.TWO_FINITE_INTERVALS:
            if self.L is None or not np.isfinite(self.L) or self.L <= 0:
                raise ValueError(f"finite intervals need a positive L, got {self.L}")
        elif self.L is not None:
            raise ValueError("L must be absent for two half-lines")

    @property
    def finite(self) -> bool:
        return self.kind is GeometryKind.TWO_FINITE_INTERVALS

    def region_bounds(self, region: Region) -> tuple[float, float]:
        """Closed spatial extent of a region (infinite ends as +-inf)."""
        L = self.L if self.finite else np.inf
        return (-L, 0.0) if region is Region.LEFT else (0.0, L)


@dataclass(frozen=True)
class RegionParams:
    region: Region
    mass: float

    def __post_init__(self):
        if not np.isfinite(self.mass) or self.mass < 0:
            raise ValueError(f"mass must be nonnegative, got {self.mass}")

    @property
    def massless(self) -> bool:
        return self.mass == 0.0


@dataclass(frozen=True)
class QueryPoint:
    """Evaluation point tagged with the region whose formulas apply.

    x = 0 is admitted in both regions.
    """

    x: float
    t: float
    region: Region

    def check(self, geometry: Geometry) -> None:
        lo, hi = geometry.region_bounds(self.region)
        if not (lo <= self.x <= hi):
            raise ValueError(f"x={self.x} lies outside region {self.region.name} [{lo}, {hi}]")
        if self.t < 0:
            raise ValueError(f"t must be nonnegative, got {self.t}")


def alpha(mass, k):
    """Principal root sqrt(k^2 + m^2), vectorized over k."""
    k = np.asarray(k, dtype=float)
    return np.hypot(k, mass)


def dispersion(mass: float, branch: Branch, k):
    """Dispersion branch value.

    Returns ``+i*sqrt(k^2+m^2)`` for ``Branch.PLUS`` and its negative for
    ``Branch.MINUS``.  For ``mass == 0`` the massless branches ``+-i*k`` are
    returned instead of ``+-i*|k|``.
    """
    if mass < 0:
        raise ValueError("mass must be nonnegative")
    k = np.asarray(k, dtype=float)
    root = k if mass == 0 else alpha(mass, k)
    sign = 1.0 if branch is Branch.PLUS else -1.0
    return sign * 1j * root


def lambda_matrix(mass: float, k: float) -> np.ndarray:
    """Symbol of the spatial operator, [[ik, im], [im, -ik]]."""
    return np.array([[1j * k, 1j * mass], [1j * mass, -1j * k]], dtype=complex)


X_MATRIX = np.diag([-1.0, 1.0]).astype(complex)


@dataclass(frozen=True)
class SpectralMatrices:
    """Lambda(k), the diagonalizer A(k) and its eigenvalues for one mass and k."""

    mass: float
    k: float
    Lambda: np.ndarray
    A: np.ndarray
    omega: np.ndarray
    X: np.ndarray = X_MATRIX

    def A_inverse(self) -> np.ndarray:
        """Inverse of A through the adjugate; det = i m (Omega2 - Omega1)."""
        om1, om2 = self.omega
        det = 1j * self.mass * (om2 - om1)
        adj = np.array([[self.A[1, 1], -self.A[0, 1]], [-self.A[1, 0], self.A[0, 0]]])
        return adj / det


def diagonalizer(mass: float, k: float) -> SpectralMatrices:
    """Build A(k) with rows [im, Omega_j - ik] so that A Lambda = diag(Omega) A."""
    if mass <= 0:
        raise ValueError("diagonalizer requires mass > 0; the massless symbol is already diagonal")
    om1 = complex(dispersion(mass, Branch.PLUS, k))
    om2 = complex(dispersion(mass, Branch.MINUS, k))
    A = np.array([[1j * mass, om1 - 1j * k], [1j * mass, om2 - 1j * k]], dtype=complex)
    return SpectralMatrices(mass, float(k), lambda_matrix(mass, k), A, np.array([om1, om2]))
