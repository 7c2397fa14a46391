"""Transform-method solutions of the 1-D Dirac interface problem.

Massless solutions are evaluated exactly by transport; massive solutions by
quadrature of their k-space integral representations, with interface traces
supplied by a characteristic-mesh reference solver that doubles as oracle.
"""
from .errors import (ConfigError, DiracUTMError, NonIntegrable, QuadratureBudgetExceeded,
                     SolverError, TraceHorizonExceeded)
from .massive.evaluate import (MassiveEvaluator, QuadratureSpec, eval_massive_finite,
                               eval_massive_halfline)
from .massive.terms import structural_dependency_check
from .massless import eval_massless, massless_field
from .model import (Branch, Component, Geometry, GeometryKind, QueryPoint, Region, RegionParams,
                    diagonalizer, dispersion)
from .profiles import (DecayingExponential, GaussianWindow, SampledGrid, SpatialTransform,
                       ZeroProfile, reflected_transform, spatial_transform, time_transform)
from .reference import TraceTable, solve_reference, trace_time_transform
from .scenario import Scenario

__all__ = [
    "Branch", "Component", "ConfigError", "DecayingExponential", "DiracUTMError", "GaussianWindow",
    "Geometry", "GeometryKind", "MassiveEvaluator", "NonIntegrable", "QuadratureBudgetExceeded",
    "QuadratureSpec", "QueryPoint", "Region", "RegionParams", "SampledGrid", "Scenario",
    "SolverError", "SpatialTransform", "TraceHorizonExceeded", "TraceTable", "ZeroProfile",
    "diagonalizer", "dispersion", "eval_massive_finite", "eval_massive_halfline", "eval_massless",
    "massless_field", "reflected_transform", "solve_reference", "spatial_transform",
    "structural_dependency_check", "time_transform", "trace_time_transform",
]
