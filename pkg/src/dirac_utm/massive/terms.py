"""Term lists of the massive integral representations.

Each component is a sum of real-line integrals over k.  The integrands are
stored as strings in ``data/*.json`` (one entry per integral) and compiled
here into numeric coefficient functions, one per data slot.

Data slots
----------
I1p, I1m, I2p, I2m
    Spatial transforms of the region's own initial psi1, psi2 at +k and -k.
J2p, J2m
    Transform of the other region's initial psi2 at +k and -k.
H1p, H1m, H2p, H2m
    Time transforms of the interface traces psi1(0, s), psi2(0, s) at
    Omega = +i alpha and Omega = -i alpha.
G1p, G1m, G2p, G2m
    Time transforms of psi1, psi2 at the region's outer boundary
    (x = -L on the left, x = +L on the right).
Q1p
    Time transform of psi1 at x = +L, at Omega = +i alpha of the left region.

Parameters are ``k, alpha, m, alpha_o, m_o, t, L`` where ``_o`` marks the
other region.

Variants
--------
``printed``
    The representations as published.
``printed_minimal``
    ``printed`` with the two isolated slips in the finite left-region psi1
    list replaced (other-region data in one integral, ``Q1p`` read as ``G1p``).
``corrected``
    Representations re-derived by eliminating, for each component, the
    interface transform of the other component.
"""
from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import parse_expr

from ..model import Component, GeometryKind, Region

SLOTS = ("I1p", "I1m", "I2p", "I2m", "J2p", "J2m", "H1p", "H1m", "H2p", "H2m",
         "G1p", "G1m", "G2p", "G2m", "Q1p")
PARAMS = ("k", "alpha", "m", "alpha_o", "m_o", "t", "L")
VARIANTS = ("printed", "printed_minimal", "corrected")

_SYM = {name: sp.Symbol(name) for name in SLOTS}
_SYM.update({name: sp.Symbol(name, real=True) for name in PARAMS + ("x",)})
_SYM.update({"I": sp.I, "pi": sp.pi, "exp": sp.exp, "sin": sp.sin, "cos": sp.cos})
# bare parser namespace, so any other name becomes a plain symbol
_GLOBALS = {"Integer": sp.Integer, "Float": sp.Float, "Rational": sp.Rational, "Symbol": sp.Symbol}

_MINIMAL_SUBS = {"J2p": "I2p", "J2m": "I2m", "alpha_o": "alpha", "m_o": "m", "Q1p": "G1p"}

_GEO_KEY = {GeometryKind.TWO_HALF_LINES: "two_half_lines",
            GeometryKind.TWO_FINITE_INTERVALS: "two_finite_intervals"}
_REGION_KEY = {Region.LEFT: "left", Region.RIGHT: "right"}


@functools.lru_cache(maxsize=None)
def load_term_data(name: str) -> dict:
    text = resources.files(__package__).joinpath("data", f"{name}.json").read_text()
    return json.loads(text)


def raw_integrands(variant: str, kind: GeometryKind, region: Region, component: Component):
    """Integrand strings of one component, one per integral."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    source = "corrected" if variant == "corrected" else "printed"
    entries = load_term_data(source)[_GEO_KEY[kind]][_REGION_KEY[region]][f"psi{int(component)}"]
    out = [e["integrand"] for e in entries]
    if variant == "printed_minimal":
        subs = {_SYM[a]: _SYM[b] for a, b in _MINIMAL_SUBS.items()}
        out = [str(sp.sympify(s, locals=_SYM).xreplace(subs)) for s in out]
    return tuple(out)


@dataclass(frozen=True)
class CompiledTerm:
    """Integral with the factor exp(ikx) removed and split per data slot."""

    index: int
    source: str
    slots: tuple
    coefficients: tuple  # numeric callables of PARAMS

    def evaluate(self, values: dict, params: dict):
        """Sum over slots of coefficient times slot value, vectorized over k."""
        args = [params[p] for p in PARAMS]
        total = 0.0
        for slot, fn in zip(self.slots, self.coefficients):
            total = total + np.asarray(fn(*args)) * values[slot]
        return total


def _compile_one(index: int, text: str) -> CompiledTerm:
    try:
        expr = parse_expr(text, local_dict=dict(_SYM), global_dict=dict(_GLOBALS))
    except (SyntaxError, TypeError, ValueError) as exc:
        raise ValueError(f"integral {index}: cannot parse {text!r}: {exc}") from exc
    unknown = {s.name for s in expr.free_symbols} - set(SLOTS) - set(PARAMS) - {"x"}
    if unknown:
        raise ValueError(f"integral {index}: unknown symbols {sorted(unknown)}")
    x, k = _SYM["x"], _SYM["k"]
    coef = expr.subs(x, 0)
    slots = tuple(s for s in SLOTS if _SYM[s] in expr.free_symbols)
    parts = [sp.diff(coef, _SYM[s]) for s in slots]
    # the x-dependence must be exactly exp(ikx) and the integrand linear in the slots
    rng = np.random.default_rng(index)
    point = {_SYM[p]: float(v) for p, v in zip(PARAMS, rng.uniform(0.3, 1.7, len(PARAMS)))}
    point.update({_SYM[s]: complex(*rng.normal(size=2)) for s in SLOTS})
    xv = 0.37
    lhs = complex(expr.subs(point).subs(x, xv).evalf())
    rhs = complex((sum(p * _SYM[s] for p, s in zip(parts, slots)) * sp.exp(sp.I * k * xv)).subs(point).evalf())
    if abs(lhs - rhs) > 1e-10 * max(1.0, abs(lhs)):
        raise ValueError(f"integral {index} is not of the form exp(ikx) * linear(slots)")
    args = [_SYM[p] for p in PARAMS]
    fns = tuple(_vectorize_constant(sp.lambdify(args, p, modules="numpy")) for p in parts)
    return CompiledTerm(index, text, slots, fns)


def _vectorize_constant(fn):
    # lambdify returns a scalar when the coefficient does not depend on k
    def wrapped(*args):
        val = fn(*args)
        return val if np.ndim(val) else np.full(np.shape(args[0]), val, dtype=complex)
    return wrapped


@functools.lru_cache(maxsize=None)
def compile_terms(variant: str, kind: GeometryKind, region: Region, component: Component):
    """Compiled integrals of one component (cached per process)."""
    return tuple(_compile_one(i + 1, s)
                 for i, s in enumerate(raw_integrands(variant, kind, region, component)))


def structural_dependency_check(component: Component, region: Region = Region.LEFT,
                                kind: GeometryKind = GeometryKind.TWO_HALF_LINES,
                                variant: str = "printed") -> dict:
    """Report which data slots a component's formula reads.

    Returns
    -------
    dict
        ``slots`` (all slots), ``traces`` (interface trace slots),
        ``psi2_trace_free`` / ``psi1_trace_free`` flags and the per-integral
        slot sets.
    """
    terms = compile_terms(variant, kind, region, component)
    slots = frozenset(s for term in terms for s in term.slots)
    traces = frozenset(s for s in slots if s.startswith("H"))
    return {
        "variant": variant,
        "geometry": kind.value,
        "region": region.name,
        "component": component.name,
        "slots": slots,
        "traces": traces,
        "psi1_trace_free": not (traces & {"H1p", "H1m"}),
        "psi2_trace_free": not (traces & {"H2p", "H2m"}),
        "per_integral": tuple(frozenset(t.slots) for t in terms),
    }
