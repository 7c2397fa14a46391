import threading

import numpy as np
import pytest
from scipy.integrate import quad

from dirac_utm.errors import QuadratureBudgetExceeded, TraceHorizonExceeded
from dirac_utm.massive.evaluate import (MassiveEvaluator, QuadratureSpec, eval_massive_finite,
                                        eval_massive_halfline)
from dirac_utm.massless import massless_field
from dirac_utm.model import Component, Geometry, GeometryKind, QueryPoint, Region
from dirac_utm.profiles import GaussianWindow as G
from dirac_utm.profiles import ZeroProfile
from dirac_utm.reference import solve_reference
from dirac_utm.scenario import Scenario

Z = ZeroProfile()
DX = 2.0 ** -10


def test_zero_data_gives_zero():
    sc = Scenario(Geometry(GeometryKind.TWO_FINITE_INTERVALS, 1.0, 1.0), 1.0, 2.0, (Z,) * 4)
    ref = solve_reference(sc, 2.0 ** -6)
    ev = MassiveEvaluator(sc, ref.traces)
    for region, x in ((Region.LEFT, [-0.7, -0.2]), (Region.RIGHT, [0.0, 0.9])):
        for c in Component:
            assert not np.any(ev.evaluate(region, c, x, 0.75).values)


def test_single_gaussian_example():
    sc = Scenario(Geometry(GeometryKind.TWO_HALF_LINES, 0.5), 1.0, 1.0, (G(-2.0, 0.5), Z, Z, Z))
    ref = solve_reference(sc, DX, snapshot_times=[0.5])
    q = QueryPoint(-1.0, 0.5, Region.LEFT)
    got = eval_massive_halfline(sc, ref.traces, q, Component.PSI1)
    assert abs(got - ref.field([-1.0], 0.5, Region.LEFT, Component.PSI1)[0]) <= 1e-4


def test_initial_recovery(halfline_scenario, halfline_reference):
    ev = MassiveEvaluator(halfline_scenario, halfline_reference.traces)
    for region, xs in ((Region.LEFT, np.linspace(-2.5, -0.05, 50)), (Region.RIGHT, np.linspace(0.05, 2.5, 50))):
        for c in Component:
            got = ev.evaluate(region, c, xs, 1e-6).values
            want = halfline_scenario.initial_profile(region, c)(xs)
            assert np.max(np.abs(got - want)) <= 1e-5


def test_finite_matches_halfline_before_boundary_reach():
    init = (G(-0.7, 0.1), G(-0.65, 0.1, amplitude=0.5), G(0.65, 0.1, amplitude=-0.8), G(0.7, 0.1))
    T = 0.5
    hl = Scenario(Geometry(GeometryKind.TWO_HALF_LINES, T), 1.0, 2.0, init)
    fin = Scenario(Geometry(GeometryKind.TWO_FINITE_INTERVALS, T, 2.0), 1.0, 2.0, init)
    rh, rf = solve_reference(hl, DX), solve_reference(fin, DX)
    for region, x in ((Region.LEFT, -0.8), (Region.RIGHT, 0.4)):
        q = QueryPoint(x, T, region)
        for c in Component:
            a = eval_massive_halfline(hl, rh.traces, q, c)
            b = eval_massive_finite(fin, rf.traces, q, c)
            assert abs(a - b) <= 1e-4


def test_geometry_mismatch_and_massless_rejected(halfline_scenario, halfline_reference):
    q = QueryPoint(-0.5, 0.5, Region.LEFT)
    with pytest.raises(ValueError):
        eval_massive_finite(halfline_scenario, halfline_reference.traces, q, Component.PSI1)
    with pytest.raises(ValueError):
        MassiveEvaluator(halfline_scenario.with_masses(0.0, 1.0), halfline_reference.traces)


def test_budget_exceeded_names_term(halfline_scenario, halfline_reference):
    ev = MassiveEvaluator(halfline_scenario, halfline_reference.traces,
                          spec=QuadratureSpec(tail_tolerance=1e-15, k_max_limit=100.0))
    with pytest.raises(QuadratureBudgetExceeded) as exc:
        ev.evaluate(Region.LEFT, Component.PSI2, [-0.5], 1.0)
    assert "integral" in exc.value.term


def test_trace_horizon(halfline_scenario, halfline_reference):
    ev = MassiveEvaluator(halfline_scenario, halfline_reference.traces)
    with pytest.raises(TraceHorizonExceeded):
        ev.evaluate(Region.LEFT, Component.PSI1, [-0.5], 1.25)


def test_query_outside_region(halfline_scenario, halfline_reference):
    ev = MassiveEvaluator(halfline_scenario, halfline_reference.traces)
    with pytest.raises(ValueError):
        ev.evaluate(Region.LEFT, Component.PSI1, [0.5], 0.5)


def test_jump_blocks_are_exact_pairs():
    jumps = [(0.0, 0.7 - 0.2j, 0.0, -1.1, -1.0), (-2.0, 0.3, 0.45j, 0.2, 1.0)]
    for k in (0.0, 1.3, -4.0):
        def part(x, f):
            return f(np.exp(-1j * k * x) * MassiveEvaluator._jump_x(jumps, np.array([x]))[0])
        pts = [-2.0, 0.0]
        re = quad(part, -60, 60, args=(np.real,), points=pts, limit=400, epsabs=1e-13)[0]
        im = quad(part, -60, 60, args=(np.imag,), points=pts, limit=400, epsabs=1e-13)[0]
        want = (re + 1j * im) / (2 * np.pi)
        assert MassiveEvaluator._jump_hat(jumps, np.array([k]))[0] == pytest.approx(want, abs=1e-10)


def test_panel_doubling_and_kmax_doubling(halfline_scenario, halfline_reference):
    xs = np.array([-2.0, -1.0, -0.3])
    t = 0.5
    want = halfline_reference.field(xs, t, Region.LEFT, Component.PSI2)
    errs = []
    for panels in (8, 16, 32, 64):
        ev = MassiveEvaluator(halfline_scenario, halfline_reference.traces,
                              spec=QuadratureSpec(k_max=64.0, panels=panels, adaptive=False))
        errs.append(np.max(np.abs(ev.evaluate(Region.LEFT, Component.PSI2, xs, t).values - want)))
    floor = 1e-5
    assert all(b <= a or b <= floor for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= floor
    spec = QuadratureSpec()
    base = MassiveEvaluator(halfline_scenario, halfline_reference.traces, spec=spec)
    e = base.evaluate(Region.LEFT, Component.PSI2, xs, t)
    wider = MassiveEvaluator(halfline_scenario, halfline_reference.traces,
                             spec=QuadratureSpec(k_max=2 * e.k_max, adaptive=False))
    f = wider.evaluate(Region.LEFT, Component.PSI2, xs, t)
    assert np.max(np.abs(e.values - f.values)) <= spec.tail_tolerance


def test_small_mass_matches_massless():
    init = (G(-1.3, 0.3), G(-1.5, 0.3, amplitude=0.7), G(1.3, 0.3, amplitude=-0.6), G(1.2, 0.25, amplitude=0.9))
    base = Scenario(Geometry(GeometryKind.TWO_HALF_LINES, 1.0), 0.0, 0.0, init)
    xs = np.linspace(-2.5, -0.25, 10)
    devs = []
    for m in (1e-3, 1e-4):
        sc = base.with_masses(m, m)
        ref = solve_reference(sc, DX)
        ev = MassiveEvaluator(sc, ref.traces, spec=QuadratureSpec(tail_tolerance=1e-6))
        devs.append(max(np.max(np.abs(ev.evaluate(Region.LEFT, c, xs, 1.0).values
                                      - massless_field(base, xs, 1.0, Region.LEFT, c)))
                        for c in Component))
    assert devs[0] <= 1e-2
    assert devs[1] < devs[0]


def test_diagnostics_sum_to_value(finite_scenario, finite_reference):
    ev = MassiveEvaluator(finite_scenario, finite_reference.traces)
    e = ev.evaluate(Region.RIGHT, Component.PSI1, [0.3, 1.2], 1.0, diagnostics=True)
    assert "jump_blocks" in e.per_term
    np.testing.assert_allclose(sum(e.per_term.values()), e.values, atol=1e-14)


def test_concurrent_evaluation_is_deterministic(halfline_scenario, halfline_reference):
    ev = MassiveEvaluator(halfline_scenario, halfline_reference.traces)
    xs = np.linspace(0.0, 2.0, 5)
    serial = ev.evaluate(Region.RIGHT, Component.PSI1, xs, 0.5).values
    out = [None] * 4

    def work(i):
        out[i] = MassiveEvaluator(halfline_scenario, halfline_reference.traces).evaluate(
            Region.RIGHT, Component.PSI1, xs, 0.5).values

    threads = [threading.Thread(target=work, args=(i,)) for i in range(4)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    for o in out:
        np.testing.assert_array_equal(o, serial)
