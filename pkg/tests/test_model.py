import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from dirac_utm.model import (Branch, Geometry, GeometryKind, QueryPoint, Region, RegionParams,
                             diagonalizer, dispersion, lambda_matrix, X_MATRIX)

ks = st.floats(-1e3, 1e3, allow_nan=False)
masses = st.floats(1e-3, 50.0)


def test_dispersion_examples():
    assert dispersion(2.0, Branch.PLUS, 0.0) == pytest.approx(2j)
    assert dispersion(0.0, Branch.PLUS, 3.0) == pytest.approx(3j)
    assert dispersion(1.0, Branch.MINUS, -1.0) == pytest.approx(-1j * np.sqrt(2))


def test_massless_branch_is_signed_not_absolute():
    assert dispersion(0.0, Branch.PLUS, -3.0) == pytest.approx(-3j)
    assert dispersion(1e-12, Branch.PLUS, -3.0) == pytest.approx(3j)


def test_dispersion_rejects_negative_mass():
    with pytest.raises(ValueError):
        dispersion(-1.0, Branch.PLUS, 0.0)


@given(masses, ks)
def test_even_symmetry(m, k):
    for b in Branch:
        assert dispersion(m, b, k) == dispersion(m, b, -k)


@given(st.floats(0.0, 50.0), ks)
def test_branch_negation_and_purely_imaginary(m, k):
    p, q = complex(dispersion(m, Branch.PLUS, k)), complex(dispersion(m, Branch.MINUS, k))
    assert p == -q
    assert p.real == 0.0


@example(2.2250738585e-313, 1.0)
@given(st.floats(0.0, 50.0), ks)
def test_defining_determinant(m, k):
    lam = lambda_matrix(m, k)
    for b in Branch:
        om = complex(dispersion(m, b, k))
        # explicit 2x2 determinant; LAPACK's LU returns nan on subnormal entries
        det = (lam[0, 0] - om) * (lam[1, 1] - om) - lam[0, 1] * lam[1, 0]
        assert abs(det) <= 1e-9 * max(1.0, k * k + m * m)


def test_diagonalizer_examples():
    s = diagonalizer(1.0, 0.0)
    np.testing.assert_allclose(s.A, [[1j, 1j], [1j, -1j]])
    np.testing.assert_allclose(s.A @ s.Lambda - np.diag(s.omega) @ s.A, 0, atol=1e-15)
    s = diagonalizer(3.0, 4.0)
    assert s.omega[0] == pytest.approx(5j)
    np.testing.assert_allclose(s.A[0], [3j, 1j])
    np.testing.assert_array_equal(s.X, X_MATRIX)


def test_diagonalizer_rejects_zero_mass():
    with pytest.raises(ValueError):
        diagonalizer(0.0, 1.0)


@settings(max_examples=200)
@given(masses, ks)
def test_similarity(m, k):
    s = diagonalizer(m, k)
    scale = max(1.0, abs(k), m)
    err = np.abs(s.A @ s.Lambda - np.diag(s.omega) @ s.A).max()
    assert err <= 1e-12 * scale * scale
    sim = s.A @ s.Lambda @ s.A_inverse() - np.diag(s.omega)
    assert np.abs(sim).max() <= 1e-12 * scale


@given(masses, ks)
def test_adjugate_inverse(m, k):
    s = diagonalizer(m, k)
    np.testing.assert_allclose(s.A_inverse() @ s.A, np.eye(2), atol=1e-10)


def test_geometry_invariants():
    with pytest.raises(ValueError):
        Geometry(GeometryKind.TWO_HALF_LINES, 0.0)
    with pytest.raises(ValueError):
        Geometry(GeometryKind.TWO_FINITE_INTERVALS, 1.0)
    with pytest.raises(ValueError):
        Geometry(GeometryKind.TWO_FINITE_INTERVALS, 1.0, -2.0)
    with pytest.raises(ValueError):
        Geometry(GeometryKind.TWO_HALF_LINES, 1.0, 2.0)
    g = Geometry(GeometryKind.TWO_FINITE_INTERVALS, 1.0, 2.0)
    assert g.region_bounds(Region.LEFT) == (-2.0, 0.0)
    assert g.region_bounds(Region.RIGHT) == (0.0, 2.0)


def test_region_params():
    assert RegionParams(Region.LEFT, 0.0).massless
    assert not RegionParams(Region.RIGHT, 1.0).massless
    with pytest.raises(ValueError):
        RegionParams(Region.LEFT, -1.0)


def test_query_point_domain():
    g = Geometry(GeometryKind.TWO_FINITE_INTERVALS, 1.0, 2.0)
    QueryPoint(0.0, 0.5, Region.LEFT).check(g)
    QueryPoint(0.0, 0.5, Region.RIGHT).check(g)
    for q in (QueryPoint(0.1, 0.5, Region.LEFT), QueryPoint(-0.1, 0.5, Region.RIGHT),
              QueryPoint(2.5, 0.5, Region.RIGHT), QueryPoint(-1.0, -0.1, Region.LEFT)):
        with pytest.raises(ValueError):
            q.check(g)
