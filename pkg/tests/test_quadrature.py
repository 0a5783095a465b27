import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sint

from orbitoledo import chp
from orbitoledo import quadrature as quad
from orbitoledo.errors import NoConvergence, NotHyperbolic, ValidationError
from orbitoledo.orbibundle import CoveringData
from orbitoledo.orbifold import signature


@pytest.fixture(scope="module")
def octagon():
    return quad.octagon_domain()


@pytest.fixture(scope="module")
def tri237():
    return quad.triangle_domain(2, 3, 7)


def sphere_density(u):
    return 4.0 / (1 + np.abs(u) ** 2) ** 2


# --- disc model ----------------------------------------------------------------


def test_area_density_closed_form():
    u = np.array([0, 0.3, 0.5j, -0.7 + 0.2j])
    np.testing.assert_allclose(quad.area_density(u), 1 / (1 - np.abs(u) ** 2) ** 2, rtol=1e-12)


@pytest.mark.parametrize("d", [0.1, 0.8, 2.0])
def test_translation_moves_origin_by_distance(d):
    T = quad.su11_translation(d)
    assert quad.is_su11(T)
    assert quad.mobius(T, 0) == pytest.approx(math.tanh(d))
    assert quad.disc_distance(0, quad.mobius(T, 0)) == pytest.approx(d, rel=1e-12)


def test_rotation_fixes_centre_with_angle():
    c = 0.3 + 0.2j
    R = quad.su11_rotation(c, 0.9)
    assert quad.is_su11(R)
    assert quad.mobius(R, c) == pytest.approx(c)
    # derivative at the fixed point is e^{i angle}
    assert quad.mobius_derivative(R, c) == pytest.approx(np.exp(0.9j))


def test_su11_to_su21_intertwines_disc_lift(rng):
    u = 0.6 * (rng.uniform(size=20) * np.exp(2j * np.pi * rng.uniform(size=20)))
    A = quad.su11_rotation(0.2 - 0.4j, 1.1) @ quad.su11_translation(0.5)
    M = quad.su11_to_su21(A)
    assert chp.in_su21(M)
    lhs = quad.disc_lift(u) @ M.T
    lhs = lhs / lhs[:, :1]
    np.testing.assert_allclose(lhs, quad.disc_lift(quad.mobius(A, u)), atol=1e-12)


def test_disc_distance_isometry_invariant(rng):
    u, v = 0.5 * rng.uniform(size=10), 0.5j * rng.uniform(size=10)
    A = quad.su11_rotation(0.1, 0.4) @ quad.su11_translation(0.3)
    np.testing.assert_allclose(quad.disc_distance(quad.mobius(A, u), quad.mobius(A, v)), quad.disc_distance(u, v), atol=1e-10)


def test_klein_roundtrip_and_jacobian(rng):
    k = 0.9 * np.sqrt(rng.uniform(size=30)) * np.exp(2j * np.pi * rng.uniform(size=30))
    np.testing.assert_allclose(quad.poincare_to_klein(quad.klein_to_poincare(k)), k, atol=1e-14)
    h = 1e-6
    du_dx = (quad.klein_to_poincare(k + h) - quad.klein_to_poincare(k - h)) / (2 * h)
    du_dy = (quad.klein_to_poincare(k + 1j * h) - quad.klein_to_poincare(k - 1j * h)) / (2 * h)
    det = np.abs(du_dx.real * du_dy.imag - du_dx.imag * du_dy.real)
    np.testing.assert_allclose(quad.klein_jacobian(k), det, rtol=1e-7)


def test_klein_maps_geodesics_to_lines():
    # the diameter-orthogonal geodesic through tanh(d) is a chord x = const in Klein
    T = quad.su11_translation(0.6)
    ys = np.linspace(-0.5, 0.5, 7)
    geo = quad.mobius(T, 1j * ys)  # image of the imaginary diameter
    k = quad.poincare_to_klein(geo)
    np.testing.assert_allclose(k.real, k.real[0], atol=1e-12)


# --- triangle domains -------------------------------------------------------------


def test_triangle_rejects_non_hyperbolic():
    with pytest.raises(NotHyperbolic):
        quad.triangle_domain(2, 3, 6)
    with pytest.raises(ValidationError):
        quad.triangle_domain(1, 3, 7)


@pytest.mark.parametrize("pqr", [(2, 3, 7), (3, 3, 4), (2, 4, 5), (5, 5, 5)])
def test_triangle_domain_geometry(pqr):
    p, q, r = pqr
    T = quad.triangle_domain(p, q, r)
    a, b, c = quad.triangle_side_lengths(p, q, r)
    A, Cp, B, C = T.vertices
    assert quad.disc_distance(A, B) == pytest.approx(c, rel=1e-12)
    assert quad.disc_distance(A, C) == pytest.approx(b, rel=1e-12)
    assert quad.disc_distance(B, C) == pytest.approx(a, rel=1e-12)
    angles = T.vertex_angles()
    np.testing.assert_allclose(angles, [2 * math.pi / p, math.pi / r, 2 * math.pi / q, math.pi / r], atol=1e-10)
    assert T.pairing_residual() < 1e-10
    for (word, m) in T.cone_words:
        g = quad.evaluate_word(T.generators, word)
        assert min(np.max(np.abs(np.linalg.matrix_power(g, m) - s * np.eye(2))) for s in (1, -1)) < 1e-9
    prod = quad.evaluate_word(T.generators, T.relators[0])
    assert np.allclose(prod, -np.eye(2), atol=1e-9)


def test_equilateral_triangle_sides():
    a, b, c = quad.triangle_side_lengths(5, 5, 5)
    assert abs(a - b) < 1e-12 and abs(b - c) < 1e-12


def test_triangle_side_lengths_cosine_rule_oracle():
    # check the curvature -1 hyperbolic law of cosines for angle pi/p between sides b, c
    a, b, c = (2 * x for x in quad.triangle_side_lengths(2, 3, 7))
    lhs = math.cosh(a)
    rhs = math.cosh(b) * math.cosh(c) - math.sinh(b) * math.sinh(c) * math.cos(math.pi / 2)
    assert lhs == pytest.approx(rhs, rel=1e-12)


@pytest.mark.parametrize("pqr, area", [((2, 3, 7), math.pi / 84), ((3, 3, 4), math.pi / 24)])
def test_triangle_area(pqr, area):
    val = quad.integrate(quad.triangle_domain(*pqr), quad.area_density, rel_tol=1e-10)
    assert val == pytest.approx(area, rel=1e-8)
    assert quad.expected_area(signature(0, pqr)) == pytest.approx(area, rel=1e-15)


# --- octagon ----------------------------------------------------------------------


def test_octagon_geometry(octagon):
    L = octagon.side_lengths()
    assert np.ptp(L) < 1e-10
    assert octagon.vertex_angles().sum() == pytest.approx(2 * math.pi, abs=1e-8)
    assert octagon.pairing_residual() < 1e-10


def test_octagon_relator(octagon):
    M = quad.evaluate_word(octagon.generators, octagon.relators[0])
    assert np.allclose(M, np.eye(2), atol=1e-9) or np.allclose(M, -np.eye(2), atol=1e-9)


def test_octagon_generators_are_hyperbolic(octagon):
    for g in octagon.generators:
        assert quad.is_su11(g)
        assert abs(np.trace(g).real) > 2


def test_octagon_area(octagon):
    res = quad.integrate(octagon, quad.area_density, rel_tol=1e-10, full_output=True)
    assert res.value == pytest.approx(math.pi, rel=1e-9)
    assert res.error_estimate < 1e-8


def test_octagon_area_from_angles(octagon):
    # Gauss-Bonnet for a geodesic polygon at curvature -4: 4 A = (n - 2) pi - sum(angles)
    n = len(octagon.vertices)
    area = ((n - 2) * math.pi - octagon.vertex_angles().sum()) / 4
    assert area == pytest.approx(math.pi, rel=1e-9)


def _klein_polar_oracle(polygon, f, n=160):
    """Gauss-Legendre tensor rule in Klein polar coordinates around the origin.

    The polygon is star-shaped about 0 and each side is a straight chord, so
    the radial limit is the distance to the chord along the ray; substituting
    r = s * rmax(theta) gives a smooth integrand on a rectangle per side.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    K = quad.poincare_to_klein(np.array(polygon.vertices))
    total = 0.0
    for i in range(len(K)):
        a, b = K[i], K[(i + 1) % len(K)]
        t0, t1 = np.angle(a), np.angle(b)
        if t1 < t0:
            t1 += 2 * math.pi
        normal = -1j * (b - a) / abs(b - a)
        apothem = (np.conj(normal) * a).real
        t = (t1 - t0) / 2 * x + (t1 + t0) / 2
        wt = w * (t1 - t0) / 2
        rmax = apothem / np.cos(t - np.angle(normal))
        s_, ws = (x + 1) / 2, w / 2
        r = s_[None, :] * rmax[:, None]
        k = r * np.exp(1j * t[:, None])
        vals = f(quad.klein_to_poincare(k)) * quad.klein_jacobian(k) * r * rmax[:, None]
        total += float(np.sum(wt[:, None] * ws[None, :] * vals))
    return total


def test_integrate_matches_independent_quadrature(octagon):
    def f(u):
        return quad.area_density(u) * (1 + u.real + 3 * u.imag**2 + np.sin(2 * u.real * u.imag))

    expected = _klein_polar_oracle(octagon, f)
    assert quad.integrate(octagon, f, rel_tol=1e-10) == pytest.approx(expected, rel=1e-8)


def test_integrate_zero_form(octagon):
    assert quad.integrate(octagon, lambda u: np.zeros(np.shape(u))) == 0


def test_integrate_isometry_invariance(tri237):
    A = quad.su11_rotation(0.1 + 0.2j, 0.7) @ quad.su11_translation(0.3)
    moved = tri237.moved(A)
    assert moved.pairing_residual() < 1e-9
    assert quad.integrate(moved, quad.area_density, rel_tol=1e-10) == pytest.approx(math.pi / 84, rel=1e-8)


def test_integrate_tolerance_refinement(octagon):
    f = quad.area_density
    coarse = quad.integrate(octagon, f, rel_tol=1e-4, full_output=True)
    fine = quad.integrate(octagon, f, rel_tol=1e-9, full_output=True)
    assert fine.levels >= coarse.levels
    assert abs(fine.value - math.pi) <= abs(coarse.value - math.pi) + 1e-15
    assert abs(coarse.value - math.pi) <= 1e-4 * math.pi


@pytest.mark.parametrize("tol", [1e-5, 1e-7, 1e-9])
def test_halving_tolerance_stays_within_previous(octagon, tol):
    def f(u):
        return quad.area_density(u) * (2 + np.cos(3 * u.real) * u.imag)

    a = quad.integrate(octagon, f, rel_tol=tol)
    b = quad.integrate(octagon, f, rel_tol=tol / 2)
    assert abs(a - b) <= tol * abs(b)


def test_integrate_isometry_invariance_general_form(octagon):
    # integral over g(D) of (f o g^-1) |(g^-1)'|^2 equals the integral of f over D
    def f(u):
        return quad.area_density(u) * (1 + u.real + 2 * u.imag**2)

    A = quad.su11_rotation(-0.2 + 0.1j, 1.3) @ quad.su11_translation(0.4)
    Ai = np.linalg.inv(A)

    def moved_form(v):
        return f(quad.mobius(Ai, v)) * np.abs(quad.mobius_derivative(Ai, v)) ** 2

    tol = 1e-9
    base = quad.integrate(octagon, f, rel_tol=tol)
    moved = quad.integrate(octagon.moved(A), moved_form, rel_tol=tol)
    assert moved == pytest.approx(base, rel=2 * tol)


def test_integrate_jobs_deterministic(octagon):
    f = quad.area_density
    assert quad.integrate(octagon, f, jobs=1) == quad.integrate(octagon, f, jobs=4)


def test_integrate_no_convergence(octagon):
    with pytest.raises(NoConvergence) as info:
        quad.integrate(octagon, lambda u: np.sign(u.real) * quad.area_density(u) + 1 / (1.0001 - np.abs(u)), rel_tol=1e-15, max_depth=3)
    assert info.value.estimates


# --- charts and coverings ------------------------------------------------------------


def test_chart_integral_plain_and_order():
    full = quad.chart_integral(1, sphere_density)
    assert full == pytest.approx(2 * math.pi, rel=1e-12)  # a hemisphere of the unit sphere
    assert quad.chart_integral(4, sphere_density) == pytest.approx(full / 4, rel=1e-14)


def test_chart_integral_non_radial_form():
    # int over the unit disc of x^2 = pi/4
    assert quad.chart_integral(1, lambda u: u.real**2) == pytest.approx(math.pi / 4, rel=1e-12)


def test_chart_integral_rejects_bad_order():
    with pytest.raises(ValidationError):
        quad.chart_integral(0, sphere_density)


def test_spindle_cover_law():
    base = signature(0, (2, 2))
    cov = CoveringData(2, ((1,), (1,)))
    b, c = quad.orbit_integrals(base, cov, [sphere_density, sphere_density])
    assert c == pytest.approx(2 * b, rel=1e-10)
    assert c == pytest.approx(4 * math.pi, rel=1e-10)  # the round sphere


def test_branched_cover_law():
    # (0;4,4) doubly covered by the (0;2,2) spindle
    base = signature(0, (4, 4))
    cov = CoveringData(2, ((2,), (2,)))
    b, c = quad.orbit_integrals(base, cov, [sphere_density, sphere_density])
    assert c == pytest.approx(2 * b, rel=1e-10)


def test_orbit_integrals_need_consistent_data():
    with pytest.raises(ValidationError):
        quad.orbit_integrals(signature(0, (2, 2)), CoveringData(3, ((1,), (1,))), [sphere_density] * 2)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3, 4, 6, 12]), st.floats(0.1, 2.0))
def test_covering_law_property(n, scale):
    # d = n cover of the (0; n, n) football by the sphere, any rotation-invariant form
    form = lambda u: scale * sphere_density(u) * (1 + np.abs(u) ** 2)  # noqa: E731
    b, c = quad.orbit_integrals(signature(0, (n, n)), CoveringData(n, ((1,), (1,))), [form, form])
    assert c == pytest.approx(n * b, rel=1e-10)


def test_polygon_json(octagon):
    obj = octagon.to_json()
    assert len(obj["vertices"]) == 8
    assert obj["signature"] == {"genus": 2, "cone_orders": []}


def test_polygon_validation():
    with pytest.raises(ValidationError):
        quad.GeodesicPolygon(vertices=(0, 0.1, 0.1j), cone_orders=(1, 1))
    with pytest.raises(ValidationError):
        quad.GeodesicPolygon(vertices=(0, 1.0, 0.1j), cone_orders=(1, 1, 1))
