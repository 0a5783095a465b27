"""Fundamental polygons in the curvature -4 Poincare disc and 2-form quadrature.

The disc ``|u| < 1`` is the complex geodesic of negative vectors ``(1, u, 0)``;
with the metric of :mod:`orbitoledo.chp` it has curvature -4, distance
``arctanh |u|`` from the origin and area density ``1 / (1 - |u|^2)^2``.
Euclidean pictures agree with the usual curvature -1 disc, only lengths are
halved and areas quartered.

SU(1,1) matrices ``[[a, b], [c, d]]`` act by ``u -> (a u + b) / (c u + d)``.

Integration happens in Klein coordinates ``k = 2u / (1 + |u|^2)``, where
geodesics are straight lines.  A geodesic polygon is therefore an exact
Euclidean polygon, geodesic midpoints are Euclidean midpoints, and uniform
4-way subdivision of a geodesic triangle tiles it exactly.
"""
from __future__ import annotations

import math
from fractions import Fraction
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import chp
from .errors import NoConvergence, NotHyperbolic, ValidationError
from .orbifold import OrbifoldSignature, euler_characteristic

FormEvaluator = Callable[[np.ndarray], np.ndarray]

BOUNDARY_EPS = 1e-12

__all__ = [
    "GeodesicPolygon",
    "mobius",
    "su11_rotation",
    "su11_translation",
    "disc_lift",
    "area_density",
    "triangle_side_lengths",
    "triangle_domain",
    "octagon_domain",
    "integrate",
    "chart_integral",
    "orbit_integrals",
]


# --- disc model -------------------------------------------------------------


def mobius(A, u):
    A = np.asarray(A, dtype=complex)
    u = np.asarray(u, dtype=complex)
    return (A[0, 0] * u + A[0, 1]) / (A[1, 0] * u + A[1, 1])


def mobius_derivative(A, u):
    A = np.asarray(A, dtype=complex)
    u = np.asarray(u, dtype=complex)
    return np.linalg.det(A) / (A[1, 0] * u + A[1, 1]) ** 2


def is_su11(A, tol: float = 1e-9) -> bool:
    A = np.asarray(A, dtype=complex)
    K = np.diag([1.0, -1.0])
    return bool(
        np.max(np.abs(A.conj().T @ K @ A - K)) <= tol and abs(np.linalg.det(A) - 1) <= tol
    )


def su11_rotation(center: complex, angle: float) -> np.ndarray:
    """Counterclockwise rotation by ``angle`` about the disc point ``center``."""
    c = complex(center)
    M = np.array([[1, c], [np.conj(c), 1]], dtype=complex) / math.sqrt(1 - abs(c) ** 2)
    R = np.diag([np.exp(0.5j * angle), np.exp(-0.5j * angle)])
    return M @ R @ np.linalg.inv(M)


def su11_translation(distance: float) -> np.ndarray:
    """Translation along the real diameter moving 0 to tanh(distance).

    ``distance`` is measured in the curvature -4 metric.
    """
    return np.array(
        [[math.cosh(distance), math.sinh(distance)], [math.sinh(distance), math.cosh(distance)]],
        dtype=complex,
    )


def disc_lift(u):
    """Embed disc points as negative vectors (1, u, 0)."""
    u = np.asarray(u, dtype=complex)
    out = np.zeros(u.shape + (3,), dtype=complex)
    out[..., 0] = 1.0
    out[..., 1] = u
    return out


def su11_to_su21(A) -> np.ndarray:
    """Block embedding compatible with :func:`disc_lift`: M (1,u,0) ~ (1, A.u, 0)."""
    A = np.asarray(A, dtype=complex)
    M = np.eye(3, dtype=complex)
    M[0, 0], M[0, 1] = A[1, 1], A[1, 0]
    M[1, 0], M[1, 1] = A[0, 1], A[0, 0]
    return M


def area_density(u):
    """Riemannian area density of the embedded disc, via chp.metric."""
    p = disc_lift(u)
    dx = chp.project_to_tangent(p, np.broadcast_to(np.array([0, 1, 0], dtype=complex), p.shape))
    dy = chp.project_to_tangent(p, np.broadcast_to(np.array([0, 1j, 0]), p.shape))
    _, gxx, _ = chp.metric(p, dx, dx)
    _, gyy, _ = chp.metric(p, dy, dy)
    _, gxy, _ = chp.metric(p, dx, dy)
    return np.sqrt(np.maximum(gxx * gyy - gxy**2, 0.0))


def disc_distance(u, v):
    return chp.distance(disc_lift(u), disc_lift(v))


# --- polygons ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SidePairing:
    matrix: np.ndarray
    side: int
    partner: int


@dataclass(frozen=True, eq=False)
class GeodesicPolygon:
    """Geodesic polygon with vertex cone orders and side pairings.

    ``generators`` are the SU(1,1) matrices of the group, ``relators`` words
    in them (1-based, negative for inverses) evaluating to +-I, and
    ``cone_words`` maps each cone point to the word of its rotation.
    """

    vertices: tuple
    cone_orders: tuple
    side_pairings: tuple = ()
    generators: tuple = ()
    relators: tuple = ()
    cone_words: tuple = ()
    signature: Optional[OrbifoldSignature] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        verts = tuple(complex(v) for v in self.vertices)
        if len(verts) < 3:
            raise ValidationError("a polygon needs at least 3 vertices")
        if len(set(verts)) != len(verts):
            raise ValidationError("polygon vertices must be distinct")
        if any(abs(v) >= 1 - BOUNDARY_EPS for v in verts):
            raise ValidationError("vertices must lie inside the disc")
        if len(self.cone_orders) != len(verts):
            raise ValidationError("one cone order per vertex")
        object.__setattr__(self, "vertices", verts)

    def side(self, k: int) -> tuple[complex, complex]:
        n = len(self.vertices)
        return self.vertices[k % n], self.vertices[(k + 1) % n]

    def side_lengths(self) -> np.ndarray:
        v = np.array(self.vertices)
        return disc_distance(v, np.roll(v, -1))

    def vertex_angles(self) -> np.ndarray:
        n = len(self.vertices)
        return np.array([_vertex_angle(*[self.vertices[(k + j) % n] for j in (-1, 0, 1)]) for k in range(n)])

    def pairing_residual(self) -> float:
        """Max endpoint error of side pairings (side k -> partner, reversed)."""
        worst = 0.0
        for sp in self.side_pairings:
            a, b = self.side(sp.side)
            c, d = self.side(sp.partner)
            worst = max(worst, abs(mobius(sp.matrix, a) - d), abs(mobius(sp.matrix, b) - c))
            # an interior point of the side must land on the partner geodesic
            mid = _geodesic_midpoint(a, b)
            worst = max(worst, _geodesic_offset(mobius(sp.matrix, mid), c, d))
        return worst

    def moved(self, A) -> "GeodesicPolygon":
        """Image under the disc isometry A, with generators conjugated."""
        Ainv = np.linalg.inv(A)
        conj = lambda M: A @ M @ Ainv  # noqa: E731
        return GeodesicPolygon(
            vertices=tuple(complex(mobius(A, v)) for v in self.vertices),
            cone_orders=self.cone_orders,
            side_pairings=tuple(SidePairing(conj(s.matrix), s.side, s.partner) for s in self.side_pairings),
            generators=tuple(conj(g) for g in self.generators),
            relators=self.relators,
            cone_words=self.cone_words,
            signature=self.signature,
            metadata=dict(self.metadata),
        )

    def to_json(self) -> dict:
        mat = lambda M: [[[z.real, z.imag] for z in row] for row in np.asarray(M)]  # noqa: E731
        return {
            "vertices": [[v.real, v.imag] for v in self.vertices],
            "cone_orders": list(self.cone_orders),
            "side_pairings": [
                {"side": s.side, "partner": s.partner, "matrix": mat(s.matrix)} for s in self.side_pairings
            ],
            "generators": [mat(g) for g in self.generators],
            "relators": [list(r) for r in self.relators],
            "cone_words": [{"word": list(w), "order": m} for w, m in self.cone_words],
            "signature": self.signature.to_json() if self.signature else None,
        }


def _to_origin(z):
    """SU(1,1) element moving z to 0."""
    z = complex(z)
    return np.array([[1, -z], [-np.conj(z), 1]], dtype=complex) / math.sqrt(1 - abs(z) ** 2)


def _vertex_angle(prev, v, nxt) -> float:
    T = _to_origin(v)
    a = np.angle(mobius(T, prev))
    b = np.angle(mobius(T, nxt))
    return float((a - b) % (2 * math.pi))


def _geodesic_midpoint(a, b):
    ka, kb = poincare_to_klein(np.array([a, b]))
    return complex(klein_to_poincare((ka + kb) / 2))


def _geodesic_offset(z, a, b) -> float:
    """Euclidean distance in the Klein model from z to the geodesic line ab."""
    kz, ka, kb = poincare_to_klein(np.array([z, a, b]))
    d = kb - ka
    return abs((np.conj(d) * (kz - ka)).imag) / abs(d)


def triangle_side_lengths(p: int, q: int, r: int) -> tuple[float, float, float]:
    """Sides (a, b, c) opposite angles pi/p, pi/q, pi/r, curvature -4 lengths."""
    al, be, ga = math.pi / p, math.pi / q, math.pi / r

    def side(x, y, z):  # opposite angle x, by the curvature -1 dual cosine rule
        return math.acosh((math.cos(x) + math.cos(y) * math.cos(z)) / (math.sin(y) * math.sin(z)))

    return side(al, be, ga) / 2, side(be, al, ga) / 2, side(ga, al, be) / 2


def triangle_domain(p: int, q: int, r: int) -> GeodesicPolygon:
    """Doubled (p, q, r) triangle: fundamental domain of the rotation subgroup.

    Vertices A (angle 2pi/p) at the origin, C' , B on the positive real axis,
    C; generators are the rotations by 2pi/p, 2pi/q, 2pi/r about A, B, C and
    satisfy R_A R_B R_C = -I.
    """
    if min(p, q, r) < 2:
        raise ValidationError("triangle group orders must be >= 2")
    if Fraction(1, p) + Fraction(1, q) + Fraction(1, r) >= 1:
        raise NotHyperbolic(f"1/{p} + 1/{q} + 1/{r} >= 1")
    a, b, c = triangle_side_lengths(p, q, r)
    al = math.pi / p
    A = 0j
    B = complex(math.tanh(c))
    C = math.tanh(b) * complex(math.cos(al), math.sin(al))
    Cp = C.conjugate()
    ra = su11_rotation(A, 2 * math.pi / p)
    rb = su11_rotation(B, 2 * math.pi / q)
    rc = su11_rotation(C, 2 * math.pi / r)
    product = ra @ rb @ rc
    if min(np.max(np.abs(product - s * np.eye(2))) for s in (1, -1)) > 1e-9:
        raise ValidationError("triangle generators fail the product relation")
    sig = OrbifoldSignature(0, (p, q, r))
    vertices = (A, Cp, B, C)
    poly = GeodesicPolygon(
        vertices=vertices,
        cone_orders=(p, r, q, r),
        # R_A maps side A-C' onto side C-A; R_B maps side B-C onto side C'-B
        side_pairings=(SidePairing(ra, 0, 3), SidePairing(rb, 2, 1)),
        generators=(ra, rb, rc),
        relators=((1, 2, 3),),
        cone_words=(((1,), p), ((2,), q), ((3,), r)),
        signature=sig,
        metadata={"side_lengths": (a, b, c), "kind": f"triangle({p},{q},{r})"},
    )
    if poly.pairing_residual() > 1e-9:
        raise ValidationError("triangle side pairings do not match sides")
    return poly


def _regular_vertex_angle(n: int, circumradius: float) -> float:
    """Vertex angle of the regular n-gon with given curvature -4 circumradius."""
    rho = math.tanh(circumradius)
    v = [rho * complex(math.cos(2 * math.pi * k / n), math.sin(2 * math.pi * k / n)) for k in (-1, 0, 1)]
    return _vertex_angle(*v)


def octagon_domain() -> GeodesicPolygon:
    """Regular octagon with angles pi/4: a genus-2 surface group domain.

    Sides are glued by the pattern a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1, side k
    to side k+2 for k = 0, 1, 4, 5.
    """
    n = 8
    target = 2 * math.pi / n
    R = brentq(lambda x: _regular_vertex_angle(n, x) - target, 1e-3, 10.0, xtol=1e-15, rtol=1e-15)
    rho = math.tanh(R)
    vertices = tuple(rho * complex(math.cos(2 * math.pi * k / n), math.sin(2 * math.pi * k / n)) for k in range(n))
    # distance from the centre to a side midpoint
    inradius = abs(_geodesic_midpoint(vertices[0], vertices[1]))
    inradius = math.atanh(inradius)

    def rot(a):
        return np.diag([np.exp(0.5j * a), np.exp(-0.5j * a)])

    def pairing(i, j):
        ti = (2 * i + 1) * math.pi / n
        tj = (2 * j + 1) * math.pi / n
        return rot(tj - math.pi) @ su11_translation(-2 * inradius) @ rot(-ti)

    pairs = [(0, 2), (1, 3), (4, 6), (5, 7)]
    gens = tuple(pairing(i, j) for i, j in pairs)
    poly = GeodesicPolygon(
        vertices=vertices,
        cone_orders=(1,) * n,
        side_pairings=tuple(SidePairing(g, i, j) for g, (i, j) in zip(gens, pairs)),
        generators=gens,
        relators=((1, -2, -3, 4, 3, -4, -1, 2),),
        cone_words=(),
        signature=OrbifoldSignature(2, ()),
        metadata={"circumradius": R, "inradius": inradius, "kind": "octagon"},
    )
    if poly.pairing_residual() > 1e-9:
        raise ValidationError("octagon side pairings do not match sides")
    return poly


def evaluate_word(gens: Sequence[np.ndarray], word: Sequence[int]) -> np.ndarray:
    dim = np.asarray(gens[0]).shape[0] if gens else 2
    M = np.eye(dim, dtype=complex)
    for letter in word:
        if letter == 0 or abs(letter) > len(gens):
            raise ValidationError(f"bad generator index {letter}")
        g = np.asarray(gens[abs(letter) - 1], dtype=complex)
        M = M @ (g if letter > 0 else np.linalg.inv(g))
    return M


def expected_area(sig: OrbifoldSignature) -> float:
    """Gauss-Bonnet at curvature -4: area = 2 pi |chi| / 4."""
    return float(2 * math.pi * abs(euler_characteristic(sig)) / 4)


# --- integration --------------------------------------------------------------


def poincare_to_klein(u):
    u = np.asarray(u, dtype=complex)
    return 2 * u / (1 + np.abs(u) ** 2)


def klein_to_poincare(k):
    k = np.asarray(k, dtype=complex)
    return k / (1 + np.sqrt(1 - np.abs(k) ** 2))


def klein_jacobian(k):
    """|det d(u)/d(k)| of the Klein-to-Poincare map."""
    s = np.sqrt(1 - np.abs(np.asarray(k)) ** 2)
    return 1.0 / (s * (1 + s) ** 2)


def _centring(polygon: GeodesicPolygon, steps: int = 8):
    """SU(1,1) element moving the polygon's (approximate) hyperbolic centre to 0.

    Iterates: map the Klein centroid of the vertices to the origin.
    """
    T = np.eye(2, dtype=complex)
    verts = np.array(polygon.vertices)
    for _ in range(steps):
        c = complex(klein_to_poincare(poincare_to_klein(mobius(T, verts)).mean()))
        if abs(c) < 1e-14:
            break
        T = _to_origin(c) @ T
    return T


def _fan(vertices):
    K = poincare_to_klein(np.asarray(vertices))
    centre = K.mean()
    return [(centre, K[i], K[(i + 1) % len(K)]) for i in range(len(K))]


def _subtriangles(tri, n: int):
    """The n^2 congruent sub-triangles (Klein vertices) of a flat triangle."""
    a, b, c = tri
    e1, e2 = (b - a) / n, (c - a) / n
    out = []
    for i in range(n):
        for j in range(n - i):
            p = a + i * e1 + j * e2
            out.append((p, p + e1, p + e2))
            if i + j <= n - 2:
                out.append((p + e1, p + e1 + e2, p + e2))
    return out


@dataclass(frozen=True, eq=False)
class _Patch:
    """A geodesic triangle recentred by the isometry ``to_domain`` (Klein vertices)."""

    tri: tuple
    to_domain: np.ndarray


def _patches(polygon: GeodesicPolygon, pre_levels: int):
    T = _centring(polygon)
    back = np.linalg.inv(T)
    patches = []
    for tri in _fan(mobius(T, np.array(polygon.vertices))):
        for sub in _subtriangles(tri, 2**pre_levels):
            c = complex(klein_to_poincare(sum(sub) / 3))
            to_origin = _to_origin(c)
            verts = poincare_to_klein(mobius(to_origin, klein_to_poincare(np.array(sub))))
            patches.append(_Patch(tuple(verts), back @ np.linalg.inv(to_origin)))
    return patches


def _centroids(tri, n: int):
    """Centroids of the n^2 congruent sub-triangles of a flat triangle."""
    a, b, c = tri
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    up = (i + j) <= n - 1
    down = (i + j) <= n - 2
    e1, e2 = (b - a) / n, (c - a) / n
    pts_up = a + e1 * (i[up] + 1 / 3) + e2 * (j[up] + 1 / 3)
    pts_down = a + e1 * (i[down] + 2 / 3) + e2 * (j[down] + 2 / 3)
    return np.concatenate([pts_up, pts_down])


def _flat_area(tri) -> float:
    a, b, c = tri
    return abs(((b - a).conjugate() * (c - a)).imag) / 2


def _midpoint_sum(patches, form: FormEvaluator, n: int, jobs: int) -> float:
    def evaluate(patch):
        pts = _centroids(patch.tri, n)
        v = klein_to_poincare(pts)
        g = patch.to_domain
        # pull the 2-form back along the holomorphic isometry: factor |g'|^2
        vals = np.asarray(form(mobius(g, v)), dtype=float) * np.abs(mobius_derivative(g, v)) ** 2
        return _flat_area(patch.tri) / n**2 * float(np.sum(vals * klein_jacobian(pts)))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(evaluate, patches))
    else:
        parts = [evaluate(p) for p in patches]
    # fixed summation order, independent of the worker count
    return math.fsum(parts)


@dataclass
class IntegrationResult:
    value: float
    error_estimate: float
    levels: int
    evaluations: int


def integrate(
    domain: GeodesicPolygon,
    form: FormEvaluator,
    rel_tol: float = 1e-8,
    max_depth: int = 9,
    abs_tol: float = 0.0,
    jobs: int = 1,
    full_output: bool = False,
    pre_levels: int = 2,
):
    """Integrate ``form(u) dx dy`` over the polygon.

    The polygon is first moved so that its approximate hyperbolic centre is
    the origin, then fanned from there and split into 4^pre_levels geodesic
    patches per fan triangle; each patch is moved by a disc isometry
    so that its centroid sits at the origin.  On every patch the barycentre
    rule runs on 4^L uniform sub-triangles, with Richardson extrapolation in
    powers of h^2 across levels L.  Stops when successive extrapolated values differ by less
    than ``rel_tol * |value| + abs_tol``.
    """
    patches = _patches(domain, pre_levels)
    table: list[list[float]] = []
    best_prev = None
    evaluations = 0
    for level in range(max_depth + 1):
        n = 2**level
        raw = _midpoint_sum(patches, form, n, jobs)
        evaluations += len(patches) * n * n
        row = [raw]
        for k, prev in enumerate(table[-1] if table else []):
            factor = 4.0 ** (k + 1)
            row.append(row[k] + (row[k] - prev) / (factor - 1))
            if k + 1 >= 3:
                break
        table.append(row)
        best = row[-1]
        if best_prev is not None and level >= 3:
            err = abs(best - best_prev)
            if err <= rel_tol * abs(best) + abs_tol:
                if full_output:
                    return IntegrationResult(best, err, level, evaluations)
                return best
        best_prev = best
    raise NoConvergence(
        f"no convergence to rel_tol={rel_tol} within depth {max_depth}",
        estimates=(table[-2][-1], table[-1][-1]) if len(table) > 1 else (table[-1][-1],),
    )


def chart_integral(order: int, form: FormEvaluator, radius: float = 1.0, rel_tol: float = 1e-10, max_level: int = 12) -> float:
    """(1/order) times the integral of ``form`` over the Euclidean disc |u| < radius.

    Gauss-Legendre in the radius and the trapezoid rule in the angle, both
    doubled until successive values agree.
    """
    if order < 1:
        raise ValidationError("chart order must be positive")
    prev = None
    for level in range(2, max_level + 1):
        nr = 2**level
        nt = 2 ** (level + 1)
        x, w = np.polynomial.legendre.leggauss(nr)
        r = radius * (x + 1) / 2
        wr = w * radius / 2
        theta = 2 * math.pi * np.arange(nt) / nt
        U = r[:, None] * np.exp(1j * theta[None, :])
        vals = np.asarray(form(U), dtype=float)
        total = float(np.sum(wr[:, None] * r[:, None] * vals) * (2 * math.pi / nt))
        if prev is not None and abs(total - prev) <= rel_tol * max(abs(total), 1e-300):
            return total / order
        prev = total
    raise NoConvergence("chart integral did not converge", estimates=(prev,))


def orbit_integrals(base: OrbifoldSignature, cov, chart_forms: Sequence[FormEvaluator], radius: float = 1.0):
    """Integrals over the base and over a cover, assembled chart by chart.

    The base is assumed to be the union of the cone-point charts (one form per
    cone point, invariant under its rotation group).  Each lift of cone point
    k with stabilizer order s carries the chart disc / Z_s, so the cover
    integral is the sum over lifts of ``chart_integral(s, form_k)``.

    Returns ``(base_integral, cover_integral)``.
    """
    cov.check(base)
    if len(chart_forms) != base.n_cones:
        raise ValidationError("one chart form per cone point")
    full = [chart_integral(1, f, radius) for f in chart_forms]
    base_total = math.fsum(F / m for F, m in zip(full, base.cone_orders))
    cover_total = math.fsum(F / s for F, row in zip(full, cov.stabilizers) for s in row)
    return base_total, cover_total
