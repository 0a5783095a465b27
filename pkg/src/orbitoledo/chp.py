"""Linear algebra of the complex hyperbolic plane.

Vectors live in C^3 with the Hermitian form

    <u, v> = -u_1 conj(v_1) + u_2 conj(v_2) + u_3 conj(v_3),

linear in the first slot.  Negative lines form the complex hyperbolic plane.
A tangent vector at the point [p] is the linear map C p -> p^perp; it is
stored as its value t(p) on the chosen representative ``p``.  Every function
takes plain arrays (or HPoint/HTangent wrappers) and broadcasts over leading
axes, so a batch of samples is a ``(..., 3)`` array.

Curvature convention
--------------------
The curvature operator is the four-term composite

    R(t1, t2) s = -s t1^# t2 - t2 t1^# s + s t2^# t1 + t1 t2^# s

where ``t^#`` is the adjoint of t with respect to the Hermitian metric h,
``t^#(v) = h(v, t) p = -<v, t(p)> / <p, p> * p``.  This is the negative of
:func:`adjoint_apply`.  With it, holomorphic planes have sectional curvature
-4, totally real planes -1, and on a (t, n) frame with t2 = a t + b n one gets
R(t1, t2) t = -4a t - b n and R(t1, t2) n = conj(b) t - 2a n.  Using
:func:`adjoint_apply` instead flips the sign of every term.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    BaseMismatch,
    CoincidentPoints,
    DegeneratePlane,
    IsotropicBase,
    NonNegativePoint,
    NotInSU21,
    ValidationError,
    ZeroVector,
)

J = np.diag([-1.0, 1.0, 1.0]).astype(complex)
TOL = 1e-9

CUBE_ROOTS = np.exp(2j * np.pi * np.arange(3) / 3)


class SignClass(enum.Enum):
    NEGATIVE = "negative"
    ISOTROPIC = "isotropic"
    POSITIVE = "positive"


def _arr(x) -> np.ndarray:
    if isinstance(x, HPoint):
        return x.representative
    if isinstance(x, HTangent):
        return x.vector
    return np.asarray(x, dtype=complex)


def herm(u, v):
    """Hermitian form, broadcast over leading axes."""
    u, v = _arr(u), _arr(v)
    return -u[..., 0] * np.conj(v[..., 0]) + np.sum(u[..., 1:] * np.conj(v[..., 1:]), axis=-1)


def norm2(u):
    u = _arr(u)
    return np.sum(np.abs(u) ** 2, axis=-1)


def classify_point(p, tol: float = TOL) -> SignClass:
    p = _arr(p)
    n2 = float(norm2(p))
    if n2 == 0.0:
        raise ZeroVector("the zero vector is not a projective point")
    q = float(herm(p, p).real)
    if abs(q) <= tol * n2:
        return SignClass.ISOTROPIC
    return SignClass.NEGATIVE if q < 0 else SignClass.POSITIVE


@dataclass(frozen=True, eq=False)
class HPoint:
    representative: np.ndarray
    sign_class: SignClass

    @classmethod
    def of(cls, v, tol: float = TOL) -> "HPoint":
        v = np.asarray(v, dtype=complex).reshape(3)
        return cls(v, classify_point(v, tol))

    def normalized(self) -> "HPoint":
        """Representative with <p, p> = -1 (or +1 for positive points)."""
        if self.sign_class is SignClass.ISOTROPIC:
            raise IsotropicBase("isotropic points have no normalized representative")
        q = abs(herm(self.representative, self.representative).real)
        return HPoint(self.representative / np.sqrt(q), self.sign_class)


@dataclass(frozen=True, eq=False)
class HTangent:
    """Tangent vector at ``base``, stored as its value on base.representative."""

    base: HPoint
    vector: np.ndarray

    @classmethod
    def at(cls, base: HPoint, v, tol: float = TOL, project: bool = False) -> "HTangent":
        if base.sign_class is SignClass.ISOTROPIC:
            raise IsotropicBase("tangent spaces are only modelled at non-isotropic points")
        p = base.representative
        v = np.asarray(v, dtype=complex).reshape(3)
        if project:
            v = project_to_tangent(p, v)
        elif abs(herm(p, v)) > tol * np.sqrt(norm2(p) * norm2(v)):
            raise BaseMismatch("vector is not form-orthogonal to the base point")
        return cls(base, v)


def _base_of(*tangents) -> Optional[np.ndarray]:
    bases = [t.base for t in tangents if isinstance(t, HTangent)]
    if not bases:
        return None
    first = bases[0]
    for b in bases[1:]:
        if b is not first and not _same_projective(first.representative, b.representative):
            raise BaseMismatch("tangent vectors are based at different points")
    return first.representative


def _same_projective(a, b, tol: float = 1e-12) -> bool:
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return abs(abs(np.vdot(a, b)) - 1.0) <= tol


def _resolve_base(p, *tangents):
    base = _base_of(*tangents)
    if p is None:
        if base is None:
            raise ValidationError("no base point given")
        p = base
    else:
        p = _arr(p)
        if base is not None and not _same_projective(base, p):
            raise BaseMismatch("tangent vectors are not based at p")
        if base is not None:
            # vectors are stored relative to their own representative
            p = base
    return p


def project_to_tangent(p, v):
    """Orthogonal projection of ``v`` onto p^perp (p non-isotropic)."""
    p, v = _arr(p), _arr(v)
    return v - (herm(v, p) / herm(p, p))[..., None] * p


def _check_nonisotropic(p, tol=TOL):
    q = herm(p, p).real
    if np.any(np.abs(q) <= tol * norm2(p)):
        raise IsotropicBase("base point is isotropic")
    return q


def _check_tangent(p, *vs, tol=1e-7):
    npn = np.sqrt(norm2(p))
    for v in vs:
        bad = np.abs(herm(p, v)) > tol * npn * np.sqrt(norm2(v)) + 1e-300
        if np.any(bad):
            raise BaseMismatch("vector is not tangent at the given base point")


def hmetric(p, s, t):
    """h(s, t) = -<s(p), t(p)> / <p, p>."""
    q = _check_nonisotropic(p)
    return -herm(s, t) / q


def metric(p, s, t):
    """Return ``(h, g, omega)`` for tangent vectors s, t at p."""
    p = _resolve_base(p, s, t)
    s, t = _arr(s), _arr(t)
    h = hmetric(p, s, t)
    return h, np.real(h), np.imag(h)


def kahler_form(p, s, t):
    return metric(p, s, t)[2]


def adjoint_apply(p, t, v):
    """t^*(v) = <v, t(p)> / <p, p> * p."""
    p = _resolve_base(p, t)
    t, v = _arr(t), _arr(v)
    q = _check_nonisotropic(p)
    return (herm(v, t) / q)[..., None] * p


def _compose(p, x, y, z):
    """(x o y^# o z)(p) with y^# the h-adjoint: h(z, y) x."""
    return hmetric(p, z, y)[..., None] * x


def curvature(p, t1, t2, s):
    """R(t1, t2) s, see the module docstring for the sign convention."""
    p = _resolve_base(p, t1, t2, s)
    t1, t2, s = _arr(t1), _arr(t2), _arr(s)
    _check_nonisotropic(p)
    _check_tangent(p, t1, t2, s)
    return (
        -_compose(p, s, t1, t2)
        - _compose(p, t2, t1, s)
        + _compose(p, s, t2, t1)
        + _compose(p, t1, t2, s)
    )


def literal_curvature(p, t1, t2, s):
    """The same composite built from :func:`adjoint_apply` (opposite sign)."""
    p = _resolve_base(p, t1, t2, s)
    t1, t2, s = _arr(t1), _arr(t2), _arr(s)

    def comp(x, y, z):
        c = herm(z, y) / herm(p, p)
        return c[..., None] * x

    return -comp(s, t1, t2) - comp(t2, t1, s) + comp(s, t2, t1) + comp(t1, t2, s)


def sectional_curvature(p, t1, t2, tol: float = 1e-12):
    """K = g(R(t1,t2)t1, t2) / (g11 g22 - g12^2)."""
    p = _resolve_base(p, t1, t2)
    t1, t2 = _arr(t1), _arr(t2)
    q = _check_nonisotropic(p)
    if np.any(q > 0):
        raise NonNegativePoint("sectional curvature is computed at negative points")
    g11 = hmetric(p, t1, t1).real
    g22 = hmetric(p, t2, t2).real
    g12 = hmetric(p, t1, t2).real
    area2 = g11 * g22 - g12**2
    if np.any(area2 <= tol * g11 * g22):
        raise DegeneratePlane("tangent vectors are real-linearly dependent")
    num = hmetric(p, curvature(p, t1, t2, t1), t2).real
    return num / area2


def curvature_trace(p, t1, t2):
    """Complex trace of v -> R(t1, t2) v over the tangent space at p.

    Computed as the matrix trace on C^3 of v -> R(t1, t2)(proj v), which
    kills p and agrees with R on p^perp.
    """
    p = _resolve_base(p, t1, t2)
    t1, t2 = _arr(t1), _arr(t2)
    _check_nonisotropic(p)
    tr = 0
    for k in range(3):
        e = np.zeros(3, dtype=complex)
        e[k] = 1.0
        e = np.broadcast_to(e, np.broadcast_shapes(p.shape, t1.shape, t2.shape))
        col = curvature(p, t1, t2, project_to_tangent(p, e))
        tr = tr + col[..., k]
    return tr


def distance(p, q):
    """Distance for the metric h; cosh^2 d = <p,q><q,p> / (<p,p><q,q>)."""
    p, q = _arr(p), _arr(q)
    pp = herm(p, p).real
    qq = herm(q, q).real
    if np.any(pp >= 0) or np.any(qq >= 0):
        raise NonNegativePoint("distance is defined between negative points")
    c2 = np.abs(herm(p, q)) ** 2 / (pp * qq)
    return np.arccosh(np.sqrt(np.maximum(c2, 1.0)))


# --- isometries -----------------------------------------------------------


def su21_residual(M) -> float:
    """max(|M* J M - J|, |det M - 1|)."""
    M = np.asarray(M, dtype=complex)
    form = np.max(np.abs(M.conj().T @ J @ M - J))
    return float(max(form, abs(np.linalg.det(M) - 1.0)))


def in_su21(M, tol: float = TOL) -> bool:
    M = np.asarray(M, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(M, 2)) ** 2)
    return su21_residual(M) <= tol * scale


@dataclass(frozen=True)
class Isometry:
    matrix: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        if M.shape != (3, 3):
            raise ValidationError(f"isometry must be 3x3, got shape {M.shape}")
        object.__setattr__(self, "matrix", M)

    def check(self, tol: float = TOL) -> "Isometry":
        if not in_su21(self.matrix, tol):
            raise NotInSU21(f"residual {su21_residual(self.matrix):.3e}")
        return self

    def __call__(self, v):
        return np.einsum("ij,...j->...i", self.matrix, _arr(v))


def central_residual(M) -> float:
    """Distance from M to the nearest of I, wI, w^2 I (w a cube root of 1)."""
    M = np.asarray(M, dtype=complex)
    return float(min(np.max(np.abs(M - c * np.eye(3))) for c in CUBE_ROOTS))


def _eigenspaces(M, tol: float = 1e-7):
    """Cluster eigenvalues and return ``[(lam, basis)]`` with orthonormal bases."""
    M = np.asarray(M, dtype=complex)
    lams = np.linalg.eigvals(M)
    clusters: list[list[complex]] = []
    scale = max(1.0, float(np.max(np.abs(lams))))
    for lam in lams:
        for c in clusters:
            if abs(lam - c[0]) <= 1e3 * tol * scale:
                c.append(lam)
                break
        else:
            clusters.append([lam])
    spaces = []
    for c in clusters:
        lam = complex(np.mean(c))
        basis = scipy.linalg.null_space(M - lam * np.eye(3), rcond=1e2 * tol)
        if basis.shape[1] == 0:
            # defective eigenvalue under rounding: take the smallest singular vector
            _, _, vh = np.linalg.svd(M - lam * np.eye(3))
            basis = vh[-1].conj()[:, None]
        spaces.append((lam, basis))
    return spaces


def _extreme_vector(basis, sign: int, tol: float = TOL):
    """A vector of the span whose form value has the requested sign, or None."""
    G = basis.conj().T @ J @ basis
    G = (G + G.conj().T) / 2
    w, v = np.linalg.eigh(G)
    k = 0 if sign < 0 else -1
    if sign * w[k] > tol:
        return basis @ v[:, k]
    return None


@dataclass(frozen=True)
class IsometryClass:
    kind: str  # "elliptic", "central" or "other"
    fixed_point: Optional[np.ndarray] = None
    fixed_geodesic_polar: Optional[np.ndarray] = None
    eigenvalues: Optional[np.ndarray] = None


def classify_isometry(M, tol: float = TOL) -> IsometryClass:
    """Detect elliptic isometries: a negative eigenvector is a fixed point.

    When the eigenvalue of the negative eigenvector is repeated, the whole
    complex geodesic through that eigenspace is fixed; its positive polar is
    reported.  Parabolic and loxodromic elements are both "other".
    """
    M = Isometry(M).check(tol).matrix
    lams = np.linalg.eigvals(M)
    if central_residual(M) <= 1e3 * tol:
        return IsometryClass("central", eigenvalues=lams)
    for lam, basis in _eigenspaces(M):
        c = _extreme_vector(basis, -1, tol=1e-6)
        if c is None:
            continue
        polar = None
        if basis.shape[1] == 2:
            polar = polar_of(basis[:, 0], basis[:, 1])
        return IsometryClass("elliptic", fixed_point=c, fixed_geodesic_polar=polar, eigenvalues=lams)
    return IsometryClass("other", eigenvalues=lams)


# --- complex geodesics ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class ComplexGeodesic:
    """The complex geodesic P(polar^perp) meeting the negative region."""

    polar: np.ndarray

    def contains(self, p, tol: float = TOL) -> bool:
        p = _arr(p)
        return bool(abs(herm(p, self.polar)) <= tol * np.sqrt(norm2(p) * norm2(self.polar)))


def complex_geodesic_polar(p, tol: float = TOL) -> ComplexGeodesic:
    p = _arr(p)
    if classify_point(p, tol) is not SignClass.POSITIVE:
        raise ValidationError("the polar of a complex geodesic must be a positive point")
    return ComplexGeodesic(p)


def polar_of(p1, p2, tol: float = 1e-10):
    """Hermitian cross product: the vector form-orthogonal to p1 and p2."""
    p1, p2 = _arr(p1), _arr(p2)
    c = np.cross(np.conj(p1), np.conj(p2))
    v = np.diag(J).real * c
    if np.linalg.norm(v) <= tol * np.linalg.norm(p1) * np.linalg.norm(p2):
        raise CoincidentPoints("points are projectively equal")
    return v


def _intersect(A, B, tol=1e-7):
    """Orthonormal basis of span(A) intersected with span(B)."""
    coeffs = scipy.linalg.null_space(np.hstack([A, -B]), rcond=tol)
    if coeffs.shape[1] == 0:
        return None
    X = scipy.linalg.orth(A @ coeffs[: A.shape[1]], rcond=tol)
    return X if X.shape[1] else None


def stable_complex_geodesic(gens: Sequence, tol: float = 1e-8):
    """Common positive eigenvector of all generators, or None.

    Its polar complex geodesic is then stable under the generated group.
    """
    mats = [Isometry(_unwrap_iso(M)).check(max(tol, TOL)).matrix for M in gens]
    spaces = [np.eye(3, dtype=complex)]
    for M in mats:
        nxt = []
        for S in spaces:
            for _, E in _eigenspaces(M):
                X = _intersect(S, E)
                if X is not None:
                    nxt.append(X)
        spaces = nxt
        if not spaces:
            return None
    for S in spaces:
        v = _extreme_vector(S, +1, tol=tol)
        if v is None:
            continue
        v = v / np.sqrt(herm(v, v).real)
        if all(_eigen_residual(M, v) <= np.sqrt(tol) for M in mats):
            return v
    return None


def _unwrap_iso(M):
    return M.matrix if isinstance(M, Isometry) else M


def _eigen_residual(M, v) -> float:
    w = M @ v
    lam = np.vdot(v, w) / np.vdot(v, v)
    return float(np.linalg.norm(w - lam * v) / max(np.linalg.norm(w), 1e-300))


# --- sampling helpers -----------------------------------------------------


def random_su21(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """exp of a random element of su(2,1)."""
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    K = scale * (A - A.conj().T) / 2
    X = J @ K
    X = X - np.trace(X) / 3 * np.eye(3)
    return scipy.linalg.expm(X)


def random_negative_points(rng: np.random.Generator, n: int, radius: float = 0.95) -> np.ndarray:
    """Negative vectors c (1, z) with |z| < radius and random complex scale c."""
    z = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    z *= radius * rng.uniform(0, 1, size=(n, 1)) ** 0.25
    p = np.concatenate([np.ones((n, 1)), z], axis=1).astype(complex)
    scale = rng.uniform(0.3, 3.0, size=(n, 1)) * np.exp(2j * np.pi * rng.uniform(size=(n, 1)))
    return p * scale


def random_tangents(rng: np.random.Generator, p: np.ndarray) -> np.ndarray:
    v = rng.normal(size=p.shape) + 1j * rng.normal(size=p.shape)
    return project_to_tangent(p, v)


def unit_tangent(p, v):
    """Rescale v to h-norm one."""
    n = np.sqrt(hmetric(p, v, v).real)
    return v / n[..., None]
