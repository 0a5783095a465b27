"""Representations of orbifold groups into PU(2,1), equivariant maps and the Toledo invariant.

A representation is given on generators as pairs (source, target): the source
is the SU(1,1) matrix of the Fuchsian group acting on the disc, the target an
SU(2,1) matrix.  Targets only matter up to cube roots of unity.

The Toledo invariant of a representation with equivariant lift F is

    tau = (4 / 2 pi) * integral over a fundamental domain of F^* omega

and the first Chern number of the pulled-back tangent bundle is computed
separately from the curvature trace, so that c1 = (3/2) tau is a genuine
check rather than an identity of the code.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import chp
from .errors import (
    DerivativeBreakdown,
    IncompatibleRepresentation,
    NotHyperbolic,
    ValidationError,
)
from .orbifold import (
    OrbifoldSignature,
    euler_characteristic,
    euler_lattice,
    is_hyperbolic,
)
from .quadrature import (
    GeodesicPolygon,
    evaluate_word,
    integrate,
    is_su11,
    mobius,
    poincare_to_klein,
    su11_to_su21,
)

__all__ = [
    "RepresentationData",
    "ValidationReport",
    "EquivariantMapSpec",
    "ToledoResult",
    "RigidityReport",
    "validate_representation",
    "block_representation",
    "lifted_block_representation",
    "trivial_representation",
    "builtin_map",
    "audit_equivariance",
    "extend_equivariantly",
    "toledo_invariant",
    "toledo_lattice_check",
    "rigidity_check",
    "chern_number",
    "holomorphic_identity_check",
]


# --- representation data ------------------------------------------------------


def _mat_to_json(M):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M, dtype=complex)]


def _mat_from_json(obj, n):
    try:
        M = np.array([[complex(z[0], z[1]) if isinstance(z, (list, tuple)) else complex(z) for z in row] for row in obj])
    except (TypeError, ValueError, IndexError) as exc:
        raise ValidationError("matrices are nested lists of [re, im] pairs") from exc
    if M.shape != (n, n):
        raise ValidationError(f"expected a {n}x{n} matrix, got shape {M.shape}")
    return M


@dataclass(frozen=True, eq=False)
class RepresentationData:
    """Generators as (source, target) pairs plus relators and cone words.

    Words are tuples of 1-based generator indices, negative for inverses.
    """

    sources: tuple
    targets: tuple
    relators: tuple = ()
    cone_assignment: tuple = ()  # ((word, order), ...)
    signature: Optional[OrbifoldSignature] = None

    def __post_init__(self):
        if len(self.sources) != len(self.targets):
            raise ValidationError("one target per source generator")
        object.__setattr__(self, "sources", tuple(np.asarray(A, dtype=complex) for A in self.sources))
        object.__setattr__(self, "targets", tuple(np.asarray(M, dtype=complex) for M in self.targets))
        object.__setattr__(self, "relators", tuple(tuple(int(x) for x in w) for w in self.relators))
        object.__setattr__(
            self, "cone_assignment", tuple((tuple(int(x) for x in w), int(m)) for w, m in self.cone_assignment)
        )

    @property
    def n_generators(self) -> int:
        return len(self.sources)

    def source_word(self, word) -> np.ndarray:
        return evaluate_word(self.sources, word)

    def target_word(self, word) -> np.ndarray:
        return evaluate_word(self.targets, word)

    def conjugated(self, C) -> "RepresentationData":
        C = np.asarray(C, dtype=complex)
        Ci = np.linalg.inv(C)
        return RepresentationData(
            self.sources, tuple(C @ M @ Ci for M in self.targets), self.relators, self.cone_assignment, self.signature
        )

    def to_json(self) -> dict:
        return {
            "signature": self.signature.to_json() if self.signature else None,
            "generators": [
                {"source": _mat_to_json(A), "target": _mat_to_json(M)} for A, M in zip(self.sources, self.targets)
            ],
            "relators": [list(w) for w in self.relators],
            "cone_assignment": [{"word": list(w), "order": m} for w, m in self.cone_assignment],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RepresentationData":
        try:
            sig = OrbifoldSignature.from_json(obj["signature"]) if obj.get("signature") else None
            gens = obj["generators"]
            sources = [_mat_from_json(g["source"], 2) for g in gens]
            targets = [_mat_from_json(g["target"], 3) for g in gens]
            cones = [(c["word"], c["order"]) for c in obj.get("cone_assignment", [])]
            return cls(tuple(sources), tuple(targets), tuple(obj.get("relators", [])), tuple(cones), sig)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad representation data: {exc}") from exc


@dataclass
class ValidationReport:
    ok: bool
    residuals: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "residuals": self.residuals, "failures": self.failures}


def _pm_identity_residual(A) -> float:
    return float(min(np.max(np.abs(A - s * np.eye(2))) for s in (1, -1)))


def validate_representation(rep: RepresentationData, tol: float = 1e-9) -> ValidationReport:
    """Membership checks: form preservation, relators and cone words central."""
    res: dict[str, float] = {}
    K = np.diag([1.0, -1.0])
    for i, (A, M) in enumerate(zip(rep.sources, rep.targets), start=1):
        if A.shape != (2, 2) or M.shape != (3, 3):
            raise ValidationError(f"generator {i} has the wrong shape")
        res[f"source[{i}].form"] = float(
            max(np.max(np.abs(A.conj().T @ K @ A - K)), abs(np.linalg.det(A) - 1))
        )
        res[f"target[{i}].form"] = chp.su21_residual(M)
    for k, w in enumerate(rep.relators, start=1):
        res[f"relator[{k}].source"] = _pm_identity_residual(rep.source_word(w))
        res[f"relator[{k}].target"] = chp.central_residual(rep.target_word(w))
    for k, (w, m) in enumerate(rep.cone_assignment, start=1):
        A = np.linalg.matrix_power(rep.source_word(w), m)
        M = np.linalg.matrix_power(rep.target_word(w), m)
        res[f"cone[{k}].source"] = _pm_identity_residual(A)
        res[f"cone[{k}].target"] = chp.central_residual(M)
    failures = [f"{name}: residual {val:.3e} > {tol:.1e}" for name, val in res.items() if not val <= tol]
    return ValidationReport(not failures, res, failures)


def block_representation(domain: GeodesicPolygon, kind: str = "holomorphic") -> RepresentationData:
    """Targets diag(A, 1) (or their complex conjugates) for the domain's generators.

    For surface groups this is a representation stabilizing the complex
    geodesic polar to e3.  For triangle groups the relators do not map to
    scalars (a rotation by 2 pi is -I in SU(1,1)), which
    :func:`validate_representation` reports.
    """
    targets = [su11_to_su21(A) for A in domain.generators]
    if kind == "antiholomorphic":
        targets = [np.conj(M) for M in targets]
    elif kind != "holomorphic":
        raise ValidationError(f"unknown block representation kind {kind!r}")
    return RepresentationData(domain.generators, tuple(targets), domain.relators, domain.cone_words, domain.signature)


def _exponent_sums(word, n):
    e = [0] * n
    for letter in word:
        e[abs(letter) - 1] += 1 if letter > 0 else -1
    return e


def lifted_block_representation(domain: GeodesicPolygon, kind: str = "holomorphic") -> RepresentationData:
    """Targets diag(l_i A_i, 1), rescaled into SU(2,1), with phases l_i making them a representation.

    The phases lift the Fuchsian group from PU(1,1) to U(1,1): each cone
    generator needs (l A)^m = I and every relator needs phase product times
    its source sign equal to 1.  Only generators that carry a cone word get a
    nontrivial phase.  Raises IncompatibleRepresentation when no choice works,
    which happens for (2,3,7) and (3,3,4) by a parity count.
    """
    if kind not in ("holomorphic", "antiholomorphic"):
        raise ValidationError(f"unknown block representation kind {kind!r}")
    gens = domain.generators
    n = len(gens)
    cand = [[1.0 + 0j] for _ in range(n)]
    for word, m in domain.cone_words:
        if len(word) != 1 or word[0] < 1:
            raise ValidationError("phase lifting needs each cone word to be a single generator")
        sign = np.sign(np.linalg.matrix_power(gens[word[0] - 1], m)[0, 0].real)
        # l^m * sign = 1
        cand[word[0] - 1] = [np.exp(1j * math.pi * (2 * k + (sign < 0)) / m) for k in range(m)]
    rel_data = []
    for w in domain.relators:
        sign = np.sign(evaluate_word(gens, w)[0, 0].real)
        rel_data.append((_exponent_sums(w, n), sign))
    for lams in itertools.product(*cand):
        if all(abs(sign * np.prod([lam**k for lam, k in zip(lams, e)]) - 1) < 1e-9 for e, sign in rel_data):
            break
    else:
        raise IncompatibleRepresentation(f"no U(1,1) lift of the {domain.signature} group")
    targets = []
    for lam, A in zip(lams, gens):
        M = su11_to_su21(A)
        M[:2, :2] *= lam
        # det = lam^2; scale by a cube root of lam^-2 to land in SU(2,1)
        M = M * lam ** (-2 / 3)
        targets.append(np.conj(M) if kind == "antiholomorphic" else M)
    return RepresentationData(gens, tuple(targets), domain.relators, domain.cone_words, domain.signature)


def trivial_representation(domain: GeodesicPolygon) -> RepresentationData:
    targets = tuple(np.eye(3, dtype=complex) for _ in domain.generators)
    return RepresentationData(domain.generators, targets, domain.relators, domain.cone_words, domain.signature)


# --- equivariant maps -----------------------------------------------------------

Lift = Callable[[np.ndarray], np.ndarray]
Derivative = Callable[[np.ndarray], tuple]


@dataclass(frozen=True, eq=False)
class EquivariantMapSpec:
    """Lift of a good map: disc points -> negative vectors of C^{2,1}.

    Without an analytic ``derivative`` the partial derivatives come from
    central differences with step ``step_factor * (1 - |u|)`` on the lift
    normalized to first coordinate 1.
    """

    lift: Lift
    derivative: Optional[Derivative] = None
    provenance: str = "user"
    step_factor: float = 1e-5

    def __call__(self, u):
        return self.lift(np.asarray(u, dtype=complex))

    def derivatives(self, u):
        u = np.asarray(u, dtype=complex)
        if self.derivative is not None:
            return self.derivative(u)
        h = self.step_factor * (1 - np.abs(u))
        if np.any(h <= 0) or np.any(np.abs(u) + h >= 1):
            raise DerivativeBreakdown("central-difference stencil leaves the disc")

        def F(z):
            v = self.lift(z)
            return v / v[..., :1]

        hx = h[..., None]
        dx = (F(u + h) - F(u - h)) / (2 * hx)
        dy = (F(u + 1j * h) - F(u - 1j * h)) / (2 * hx)
        return dx, dy

    def transformed(self, C) -> "EquivariantMapSpec":
        """The lift post-composed with the linear map C."""
        C = np.asarray(C, dtype=complex)
        apply = lambda v: np.einsum("ij,...j->...i", C, v)  # noqa: E731
        deriv = None
        if self.derivative is not None:
            d = self.derivative
            deriv = lambda u: tuple(apply(x) for x in d(u))  # noqa: E731
        return EquivariantMapSpec(lambda u: apply(self.lift(u)), deriv, self.provenance, self.step_factor)


def _const(vec):
    vec = np.asarray(vec, dtype=complex)

    def lift(u):
        return np.broadcast_to(vec, np.shape(u) + (3,)).copy()

    def deriv(u):
        z = np.zeros(np.shape(u) + (3,), dtype=complex)
        return z, z.copy()

    return lift, deriv


def _geodesic_lift(conjugate: bool):
    sign = -1.0 if conjugate else 1.0

    def lift(u):
        u = np.asarray(u, dtype=complex)
        out = np.zeros(u.shape + (3,), dtype=complex)
        out[..., 0] = 1.0
        out[..., 1] = np.conj(u) if conjugate else u
        return out

    def deriv(u):
        dx = np.zeros(np.shape(u) + (3,), dtype=complex)
        dy = dx.copy()
        dx[..., 1] = 1.0
        dy[..., 1] = sign * 1j
        return dx, dy

    return lift, deriv


def _sample_points(n: int, seed: int, radius: float = 0.8) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(size=n))
    return r * np.exp(2j * np.pi * rng.uniform(size=n))


def _projective_residual(a, b) -> np.ndarray:
    a = a / np.linalg.norm(a, axis=-1, keepdims=True)
    b = b / np.linalg.norm(b, axis=-1, keepdims=True)
    phase = np.sum(np.conj(b) * a, axis=-1)
    phase = phase / np.maximum(np.abs(phase), 1e-300)
    return np.linalg.norm(a - phase[..., None] * b, axis=-1)


def audit_equivariance(rep: RepresentationData, fmap: EquivariantMapSpec, samples: int = 64, seed: int = 0) -> float:
    """max over samples u and generators (A, M) of the projective gap |F(A u) - M F(u)|."""
    u = _sample_points(samples, seed)
    Fu = fmap(u)
    worst = 0.0
    for A, M in zip(rep.sources, rep.targets):
        lhs = fmap(mobius(A, u))
        rhs = np.einsum("ij,...j->...i", M, Fu)
        worst = max(worst, float(np.max(_projective_residual(lhs, rhs))))
    return worst


def builtin_map(kind: str, rep: RepresentationData, p0=None, tol: float = 1e-9) -> EquivariantMapSpec:
    """Concrete equivariant lifts for special representations.

    ``holomorphic``      u -> (1, u, 0), for targets diag(A, 1)
    ``antiholomorphic``  u -> (1, conj u, 0), for the conjugate targets
    ``constant``         u -> p0, for representations fixing p0 (default e1)
    """
    if kind == "holomorphic":
        lift, deriv = _geodesic_lift(False)
    elif kind == "antiholomorphic":
        lift, deriv = _geodesic_lift(True)
    elif kind == "constant":
        vec = np.array([1, 0, 0], dtype=complex) if p0 is None else np.asarray(p0, dtype=complex)
        if chp.classify_point(vec) is not chp.SignClass.NEGATIVE:
            raise ValidationError("the constant map needs a negative point")
        lift, deriv = _const(vec)
    else:
        raise ValidationError(f"unknown builtin map {kind!r}")
    fmap = EquivariantMapSpec(lift, deriv, f"builtin-{kind}")
    gap = audit_equivariance(rep, fmap)
    if not gap <= tol:
        raise IncompatibleRepresentation(f"{kind} map is not equivariant: audit residual {gap:.3e}")
    return fmap


def _inside(domain_klein, k):
    """Mask of Klein points inside the convex polygon (counterclockwise vertices)."""
    a = domain_klein
    b = np.roll(a, -1)
    cross = ((b - a)[None, :].conj() * (k[:, None] - a[None, :])).imag
    return np.all(cross >= -1e-14, axis=1)


def extend_equivariantly(
    domain: GeodesicPolygon, rep: RepresentationData, local_lift: Lift, max_steps: int = 200
) -> Lift:
    """Lift defined by ``local_lift`` on the domain and by equivariance elsewhere.

    Points outside the polygon are pulled back with the side pairings,
    u = g u0, and sent to M_g F(u0).  Side pairings must be generators of
    ``rep`` (matched by matrix).
    """
    moves = []
    for sp in domain.side_pairings:
        idx = next(
            (i for i, A in enumerate(rep.sources) if np.allclose(A, sp.matrix, atol=1e-12)), None
        )
        if idx is None:
            raise ValidationError("side pairing is not one of the representation's generators")
        # leaving through the partner side: undo the pairing; through the side: apply it
        moves.append((sp.partner, np.linalg.inv(sp.matrix), rep.targets[idx]))
        moves.append((sp.side, sp.matrix, np.linalg.inv(rep.targets[idx])))
    K = poincare_to_klein(np.array(domain.vertices))
    n = len(K)

    def lift(u):
        u = np.asarray(u, dtype=complex)
        flat = u.reshape(-1)
        out = np.asarray(local_lift(flat), dtype=complex).reshape(-1, 3).copy()
        outside = np.nonzero(~_inside(K, poincare_to_klein(flat)))[0]
        for idx in outside:
            z = complex(flat[idx])
            T = np.eye(3, dtype=complex)
            for _ in range(max_steps):
                kz = complex(poincare_to_klein(z))
                side = None
                for s in range(n):
                    a, b = K[s], K[(s + 1) % n]
                    if ((b - a).conjugate() * (kz - a)).imag < -1e-14:
                        side = s
                        break
                if side is None:
                    break
                for s, A, M in moves:
                    if s == side:
                        z = complex(mobius(A, z))
                        # u = A^-1 z, so F(u) = rho(A^-1) F(z) = M F(z) accumulated
                        T = T @ M
                        break
                else:
                    raise ValidationError(f"side {side} has no pairing")
            else:
                raise ValidationError("domain reduction did not terminate")
            out[idx] = T @ np.asarray(local_lift(np.array([z])), dtype=complex).reshape(3)
        return out.reshape(u.shape + (3,))

    return lift


# --- Toledo invariant -------------------------------------------------------------


@dataclass
class ToledoResult:
    tau: float
    tau_rel: float
    quadrature_tol: float
    error_estimate: float
    lattice_verdict: bool
    nearest_lattice_point: Fraction
    representation_valid: bool = True

    def to_json(self) -> dict:
        return {
            "tau": self.tau,
            "tau_rel": self.tau_rel,
            "quadrature_tol": self.quadrature_tol,
            "error_estimate": self.error_estimate,
            "lattice_verdict": self.lattice_verdict,
            "nearest_lattice_point": {
                "num": self.nearest_lattice_point.numerator,
                "den": self.nearest_lattice_point.denominator,
            },
            "representation_valid": self.representation_valid,
        }


def _tangent_pair(fmap: EquivariantMapSpec, u):
    p = fmap(u)
    dx, dy = fmap.derivatives(u)
    return p, chp.project_to_tangent(p, dx), chp.project_to_tangent(p, dy)


def kahler_pullback_density(fmap: EquivariantMapSpec) -> Callable:
    """u -> omega(dF/dx, dF/dy), the density of F^* omega in dx dy."""

    def density(u):
        p, s, t = _tangent_pair(fmap, u)
        return chp.kahler_form(p, s, t)

    return density


def chern_density(fmap: EquivariantMapSpec) -> Callable:
    """u -> tr R(dF/dx, dF/dy) / (2 pi i), computed from the curvature tensor."""

    def density(u):
        p, s, t = _tangent_pair(fmap, u)
        tr = chp.curvature_trace(p, s, t)
        return np.real(tr / (2j * math.pi))

    return density


def _precheck(rep, fmap, domain, strict, audit):
    sig = rep.signature or domain.signature
    if sig is None:
        raise ValidationError("representation carries no signature")
    if domain.signature is not None and domain.signature != sig:
        raise ValidationError(f"domain is for {domain.signature}, representation for {sig}")
    if not is_hyperbolic(sig):
        raise NotHyperbolic(f"chi{sig} = {euler_characteristic(sig)} is not negative")
    report = validate_representation(rep)
    if strict and not report.ok:
        raise ValidationError("invalid representation: " + "; ".join(report.failures))
    if audit:
        gap = audit_equivariance(rep, fmap)
        if not gap <= 1e-7:
            raise IncompatibleRepresentation(f"equivariance audit residual {gap:.3e}")
    return sig, report.ok


def toledo_lattice_check(tau: float, sig: OrbifoldSignature, tol: float = 1e-6):
    """Is tau within tol of (2/3)(Z + 1/m_1 Z + ...)?  Returns (verdict, nearest point)."""
    lattice = euler_lattice(sig).scaled(Fraction(2, 3))
    nearest = lattice.nearest(tau)
    return abs(float(nearest) - tau) <= tol, nearest


def toledo_invariant(
    rep: RepresentationData,
    fmap: EquivariantMapSpec,
    domain: GeodesicPolygon,
    rel_tol: float = 1e-8,
    max_depth: int = 9,
    jobs: int = 1,
    strict: bool = True,
    audit: bool = True,
    lattice_tol: float = 1e-6,
) -> ToledoResult:
    """tau = (2/pi) * integral of F^* omega over the fundamental domain.

    ``strict=False`` lets invalid representation data through (reported in
    ``representation_valid``), for probes only.
    """
    sig, valid = _precheck(rep, fmap, domain, strict, audit)
    res = integrate(
        domain, kahler_pullback_density(fmap), rel_tol=rel_tol, max_depth=max_depth,
        abs_tol=1e-15, jobs=jobs, full_output=True,
    )
    tau = 4 / (2 * math.pi) * res.value
    chi = float(euler_characteristic(sig))
    verdict, nearest = toledo_lattice_check(tau, sig, lattice_tol)
    return ToledoResult(
        tau=tau,
        tau_rel=tau / chi,
        quadrature_tol=rel_tol,
        error_estimate=4 / (2 * math.pi) * res.error_estimate,
        lattice_verdict=verdict,
        nearest_lattice_point=nearest,
        representation_valid=valid,
    )


def chern_number(
    rep: RepresentationData,
    fmap: EquivariantMapSpec,
    domain: GeodesicPolygon,
    rel_tol: float = 1e-8,
    max_depth: int = 9,
    jobs: int = 1,
    strict: bool = True,
    audit: bool = True,
) -> float:
    """c1 = (1 / 2 pi i) * integral of tr R(dF/dx, dF/dy) dx dy."""
    _precheck(rep, fmap, domain, strict, audit)
    return integrate(
        domain, chern_density(fmap), rel_tol=rel_tol, max_depth=max_depth, abs_tol=1e-15, jobs=jobs
    )


@dataclass
class RigidityReport:
    tau_rel: float
    inequality_holds: bool
    maximal: bool
    stable_polar: Optional[np.ndarray]
    consistent: bool

    def to_json(self) -> dict:
        polar = None
        if self.stable_polar is not None:
            polar = [[float(z.real), float(z.imag)] for z in self.stable_polar]
        return {
            "tau_rel": self.tau_rel,
            "inequality_holds": self.inequality_holds,
            "maximal": self.maximal,
            "stable_polar": polar,
            "consistent": self.consistent,
        }


def rigidity_check(result: ToledoResult, rep: RepresentationData, tol: float = 5e-4) -> RigidityReport:
    """|tau_R| <= 1, and maximal representations must stabilize a complex geodesic."""
    t = abs(result.tau_rel)
    maximal = t >= 1 - tol
    polar = chp.stable_complex_geodesic(rep.targets)
    consistent = (not maximal) or polar is not None
    return RigidityReport(result.tau_rel, t <= 1 + tol, maximal, polar, consistent and t <= 1 + tol)


def holomorphic_identity_check(tau_rel, e_rel, tol: Optional[float] = None) -> bool:
    """(3/2) tau_R == e_R + 1: exact for rationals, within ``tol`` otherwise."""
    exact = all(isinstance(x, (int, Fraction)) for x in (tau_rel, e_rel))
    if exact and tol is None:
        return Fraction(3, 2) * Fraction(tau_rel) == Fraction(e_rel) + 1
    return abs(1.5 * float(tau_rel) - (float(e_rel) + 1)) <= (1e-9 if tol is None else tol)


def smooth_bump(u, radius: float):
    """C-infinity bump supported on |u| < radius, equal to 1/e at the centre."""
    r2 = np.abs(np.asarray(u)) ** 2 / radius**2
    out = np.zeros(np.shape(u))
    inside = r2 < 1
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out
