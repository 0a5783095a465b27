"""Seifert-style winding data of circle orbibundles and their covering pullbacks.

An S^1-orbibundle over ``(g; m_1..m_n)`` is encoded by integers ``q0`` (the
winding of a boundary section around a regular point) and ``q_k`` (winding
around the cone point of order ``m_k``).  Its Euler number is

    e = SIGN * (q0 + sum_k q_k / m_k).

No total-space model is built; every invariant factors through these numbers.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import NonIntegralGenus, ValidationError, ZeroEulerCharacteristic
from .orbifold import (
    OrbifoldSignature,
    euler_characteristic,
    euler_lattice,
)

# Orientation convention for e.  Tests pin it through e(TB) = chi(B).
SIGN = 1

__all__ = [
    "SIGN",
    "SeifertData",
    "FiberClass",
    "CoveringData",
    "euler_number",
    "tangent_seifert",
    "fiber_class",
    "covered_signature",
    "pullback",
    "lattice_check",
    "relative_euler",
    "identity_covering",
]


@dataclass(frozen=True)
class SeifertData:
    base: OrbifoldSignature
    q0: int = 0
    windings: tuple[int, ...] = ()

    def __post_init__(self):
        windings = tuple(int(q) for q in self.windings)
        if len(windings) != self.base.n_cones:
            raise ValidationError(
                f"{len(windings)} windings for {self.base.n_cones} cone points"
            )
        object.__setattr__(self, "q0", int(self.q0))
        object.__setattr__(self, "windings", windings)

    @classmethod
    def from_pairs(cls, genus: int, q0: int, pairs) -> "SeifertData":
        """Build from unsorted ``(order, winding)`` pairs, keeping them matched."""
        pairs = sorted((int(m), int(q)) for m, q in pairs)
        base = OrbifoldSignature(genus, tuple(m for m, _ in pairs))
        return cls(base, q0, tuple(q for _, q in pairs))

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "q0": self.q0, "windings": list(self.windings)}

    @classmethod
    def from_json(cls, obj: dict) -> "SeifertData":
        try:
            base = obj["base"]
            orders = list(base.get("cone_orders", ()))
            windings = list(obj.get("windings", ()))
            q0 = obj.get("q0", 0)
            genus = base["genus"]
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValidationError(f"bad Seifert data {obj!r}") from exc
        if len(orders) != len(windings):
            raise ValidationError("windings and cone_orders differ in length")
        return cls.from_pairs(genus, q0, zip(orders, windings))


@dataclass(frozen=True)
class FiberClass:
    """A fibre's class in H_1(M; Q), in units of the regular fibre."""

    coefficient: Fraction


@dataclass(frozen=True)
class CoveringData:
    """Orbit/stabilizer data of an orbifold covering of degree ``degree``.

    ``stabilizers[k]`` lists the orders of the local groups at the lifts of
    the k-th cone point of the base (in the base's sorted order).
    """

    degree: int
    stabilizers: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValidationError(f"degree must be a positive integer, got {self.degree!r}")
        stabs = tuple(tuple(int(s) for s in row) for row in self.stabilizers)
        if any(s < 1 for row in stabs for s in row):
            raise ValidationError("stabilizer orders must be positive")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "stabilizers", stabs)

    def check(self, base: OrbifoldSignature) -> None:
        """Raise unless the orbit-counting constraints hold over ``base``."""
        if len(self.stabilizers) != base.n_cones:
            raise ValidationError(
                f"stabilizer data for {len(self.stabilizers)} cone points, base has {base.n_cones}"
            )
        for m, row in zip(base.cone_orders, self.stabilizers):
            if not row:
                raise ValidationError(f"cone point of order {m} has no lifts")
            if any(m % s for s in row):
                raise ValidationError(f"stabilizers {row} do not all divide {m}")
            if sum(m // s for s in row) != self.degree:
                raise ValidationError(
                    f"orbit sizes {[m // s for s in row]} at order {m} do not sum to {self.degree}"
                )

    def to_json(self) -> dict:
        return {"degree": self.degree, "stabilizers": [list(r) for r in self.stabilizers]}

    @classmethod
    def from_json(cls, obj: dict) -> "CoveringData":
        try:
            return cls(obj["degree"], tuple(tuple(r) for r in obj.get("stabilizers", ())))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad covering data {obj!r}") from exc


def euler_number(sd: SeifertData) -> Fraction:
    e = Fraction(sd.q0)
    for m, q in zip(sd.base.cone_orders, sd.windings):
        e += Fraction(q, m)
    return SIGN * e


def tangent_seifert(sig: OrbifoldSignature) -> SeifertData:
    """Winding data of the tangent orbibundle: every cone winding is 1."""
    q0 = (2 - 2 * sig.genus) - sig.n_cones
    return SeifertData(sig, SIGN * q0, (SIGN,) * sig.n_cones)


def fiber_class(m: int) -> FiberClass:
    if m < 1:
        raise ValidationError(f"order must be positive, got {m}")
    return FiberClass(Fraction(1, m))


def lattice_check(e, sig: OrbifoldSignature) -> bool:
    return Fraction(e) in euler_lattice(sig)


def relative_euler(sd: SeifertData) -> Fraction:
    chi = euler_characteristic(sd.base)
    if chi == 0:
        raise ZeroEulerCharacteristic(f"chi{sd.base} = 0")
    return euler_number(sd) / chi


def identity_covering(base: OrbifoldSignature) -> CoveringData:
    return CoveringData(1, tuple((m,) for m in base.cone_orders))


def covered_signature(base: OrbifoldSignature, cov: CoveringData) -> OrbifoldSignature:
    """Signature of the covering orbifold, genus fixed by chi(cover) = d chi(base)."""
    cov.check(base)
    orders = [s for row in cov.stabilizers for s in row if s > 1]
    chi2 = cov.degree * euler_characteristic(base)
    # chi2 = 2 - 2 g2 + sum(1/s - 1)
    twice_genus = 2 - chi2 + sum(Fraction(1, s) - 1 for s in orders)
    if twice_genus.denominator != 1 or twice_genus.numerator % 2 or twice_genus < 0:
        raise NonIntegralGenus(
            f"degree {cov.degree} cover of {base} would have genus {twice_genus / 2}"
        )
    return OrbifoldSignature(twice_genus.numerator // 2, tuple(orders))


def pullback(sd: SeifertData, cov: CoveringData) -> SeifertData:
    """Pull the orbibundle back along a covering.

    Lifts with nontrivial stabilizer inherit the base winding; lifts with
    trivial stabilizer and the d lifts of the regular slot fold into q0.
    """
    covered = covered_signature(sd.base, cov)
    q0 = cov.degree * sd.q0
    pairs = []
    for q, row in zip(sd.windings, cov.stabilizers):
        for s in row:
            if s > 1:
                pairs.append((s, q))
            else:
                q0 += q
    return SeifertData.from_pairs(covered.genus, q0, pairs)
