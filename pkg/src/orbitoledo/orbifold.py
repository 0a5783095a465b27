"""Exact invariants of compact oriented 2-orbifolds given by their signature.

A signature ``(g; m_1, ..., m_n)`` is the genus of the underlying surface
together with the orders of the cone points.  All values are exact
``fractions.Fraction`` instances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable

from .errors import ValidationError

__all__ = [
    "OrbifoldSignature",
    "RationalLattice",
    "euler_characteristic",
    "euler_lattice",
    "is_hyperbolic",
    "is_good",
    "rational_to_json",
    "rational_from_json",
]


def rational_to_json(x) -> dict:
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator}


def rational_from_json(obj) -> Fraction:
    if isinstance(obj, dict):
        try:
            return Fraction(int(obj["num"]), int(obj["den"]))
        except (KeyError, TypeError, ZeroDivisionError) as exc:
            raise ValidationError(f"bad rational {obj!r}") from exc
    if isinstance(obj, (int, str)):
        return Fraction(obj)
    raise ValidationError(f"bad rational {obj!r}")


@dataclass(frozen=True)
class OrbifoldSignature:
    """Genus plus cone orders, cone orders kept sorted ascending."""

    genus: int
    cone_orders: tuple[int, ...] = ()

    def __post_init__(self):
        if isinstance(self.genus, bool) or int(self.genus) != self.genus or self.genus < 0:
            raise ValidationError(f"genus must be a nonnegative integer, got {self.genus!r}")
        orders = tuple(sorted(int(m) for m in self.cone_orders))
        if any(m < 2 for m in orders):
            raise ValidationError(f"cone orders must be >= 2, got {orders}")
        object.__setattr__(self, "genus", int(self.genus))
        object.__setattr__(self, "cone_orders", orders)

    @property
    def n_cones(self) -> int:
        return len(self.cone_orders)

    def to_json(self) -> dict:
        return {"genus": self.genus, "cone_orders": list(self.cone_orders)}

    @classmethod
    def from_json(cls, obj: dict) -> "OrbifoldSignature":
        try:
            return cls(obj["genus"], tuple(obj.get("cone_orders", ())))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad signature {obj!r}") from exc

    def __str__(self):
        cones = ",".join(map(str, self.cone_orders))
        return f"({self.genus};{cones})"


@dataclass(frozen=True)
class RationalLattice:
    """The cyclic subgroup ``generator * Z`` of the rationals."""

    generator: Fraction = field(default=Fraction(1))

    def __post_init__(self):
        g = Fraction(self.generator)
        if g <= 0:
            raise ValidationError("lattice generator must be positive")
        object.__setattr__(self, "generator", g)

    def __contains__(self, x) -> bool:
        return (Fraction(x) / self.generator).denominator == 1

    def scaled(self, factor) -> "RationalLattice":
        return RationalLattice(abs(Fraction(factor)) * self.generator)

    def nearest(self, x: float) -> Fraction:
        """Lattice element closest to the (possibly inexact) number ``x``."""
        k = round(Fraction(x) / self.generator)
        return k * self.generator

    def to_json(self) -> dict:
        return {"generator": rational_to_json(self.generator)}


def euler_characteristic(sig: OrbifoldSignature) -> Fraction:
    chi = Fraction(2 - 2 * sig.genus)
    for m in sig.cone_orders:
        chi += Fraction(1, m) - 1
    return chi


def euler_lattice(sig: OrbifoldSignature) -> RationalLattice:
    """Subgroup of Q generated by 1 and the reciprocals of the cone orders."""
    L = reduce(math.lcm, sig.cone_orders, 1)
    g = reduce(math.gcd, (L // m for m in sig.cone_orders), L)
    return RationalLattice(Fraction(g, L))


def is_hyperbolic(sig: OrbifoldSignature) -> bool:
    return euler_characteristic(sig) < 0


def is_good(sig: OrbifoldSignature) -> bool:
    """False for the teardrop and for spindles with unequal orders.

    These are the only bad compact oriented 2-orbifolds (classical
    classification of 2-orbifolds).
    """
    if sig.genus > 0:
        return True
    orders = sig.cone_orders
    if len(orders) == 1:
        return False
    if len(orders) == 2 and orders[0] != orders[1]:
        return False
    return True


def signature(genus: int, cones: Iterable[int] = ()) -> OrbifoldSignature:
    return OrbifoldSignature(genus, tuple(cones))
