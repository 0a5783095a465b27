from fractions import Fraction
from math import gcd, lcm

import pytest
from hypothesis import given, strategies as st

from orbitoledo.errors import ValidationError
from orbitoledo.orbifold import (
    OrbifoldSignature,
    RationalLattice,
    euler_characteristic,
    euler_lattice,
    is_good,
    is_hyperbolic,
    rational_from_json,
    rational_to_json,
    signature,
)

signatures = st.builds(
    OrbifoldSignature,
    st.integers(0, 6),
    st.lists(st.integers(2, 40), max_size=7).map(tuple),
)


@pytest.mark.parametrize(
    "genus, cones, chi",
    [
        (2, (), Fraction(-2)),
        (0, (2, 3, 7), Fraction(-1, 42)),
        (1, (), Fraction(0)),
        (0, (3, 3, 4), Fraction(-1, 12)),
    ],
)
def test_euler_characteristic_values(genus, cones, chi):
    assert euler_characteristic(signature(genus, cones)) == chi


def test_chi_237_by_hand():
    assert Fraction(2) - Fraction(1, 2) - Fraction(2, 3) - Fraction(6, 7) == Fraction(-1, 42)


@pytest.mark.parametrize(
    "cones, gen",
    [((), Fraction(1)), ((2, 3, 7), Fraction(1, 42)), ((2, 2), Fraction(1, 2)), ((4, 6), Fraction(1, 12))],
)
def test_euler_lattice_generator(cones, gen):
    assert euler_lattice(signature(0, cones)).generator == gen


@given(signatures)
def test_lattice_contains_generators(sig):
    lat = euler_lattice(sig)
    assert 1 in lat
    for m in sig.cone_orders:
        assert Fraction(1, m) in lat


@given(signatures)
def test_lattice_generator_matches_gcd_lcm_oracle(sig):
    # Z + sum (1/m)Z = (1/L)Z where L = lcm of the orders: every 1/m is an
    # integer multiple of 1/L and 1/L is an integer combination (Bezout).
    L = lcm(1, *sig.cone_orders)
    g = 0
    for m in (1, *sig.cone_orders):
        g = gcd(g, L // m)
    assert euler_lattice(sig).generator == Fraction(g, L)


@given(signatures, st.integers(-50, 50))
def test_lattice_membership(sig, k):
    lat = euler_lattice(sig)
    assert k * lat.generator in lat
    assert lat.generator / 2 not in lat


def test_lattice_nearest_and_scaled():
    lat = RationalLattice(Fraction(1, 42))
    assert lat.nearest(-0.0239) == Fraction(-1, 42)
    assert lat.scaled(Fraction(2, 3)).generator == Fraction(1, 63)
    assert rational_from_json(lat.to_json()["generator"]) == Fraction(1, 42)


@pytest.mark.parametrize(
    "genus, cones, hyp",
    [(0, (2, 3, 7), True), (1, (), False), (2, (), True), (0, (2, 3, 6), False), (0, (2, 2, 2, 2), False)],
)
def test_is_hyperbolic(genus, cones, hyp):
    assert is_hyperbolic(signature(genus, cones)) is hyp


@pytest.mark.parametrize(
    "genus, cones, good",
    [
        (0, (5,), False),
        (0, (2, 3), False),
        (0, (3, 3), True),
        (0, (), True),
        (1, (5,), True),
        (0, (2, 3, 7), True),
    ],
)
def test_is_good(genus, cones, good):
    assert is_good(signature(genus, cones)) is good


@given(signatures)
def test_hyperbolic_implies_good(sig):
    if is_hyperbolic(sig):
        assert is_good(sig)


@given(signatures)
def test_signature_json_roundtrip(sig):
    assert OrbifoldSignature.from_json(sig.to_json()) == sig


def test_signature_sorts_and_validates():
    assert signature(0, (7, 2, 3)).cone_orders == (2, 3, 7)
    with pytest.raises(ValidationError):
        signature(-1)
    with pytest.raises(ValidationError):
        signature(0, (1, 3))


@given(st.fractions())
def test_rational_json_roundtrip(x):
    assert rational_from_json(rational_to_json(x)) == x


@given(signatures, st.integers(2, 60))
def test_chi_additive_in_cone_terms(sig, m):
    bigger = OrbifoldSignature(sig.genus, sig.cone_orders + (m,))
    assert euler_characteristic(bigger) - euler_characteristic(sig) == Fraction(1, m) - 1


@given(signatures)
def test_chi_lies_in_lattice(sig):
    assert euler_characteristic(sig) in euler_lattice(sig)


@given(signatures)
def test_generator_divides_one_and_reciprocals(sig):
    g = euler_lattice(sig).generator
    for x in (Fraction(1), *(Fraction(1, m) for m in sig.cone_orders)):
        assert (x / g).denominator == 1


def test_large_orders_stay_exact():
    sig = signature(0, (9973, 9967, 9949, 9941))
    L = 9973 * 9967 * 9949 * 9941
    assert euler_lattice(sig).generator == Fraction(1, L)
    assert euler_characteristic(sig).denominator == L
