import random
from fractions import Fraction

import pytest

from orbitoledo.errors import NonIntegralGenus
from orbitoledo.orbibundle import CoveringData, SeifertData, covered_signature
from orbitoledo.orbifold import OrbifoldSignature


def random_signature(rnd: random.Random, max_genus=5, max_cones=6, max_order=30) -> OrbifoldSignature:
    n = rnd.randint(0, max_cones)
    return OrbifoldSignature(rnd.randint(0, max_genus), tuple(rnd.randint(2, max_order) for _ in range(n)))


def random_seifert(rnd: random.Random, sig=None) -> SeifertData:
    sig = sig or random_signature(rnd)
    return SeifertData(sig, rnd.randint(-20, 20), tuple(rnd.randint(-40, 40) for _ in sig.cone_orders))


def random_orbit_partition(rnd: random.Random, m: int, d: int):
    """Stabilizer orders whose orbit sizes m/s (divisors of m) sum to d, or None."""
    sizes = [k for k in range(1, m + 1) if m % k == 0 and k <= d]
    rows, left = [], d
    for _ in range(4 * d):
        if left == 0:
            return tuple(sorted(m // o for o in rows))
        options = [k for k in sizes if k <= left]
        rows.append(rnd.choice(options))
        left -= rows[-1]
    return None


def random_covering(rnd: random.Random, max_tries=10_000):
    """(SeifertData, CoveringData) with a consistent orbit decomposition and integral genus."""
    for _ in range(max_tries):
        sig = random_signature(rnd, max_genus=3, max_cones=4, max_order=12)
        d = rnd.randint(1, 12)
        rows = [random_orbit_partition(rnd, m, d) for m in sig.cone_orders]
        if any(r is None for r in rows):
            continue
        cov = CoveringData(d, tuple(rows))
        try:
            covered_signature(sig, cov)
        except NonIntegralGenus:
            continue
        return random_seifert(rnd, sig), cov
    raise RuntimeError("rejection sampling exhausted")


@pytest.fixture
def rnd():
    return random.Random(12345)


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(2024)


def frac(s) -> Fraction:
    return Fraction(s)
