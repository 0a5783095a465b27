"""Exact orbibundle invariants and complex hyperbolic Toledo invariants."""

from .errors import *  # noqa: F401,F403
from .orbifold import (  # noqa: F401
    OrbifoldSignature,
    RationalLattice,
    euler_characteristic,
    euler_lattice,
    is_good,
    is_hyperbolic,
)
from .orbibundle import (  # noqa: F401
    CoveringData,
    SeifertData,
    covered_signature,
    euler_number,
    fiber_class,
    lattice_check,
    pullback,
    relative_euler,
    tangent_seifert,
)

__version__ = "0.1.0"
