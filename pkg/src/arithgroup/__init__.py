"""Exact computation with arithmetic subgroups of SL(n, Z) containing a known
principal congruence subgroup, and with matrix groups over Z/mZ."""

from .arithz import (
    GroupZ,
    HElement,
    elementary_generators,
    gamma_m_generators,
    index_z,
    is_member_z,
    level_z,
    lift_det_one,
    max_pcs_z,
    sl_generators,
)
from .exactmat import IntMat, ResMat
from .orbitstab import orbit_gamma, orbit_gamma_m, orbit_h, stabilizer_h
from .rationalize import RatMat, conjugate_into_slnz
from .words import Word
from .zmgroup import GroupZm, StabChain, order

__all__ = [
    "GroupZ", "GroupZm", "HElement", "IntMat", "RatMat", "ResMat", "StabChain", "Word",
    "conjugate_into_slnz", "elementary_generators", "gamma_m_generators", "index_z",
    "is_member_z", "level_z", "lift_det_one", "max_pcs_z", "orbit_gamma", "orbit_gamma_m",
    "orbit_h", "order", "sl_generators", "stabilizer_h",
]

__version__ = "0.1.0"
