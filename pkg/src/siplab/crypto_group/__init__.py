from .dlog import MAX_ORDER, DlogOracle, GroupTooLarge, NoSolution, solve_dlog
from .groups import (
    INFINITY,
    CountingGroup,
    EcGroup,
    InvalidGroupParams,
    ModpGroup,
    NotAGroupElement,
    Point,
    power,
    sample_scalar,
)
from .hashing import hash_f, keystream, mask, unmask
from .profiles import PROFILES, STD, TOY, Profile, get_profile, load_profile

__all__ = [
    "INFINITY",
    "MAX_ORDER",
    "PROFILES",
    "STD",
    "TOY",
    "CountingGroup",
    "DlogOracle",
    "EcGroup",
    "GroupTooLarge",
    "InvalidGroupParams",
    "ModpGroup",
    "NoSolution",
    "NotAGroupElement",
    "Point",
    "Profile",
    "get_profile",
    "hash_f",
    "keystream",
    "load_profile",
    "mask",
    "power",
    "sample_scalar",
    "solve_dlog",
    "unmask",
]
