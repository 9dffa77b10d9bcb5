"""Group backends.

``get_group`` / ``get_pairing`` hand out shared instances by name:

* ``"ristretto255"`` -- production group for the single-card scheme
* ``"toy"``          -- order-1019 oracle group (tests only)
* ``"bls12-381"``    -- production pairing triple for the mergeable scheme
* ``"toy-pairing"``  -- oracle pairing triple (tests only)
"""

from __future__ import annotations

from .base import Group, PairingGroups, random_bytes, tagged, wide_hash
from .ristretto import RistrettoGroup
from .toy import SchnorrGroup, ToyPairing, toy_group

_groups: dict[str, Group] = {}
_pairings: dict[str, PairingGroups] = {}


def get_group(name: str) -> Group:
    if name not in _groups:
        if name == "ristretto255":
            _groups[name] = RistrettoGroup()
        elif name == "toy":
            _groups[name] = toy_group()
        else:
            raise ValueError(f"unknown group {name!r}")
    return _groups[name]


def get_pairing(name: str) -> PairingGroups:
    if name not in _pairings:
        if name == "bls12-381":
            from .bls import Bls12381

            _pairings[name] = Bls12381()
        elif name == "toy-pairing":
            _pairings[name] = ToyPairing()
        else:
            raise ValueError(f"unknown pairing {name!r}")
    return _pairings[name]


__all__ = [
    "Group",
    "PairingGroups",
    "RistrettoGroup",
    "SchnorrGroup",
    "ToyPairing",
    "get_group",
    "get_pairing",
    "random_bytes",
    "tagged",
    "toy_group",
    "wide_hash",
]
