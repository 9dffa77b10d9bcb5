"""Group-interface adapters over the BLS12-381 implementation.

The mergeable scheme sees three groups of prime order n: the 48-byte base
curve group, the 96-byte twist group, and the 576-byte target group inside
Fq12, tied together by the bilinear pairing.
"""

from __future__ import annotations

from ...errors import InvalidEncoding
from ..base import Group, PairingGroups, check_length
from . import curve, pairing
from .fields import (
    F12_ONE,
    N,
    P,
    f2,
    f12_eq,
    f12_from_flat,
    f12_mul,
    f12_pow,
    f12_to_flat,
    mpz,
)


class _BlsScalars:
    """Shared scalar conventions: 32-byte big-endian, order n."""

    order = int(N)
    scalar_size = 32

    def encode_scalar(self, k: int) -> bytes:
        return (k % self.order).to_bytes(32, "big")

    def decode_scalar(self, data: bytes) -> int:
        check_length(data, 32, f"{self.name} scalar")
        k = int.from_bytes(data, "big")
        if k >= self.order:
            raise InvalidEncoding("non-canonical scalar (>= group order)")
        return k


class BlsG0(_BlsScalars, Group):
    """The base-curve group (48-byte compressed elements)."""

    name = "bls12-381-g0"
    element_size = 48

    def generator(self):
        return curve.G1_GEN

    def identity(self):
        return None

    def is_identity(self, e) -> bool:
        return e is None

    def mul(self, a, b):
        return curve.curve_g1.add(a, b)

    def exp(self, e, k: int):
        return curve.curve_g1.mul(e, k % self.order)

    def eq(self, a, b) -> bool:
        return a == b

    def encode_element(self, e) -> bytes:
        return curve.g1_to_bytes(e)

    def decode_element(self, data: bytes):
        return curve.g1_from_bytes(bytes(data))

    def hash_to_group(self, tag: str, data: bytes):
        return curve.hash_to_g1(tag, data)


class BlsG1(_BlsScalars, Group):
    """The twist group (96-byte compressed elements)."""

    name = "bls12-381-g1"
    element_size = 96

    def generator(self):
        return curve.G2_GEN

    def identity(self):
        return None

    def is_identity(self, e) -> bool:
        return e is None

    def mul(self, a, b):
        return curve.curve_g2.add(a, b)

    def exp(self, e, k: int):
        return curve.curve_g2.mul(e, k % self.order)

    def eq(self, a, b) -> bool:
        return a == b

    def encode_element(self, e) -> bytes:
        return curve.g2_to_bytes(e)

    def decode_element(self, data: bytes):
        return curve.g2_from_bytes(bytes(data))

    def hash_to_group(self, tag: str, data: bytes):
        return curve.hash_to_g2(tag, data)


class BlsGt(_BlsScalars, Group):
    """The pairing target group: order-n subgroup of Fq12, 576-byte
    elements (12 base-field coefficients, big-endian)."""

    name = "bls12-381-gt"
    element_size = 576

    def generator(self):
        return pairing.gt_generator()

    def identity(self):
        return F12_ONE

    def is_identity(self, e) -> bool:
        return f12_eq(e, F12_ONE)

    def mul(self, a, b):
        return f12_mul(a, b)

    def exp(self, e, k: int):
        return f12_pow(e, k % self.order)

    def eq(self, a, b) -> bool:
        return f12_eq(a, b)

    def encode_element(self, e) -> bytes:
        out = bytearray()
        for c in f12_to_flat(e):
            out += int(c[0]).to_bytes(48, "big")
            out += int(c[1]).to_bytes(48, "big")
        return bytes(out)

    def decode_element(self, data: bytes):
        check_length(data, 576, "gt element")
        coeffs = []
        for off in range(0, 576, 96):
            a = int.from_bytes(data[off : off + 48], "big")
            b = int.from_bytes(data[off + 48 : off + 96], "big")
            if a >= P or b >= P:
                raise InvalidEncoding("gt coefficient out of range")
            coeffs.append(f2(a, b))
        e = f12_from_flat(coeffs)
        # membership: the element's order must divide n
        if not f12_eq(f12_pow(e, self.order), F12_ONE):
            raise InvalidEncoding("element not in the order-n subgroup of Fq12")
        return e

    def hash_to_group(self, tag: str, data: bytes):
        raise NotImplementedError(
            "hashing into the target group is not defined for this scheme"
        )


class Bls12381(PairingGroups):
    name = "bls12-381"

    def __init__(self):
        self.g0 = BlsG0()
        self.g1 = BlsG1()
        self.gt = BlsGt()

    def pair(self, a, b):
        return pairing.pairing(a, b)
