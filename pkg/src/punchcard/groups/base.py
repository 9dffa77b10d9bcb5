"""Abstract group interface the protocol code is written against.

A Group exposes a prime-order group multiplicatively: ``mul`` is the group
operation, ``exp`` is scalar exponentiation. Scalars are plain ints reduced
mod ``order``. Elements are backend-specific opaque values; only
``encode_element``/``decode_element`` define their byte form.

Two families implement this: production elliptic-curve groups (ristretto255,
and the three BLS12-381 groups used by the mergeable scheme) and tiny
Schnorr subgroups of Z_P^* used as test oracles, where discrete logs are
recoverable by brute force.
"""

from __future__ import annotations

import hashlib
import secrets
from typing import Any, Optional

from ..errors import InvalidEncoding, ZeroInverse

Element = Any


def tagged(tag: str, data: bytes) -> bytes:
    """Unambiguous domain-separated hash input: len(tag) || tag || data."""
    t = tag.encode()
    if not 0 < len(t) < 256:
        raise ValueError("tag must be 1..255 bytes")
    return bytes([len(t)]) + t + data


def wide_hash(tag: str, data: bytes) -> bytes:
    """512-bit digest over a tagged input; callers reduce mod their order."""
    return hashlib.sha512(tagged(tag, data)).digest()


def random_bytes(n: int, rng=None) -> bytes:
    """n random bytes from rng (a random.Random, for tests) or the OS."""
    if rng is None:
        return secrets.token_bytes(n)
    return rng.randbytes(n)


class Group:
    name: str
    order: int
    element_size: int
    scalar_size: int

    # -- element ops -------------------------------------------------------

    def generator(self) -> Element:
        raise NotImplementedError

    def identity(self) -> Element:
        raise NotImplementedError

    def is_identity(self, e: Element) -> bool:
        raise NotImplementedError

    def mul(self, a: Element, b: Element) -> Element:
        """Group operation."""
        raise NotImplementedError

    def exp(self, e: Element, k: int) -> Element:
        """e raised to the scalar k (k taken mod order)."""
        raise NotImplementedError

    def eq(self, a: Element, b: Element) -> bool:
        return self.encode_element(a) == self.encode_element(b)

    # -- encodings ---------------------------------------------------------

    def encode_element(self, e: Element) -> bytes:
        raise NotImplementedError

    def decode_element(self, data: bytes) -> Element:
        """Strict decode; raises InvalidEncoding on anything non-canonical."""
        raise NotImplementedError

    def encode_scalar(self, k: int) -> bytes:
        raise NotImplementedError

    def decode_scalar(self, data: bytes) -> int:
        raise NotImplementedError

    # -- scalars -----------------------------------------------------------

    def random_scalar(self, rng=None) -> int:
        """Uniform in [1, order-1]; zero is excluded so masks and keys are
        always invertible."""
        while True:
            k = int.from_bytes(random_bytes(64, rng), "little") % self.order
            if k != 0:
                return k

    def invert_scalar(self, k: int) -> int:
        k %= self.order
        if k == 0:
            raise ZeroInverse("scalar 0 has no inverse")
        return pow(k, -1, self.order)

    # -- hashing -----------------------------------------------------------

    def hash_to_group(self, tag: str, data: bytes) -> Element:
        """Deterministic map into the group; never the identity, preimage
        discrete log unknown for the production backends."""
        raise NotImplementedError

    def hash_to_scalar(self, tag: str, data: bytes) -> int:
        """Challenge derivation: wide digest reduced mod the group order."""
        return int.from_bytes(wide_hash(tag, data), "big") % self.order


class PairingGroups:
    """Triple of groups of one prime order with a bilinear map g0 x g1 -> gt."""

    name: str
    g0: Group
    g1: Group
    gt: Group

    @property
    def order(self) -> int:
        return self.g0.order

    def pair(self, a: Element, b: Element) -> Element:
        raise NotImplementedError


def check_length(data: bytes, size: int, what: str) -> None:
    if len(data) != size:
        raise InvalidEncoding(f"{what}: expected {size} bytes, got {len(data)}")
