"""Mergeable punch-card scheme over a pairing.

Same punch-and-remask dance as the single-card scheme, run in parallel in
two groups that share one secret key:

    pk = (g0^sk, g1^sk)
    card for secret u: (p0, p1) = (H0(u)^m0, H1(u)^m1)
    punch: both sides exponentiated by sk, one proof per side, and the
           client treats the pair all-or-nothing
    merge-redeem of card A (n_a punches) with card B (n_b punches):
           value = e(p0_A^(1/m0_A), p1_B^(1/m1_B))
                 = e(H0(u_A), H1(u_B))^(sk^(n_a+n_b))
    verify at n = n_a+n_b:
           value == e(H0(u_A)^(sk^n), H1(u_B)), u_A != u_B, both unused

The pairing moves the two cards' punch counts into one exponent, which is
what lets two half-full cards combine into one reward. A single card
redeems by merging with a freshly issued zero-punch partner, so the server
only ever runs the one verify equation (and u != u' holds for free).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Tuple

from . import dleq
from .core import SECRET_SIZE, RedeemStatus
from .errors import InvalidEncoding, ProofRejected
from .groups import PairingGroups, random_bytes

Element = Any

TAG_CARD_HASH_G0 = "punchcard/h2g/v1/merge-g0"
TAG_CARD_HASH_G1 = "punchcard/h2g/v1/merge-g1"
TAG_PUNCH_PROOF_G0 = "punchcard/dleq/v1/g0"
TAG_PUNCH_PROOF_G1 = "punchcard/dleq/v1/g1"


@dataclass
class MergeCardSecret:
    u: bytes
    mask0: int
    mask1: int


@dataclass(frozen=True)
class MergeCard:
    side0: Element
    side1: Element

    def to_bytes(self, pairing: PairingGroups) -> bytes:
        return pairing.g0.encode_element(self.side0) + pairing.g1.encode_element(
            self.side1
        )

    @classmethod
    def from_bytes(cls, pairing: PairingGroups, data: bytes) -> "MergeCard":
        n0 = pairing.g0.element_size
        if len(data) != n0 + pairing.g1.element_size:
            raise InvalidEncoding("mergeable card has wrong length")
        return cls(
            side0=pairing.g0.decode_element(data[:n0]),
            side1=pairing.g1.decode_element(data[n0:]),
        )


@dataclass(frozen=True)
class MergePublicKey:
    pk0: Element
    pk1: Element

    def to_bytes(self, pairing: PairingGroups) -> bytes:
        return pairing.g0.encode_element(self.pk0) + pairing.g1.encode_element(
            self.pk1
        )

    @classmethod
    def from_bytes(cls, pairing: PairingGroups, data: bytes) -> "MergePublicKey":
        n0 = pairing.g0.element_size
        if len(data) != n0 + pairing.g1.element_size:
            raise InvalidEncoding("public key has wrong length")
        return cls(
            pk0=pairing.g0.decode_element(data[:n0]),
            pk1=pairing.g1.decode_element(data[n0:]),
        )


@dataclass(frozen=True)
class MergePunchResponse:
    punched0: Element
    punched1: Element
    proof0: dleq.DleqProof
    proof1: dleq.DleqProof

    def to_bytes(self, pairing: PairingGroups) -> bytes:
        return (
            pairing.g0.encode_element(self.punched0)
            + pairing.g1.encode_element(self.punched1)
            + self.proof0.to_bytes(pairing.g0)
            + self.proof1.to_bytes(pairing.g1)
        )

    @classmethod
    def from_bytes(cls, pairing: PairingGroups, data: bytes) -> "MergePunchResponse":
        g0, g1 = pairing.g0, pairing.g1
        n0, n1 = g0.element_size, g1.element_size
        s0, s1 = dleq.proof_size(g0), dleq.proof_size(g1)
        if len(data) != n0 + n1 + s0 + s1:
            raise InvalidEncoding("mergeable punch response has wrong length")
        off = 0
        punched0 = g0.decode_element(data[off : off + n0])
        off += n0
        punched1 = g1.decode_element(data[off : off + n1])
        off += n1
        proof0 = dleq.proof_from_bytes(g0, data[off : off + s0])
        off += s0
        proof1 = dleq.proof_from_bytes(g1, data[off:])
        return cls(punched0, punched1, proof0, proof1)


@dataclass(frozen=True)
class MergeRedeemRequest:
    u_a: bytes
    u_b: bytes
    value: Element  # in the target group

    def to_bytes(self, pairing: PairingGroups) -> bytes:
        return self.u_a + self.u_b + pairing.gt.encode_element(self.value)

    @classmethod
    def from_bytes(cls, pairing: PairingGroups, data: bytes) -> "MergeRedeemRequest":
        if len(data) != 2 * SECRET_SIZE + pairing.gt.element_size:
            raise InvalidEncoding("merge redeem request has wrong length")
        return cls(
            u_a=data[:SECRET_SIZE],
            u_b=data[SECRET_SIZE : 2 * SECRET_SIZE],
            value=pairing.gt.decode_element(data[2 * SECRET_SIZE :]),
        )


def server_setup(
    pairing: PairingGroups, rng=None, sk: Optional[int] = None
) -> Tuple[int, MergePublicKey]:
    if sk is None:
        sk = pairing.g0.random_scalar(rng)
    return sk, MergePublicKey(
        pk0=pairing.g0.exp(pairing.g0.generator(), sk),
        pk1=pairing.g1.exp(pairing.g1.generator(), sk),
    )


def card_bases(pairing: PairingGroups, u: bytes) -> Tuple[Element, Element]:
    return (
        pairing.g0.hash_to_group(TAG_CARD_HASH_G0, u),
        pairing.g1.hash_to_group(TAG_CARD_HASH_G1, u),
    )


def issue(
    pairing: PairingGroups, rng=None, u: Optional[bytes] = None
) -> Tuple[MergeCardSecret, MergeCard]:
    if u is None:
        u = random_bytes(SECRET_SIZE, rng)
    if len(u) != SECRET_SIZE:
        raise ValueError(f"card secret must be {SECRET_SIZE} bytes")
    mask0 = pairing.g0.random_scalar(rng)
    mask1 = pairing.g1.random_scalar(rng)
    base0, base1 = card_bases(pairing, u)
    return (
        MergeCardSecret(u=u, mask0=mask0, mask1=mask1),
        MergeCard(
            side0=pairing.g0.exp(base0, mask0), side1=pairing.g1.exp(base1, mask1)
        ),
    )


def server_punch(
    pairing: PairingGroups, sk: int, card: MergeCard, rng=None
) -> MergePunchResponse:
    punched0 = pairing.g0.exp(card.side0, sk)
    punched1 = pairing.g1.exp(card.side1, sk)
    return MergePunchResponse(
        punched0=punched0,
        punched1=punched1,
        proof0=dleq.prove(pairing.g0, TAG_PUNCH_PROOF_G0, sk, card.side0, punched0, rng),
        proof1=dleq.prove(pairing.g1, TAG_PUNCH_PROOF_G1, sk, card.side1, punched1, rng),
    )


def client_punch(
    pairing: PairingGroups,
    pk: MergePublicKey,
    secret: MergeCardSecret,
    card: MergeCard,
    resp: MergePunchResponse,
    rng=None,
) -> Tuple[MergeCardSecret, MergeCard]:
    """Both side proofs must verify or the whole response is discarded; a
    half-punched card would let the two sides drift apart."""
    ok0 = dleq.verify(
        pairing.g0, TAG_PUNCH_PROOF_G0, pk.pk0, card.side0, resp.punched0, resp.proof0
    )
    ok1 = dleq.verify(
        pairing.g1, TAG_PUNCH_PROOF_G1, pk.pk1, card.side1, resp.punched1, resp.proof1
    )
    if not (ok0 and ok1):
        raise ProofRejected("mergeable punch proof does not verify")
    new0 = pairing.g0.random_scalar(rng)
    new1 = pairing.g1.random_scalar(rng)
    up0 = new0 * pairing.g0.invert_scalar(secret.mask0) % pairing.g0.order
    up1 = new1 * pairing.g1.invert_scalar(secret.mask1) % pairing.g1.order
    return (
        MergeCardSecret(u=secret.u, mask0=new0, mask1=new1),
        MergeCard(
            side0=pairing.g0.exp(resp.punched0, up0),
            side1=pairing.g1.exp(resp.punched1, up1),
        ),
    )


def client_merge_redeem(
    pairing: PairingGroups,
    secret_a: MergeCardSecret,
    card_a: MergeCard,
    secret_b: MergeCardSecret,
    card_b: MergeCard,
) -> MergeRedeemRequest:
    """Combine card A's first side with card B's second side; punch counts
    add up inside the pairing."""
    side0 = pairing.g0.exp(card_a.side0, pairing.g0.invert_scalar(secret_a.mask0))
    side1 = pairing.g1.exp(card_b.side1, pairing.g1.invert_scalar(secret_b.mask1))
    return MergeRedeemRequest(
        u_a=secret_a.u, u_b=secret_b.u, value=pairing.pair(side0, side1)
    )


def verify_card(
    pairing: PairingGroups, sk: int, req: MergeRedeemRequest, count: int
) -> bool:
    if req.u_a == req.u_b:
        return False
    if len(req.u_a) != SECRET_SIZE or len(req.u_b) != SECRET_SIZE:
        return False
    base0 = pairing.g0.hash_to_group(TAG_CARD_HASH_G0, req.u_a)
    base1 = pairing.g1.hash_to_group(TAG_CARD_HASH_G1, req.u_b)
    expected = pairing.pair(
        pairing.g0.exp(base0, pow(sk, count, pairing.order)), base1
    )
    return pairing.gt.eq(req.value, expected)


def server_redeem(
    pairing: PairingGroups, sk: int, req: MergeRedeemRequest, count: int, db
) -> RedeemStatus:
    """Both secrets are spent together or not at all."""
    if not verify_card(pairing, sk, req, count):
        return RedeemStatus.BAD_CARD
    if not db.check_and_insert(req.u_a, req.u_b):
        return RedeemStatus.DOUBLE_SPEND
    return RedeemStatus.ACCEPT
