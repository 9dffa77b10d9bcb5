"""Single-card punch-card scheme.

One server holds sk with public key pk = g^sk. A card is a secret
(u, m) held by the client; the server only ever sees blinded values.

    Issue (client):   u <- 32 random bytes, m <- Z_q*, card p = H(u)^m
    Punch:            C -> S: p
                      S -> C: p' = p^sk, proof that log_g(pk) = log_p(p')
                      C: verify proof, pick fresh m', keep p'' = p'^(m'/m)
    Redeem:           C -> S: (u, p^(1/m)) after n punches
                      S: accept iff p^(1/m) == H(u)^(sk^n) and u unused;
                         remember u

Each punch multiplies the hidden exponent by sk, so after n punches the
unmasked card is H(u)^(sk^n). The fresh mask every round makes successive
card values information-theoretically unlinkable; the proof stops a
malicious server from punching with a second key to fingerprint the card.
H must be a proper hash onto the group: if clients could choose p with a
known discrete log relative to older cards, one redeemed card would seed
forgeries of others.

Redemption double-spend protection is the (u, seen-set) check; it needs the
atomic check-and-insert the db module provides.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Optional, Tuple

from . import dleq
from .errors import InvalidEncoding, ProofRejected
from .groups import Group, random_bytes

Element = Any

TAG_CARD_HASH = "punchcard/h2g/v1/main"
TAG_PUNCH_PROOF = "punchcard/dleq/v1"

SECRET_SIZE = 32


@dataclass
class CardSecret:
    """Client-side card state; u never leaves the wallet until redemption."""

    u: bytes
    mask: int


@dataclass(frozen=True)
class PunchResponse:
    punched: Element  # p^sk
    proof: dleq.DleqProof

    def to_bytes(self, group: Group) -> bytes:
        return group.encode_element(self.punched) + self.proof.to_bytes(group)

    @classmethod
    def from_bytes(cls, group: Group, data: bytes) -> "PunchResponse":
        n = group.element_size
        if len(data) != n + dleq.proof_size(group):
            raise InvalidEncoding("punch response has wrong length")
        return cls(
            punched=group.decode_element(data[:n]),
            proof=dleq.proof_from_bytes(group, data[n:]),
        )


@dataclass(frozen=True)
class RedeemRequest:
    u: bytes
    card: Element  # unmasked: H(u)^(sk^n)

    def to_bytes(self, group: Group) -> bytes:
        return self.u + group.encode_element(self.card)

    @classmethod
    def from_bytes(cls, group: Group, data: bytes) -> "RedeemRequest":
        if len(data) != SECRET_SIZE + group.element_size:
            raise InvalidEncoding("redeem request has wrong length")
        return cls(
            u=data[:SECRET_SIZE],
            card=group.decode_element(data[SECRET_SIZE:]),
        )


class RedeemStatus(IntEnum):
    ACCEPT = 0
    BAD_CARD = 1
    DOUBLE_SPEND = 2
    EXPIRED = 3


def server_setup(
    group: Group, rng=None, sk: Optional[int] = None
) -> Tuple[int, Element]:
    """Fresh (sk, pk), or re-derive pk from a stored sk."""
    if sk is None:
        sk = group.random_scalar(rng)
    return sk, group.exp(group.generator(), sk)


def card_base(group: Group, u: bytes) -> Element:
    return group.hash_to_group(TAG_CARD_HASH, u)


def issue(
    group: Group, rng=None, u: Optional[bytes] = None
) -> Tuple[CardSecret, Element]:
    """Create a zero-punch card; no server involvement, nothing sent."""
    if u is None:
        u = random_bytes(SECRET_SIZE, rng)
    if len(u) != SECRET_SIZE:
        raise ValueError(f"card secret must be {SECRET_SIZE} bytes")
    mask = group.random_scalar(rng)
    return CardSecret(u=u, mask=mask), group.exp(card_base(group, u), mask)


def server_punch(
    group: Group, sk: int, card: Element, rng=None
) -> PunchResponse:
    """Apply the key to whatever masked card the client sent, with proof."""
    punched = group.exp(card, sk)
    proof = dleq.prove(group, TAG_PUNCH_PROOF, sk, card, punched, rng)
    return PunchResponse(punched=punched, proof=proof)


def client_punch(
    group: Group,
    pk: Element,
    secret: CardSecret,
    card: Element,
    resp: PunchResponse,
    rng=None,
) -> Tuple[CardSecret, Element]:
    """Verify the punch actually used the server's key, then re-mask.

    Raises ProofRejected (and discards the response) on any mismatch, so a
    tampered or wrong-key punch never reaches the stored card state.
    """
    if not dleq.verify(group, TAG_PUNCH_PROOF, pk, card, resp.punched, resp.proof):
        raise ProofRejected("punch response proof does not verify")
    new_mask = group.random_scalar(rng)
    update = new_mask * group.invert_scalar(secret.mask) % group.order
    return (
        CardSecret(u=secret.u, mask=new_mask),
        group.exp(resp.punched, update),
    )


def client_redeem(group: Group, secret: CardSecret, card: Element) -> RedeemRequest:
    """Strip the mask and reveal the card secret; one-shot by design."""
    return RedeemRequest(
        u=secret.u, card=group.exp(card, group.invert_scalar(secret.mask))
    )


def expected_card(group: Group, sk: int, u: bytes, count: int) -> Element:
    """H(u)^(sk^count); pow() is the square-and-multiply in Z_q."""
    return group.exp(card_base(group, u), pow(sk, count, group.order))


def verify_card(group: Group, sk: int, req: RedeemRequest, count: int) -> bool:
    """The redemption equation alone, no double-spend bookkeeping."""
    if len(req.u) != SECRET_SIZE:
        return False
    return group.eq(req.card, expected_card(group, sk, req.u, count))


def server_redeem(
    group: Group, sk: int, req: RedeemRequest, count: int, db
) -> RedeemStatus:
    """Full redemption: algebra check, then atomic spend of u."""
    if not verify_card(group, sk, req, count):
        return RedeemStatus.BAD_CARD
    if not db.check_and_insert(req.u):
        return RedeemStatus.DOUBLE_SPEND
    return RedeemStatus.ACCEPT
