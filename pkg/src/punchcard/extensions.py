"""Extensions over the single-card scheme.

* multi-punch: one response carries p^sk, p^(sk^2), ..., p^(sk^t), each
  step proven against the previous element, so a purchase can earn t
  punches in one round trip for the price of one message.
* expiring secrets: the first 4 bytes of u encode an expiry date (days
  since 1970-01-01, big-endian, always a calendar-quarter boundary), which
  lets the server refuse stale cards and purge the spent-secret set.
* claim proofs: a card issued with u = H(rs) can be redeemed online and the
  reward picked up later by showing rs; the server never learns rs early.
* ticketing: several independent counters ("slots") bound to one secret,
  punched per-slot and redeemed together.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Any, Dict, List, Optional, Tuple

from . import core, dleq
from .core import SECRET_SIZE, CardSecret, RedeemStatus
from .errors import (
    BadExpiry,
    InvalidEncoding,
    NoSuchRedemption,
    PromotionTooLarge,
    ProofRejected,
)
from .groups import Group, random_bytes, tagged

Element = Any

DEFAULT_T_MAX = 10
DEFAULT_HORIZON_QUARTERS = 8

TAG_CLAIM = "punchcard/rs/v1"
TAG_TICKET_PREFIX = "punchcard/ticket/v1/"

_EPOCH = date(1970, 1, 1)
_QUARTER_MONTHS = (1, 4, 7, 10)


# ---------------------------------------------------------------------------
# multi-punch


@dataclass(frozen=True)
class MultiPunchResponse:
    """Chain [p^sk, p^(sk^2), ...]; proof i ties element i to element i-1
    (element -1 being the submitted card)."""

    steps: List[Tuple[Element, dleq.DleqProof]]

    def to_bytes(self, group: Group) -> bytes:
        out = bytearray([len(self.steps)])
        for element, proof in self.steps:
            out += group.encode_element(element)
            out += proof.to_bytes(group)
        return bytes(out)

    @classmethod
    def from_bytes(cls, group: Group, data: bytes) -> "MultiPunchResponse":
        if not data:
            raise InvalidEncoding("empty multi-punch response")
        t = data[0]
        step = group.element_size + dleq.proof_size(group)
        if len(data) != 1 + t * step:
            raise InvalidEncoding("multi-punch response has wrong length")
        steps = []
        for i in range(t):
            off = 1 + i * step
            steps.append(
                (
                    group.decode_element(data[off : off + group.element_size]),
                    dleq.proof_from_bytes(
                        group, data[off + group.element_size : off + step]
                    ),
                )
            )
        return cls(steps=steps)


def server_multi_punch(
    group: Group,
    sk: int,
    card: Element,
    t: int,
    t_max: int = DEFAULT_T_MAX,
    rng=None,
) -> MultiPunchResponse:
    if not 1 <= t <= min(t_max, 255):
        raise PromotionTooLarge(f"punch count {t} outside [1, {min(t_max, 255)}]")
    steps = []
    prev = card
    for _ in range(t):
        nxt = group.exp(prev, sk)
        proof = dleq.prove(group, core.TAG_PUNCH_PROOF, sk, prev, nxt, rng)
        steps.append((nxt, proof))
        prev = nxt
    return MultiPunchResponse(steps=steps)


def client_multi_punch(
    group: Group,
    pk: Element,
    secret: CardSecret,
    card: Element,
    resp: MultiPunchResponse,
    rng=None,
) -> Tuple[CardSecret, Element, int]:
    """Verify the whole chain, then re-mask off the last element. Returns
    the new state plus how many punches were gained."""
    if not resp.steps:
        raise ProofRejected("multi-punch response contains no punches")
    prev = card
    for element, proof in resp.steps:
        if not dleq.verify(group, core.TAG_PUNCH_PROOF, pk, prev, element, proof):
            raise ProofRejected("multi-punch chain proof does not verify")
        prev = element
    new_mask = group.random_scalar(rng)
    update = new_mask * group.invert_scalar(secret.mask) % group.order
    return (
        CardSecret(u=secret.u, mask=new_mask),
        group.exp(prev, update),
        len(resp.steps),
    )


# ---------------------------------------------------------------------------
# expiring card secrets


def quarter_boundary_on_or_after(day: date) -> date:
    """The first quarter boundary >= day."""
    for month in _QUARTER_MONTHS:
        if (day.month, day.day) <= (month, 1):
            return date(day.year, month, 1)
    return date(day.year + 1, 1, 1)


def add_quarters(boundary: date, quarters: int) -> date:
    idx = _QUARTER_MONTHS.index(boundary.month) + quarters
    return date(boundary.year + idx // 4, _QUARTER_MONTHS[idx % 4], 1)


def expiry_code(boundary: date) -> int:
    if boundary.day != 1 or boundary.month not in _QUARTER_MONTHS:
        raise BadExpiry(f"{boundary} is not a quarter boundary")
    return (boundary - _EPOCH).days


def code_to_date(code: int) -> date:
    return _EPOCH + timedelta(days=code)


def make_expiring_secret(expires: date, rng=None) -> bytes:
    """u = expiry code (4 bytes big-endian) || 28 random bytes."""
    return expiry_code(expires).to_bytes(4, "big") + random_bytes(
        SECRET_SIZE - 4, rng
    )


def embedded_expiry(u: bytes) -> date:
    code = int.from_bytes(u[:4], "big")
    try:
        return code_to_date(code)
    except OverflowError:
        # a hostile prefix must fail closed, not crash date arithmetic
        raise BadExpiry(f"embedded expiry code {code} out of range") from None


def check_expiry(
    u: bytes, today: date, horizon_quarters: int = DEFAULT_HORIZON_QUARTERS
) -> None:
    """Raises BadExpiry unless u carries a quarter boundary in
    [today, today + horizon]."""
    expiry = embedded_expiry(u)
    if expiry.day != 1 or expiry.month not in _QUARTER_MONTHS:
        raise BadExpiry(f"embedded expiry {expiry} is not a quarter boundary")
    if expiry < today:
        raise BadExpiry(f"card expired on {expiry}")
    limit = add_quarters(quarter_boundary_on_or_after(today), horizon_quarters)
    if expiry > limit:
        raise BadExpiry(f"expiry {expiry} beyond the {horizon_quarters}-quarter horizon")


def issue_expiring(
    group: Group, expires: date, rng=None
) -> Tuple[CardSecret, Element]:
    return core.issue(group, rng, u=make_expiring_secret(expires, rng))


def purge_expired(db, today: date) -> int:
    """Drop spent secrets whose embedded expiry is strictly before today.
    Only valid when every secret in the store is expiry-encoded; the
    caller's config is responsible for that."""
    cutoff = (today - _EPOCH).days
    return db.purge(lambda u: int.from_bytes(u[:4], "big") < cutoff)


# ---------------------------------------------------------------------------
# claim proofs (redeem online, pick up in person)


def make_claim_secret(rng=None) -> Tuple[bytes, bytes]:
    """Returns (rs, u) with u = H(rs); issue the card with this u."""
    rs = random_bytes(32, rng)
    return rs, claim_to_secret(rs)


def claim_to_secret(rs: bytes) -> bytes:
    return hashlib.sha256(tagged(TAG_CLAIM, rs)).digest()


def register_claim(db, u: bytes) -> None:
    """Record an accepted redemption as awaiting pickup."""
    db.add_claim(u)


def claim(db, rs: bytes) -> bytes:
    """Present rs; consumes the pending claim or raises NoSuchRedemption."""
    u = claim_to_secret(rs)
    if not db.take_claim(u):
        raise NoSuchRedemption("no unclaimed redemption matches this secret")
    return u


# ---------------------------------------------------------------------------
# ticketing: named slots over one secret


@dataclass
class TicketSecret:
    u: bytes
    masks: Dict[str, int]
    counts: Dict[str, int]


@dataclass(frozen=True)
class TicketCard:
    slots: Dict[str, Element]


@dataclass(frozen=True)
class TicketRedeemRequest:
    u: bytes
    slots: List[Tuple[str, int, Element]]  # (name, claimed count, unmasked)


def _slot_tag(name: str) -> str:
    return TAG_TICKET_PREFIX + name


def issue_ticket(
    group: Group, slot_names: List[str], rng=None
) -> Tuple[TicketSecret, TicketCard]:
    if len(set(slot_names)) != len(slot_names):
        raise ValueError("slot names must be distinct")
    u = random_bytes(SECRET_SIZE, rng)
    masks, slots = {}, {}
    for name in slot_names:
        m = group.random_scalar(rng)
        masks[name] = m
        slots[name] = group.exp(group.hash_to_group(_slot_tag(name), u), m)
    return (
        TicketSecret(u=u, masks=masks, counts={n: 0 for n in slot_names}),
        TicketCard(slots=slots),
    )


def server_punch_ticket(
    group: Group,
    sk: int,
    card: TicketCard,
    plan: Dict[str, int],
    t_max: int = DEFAULT_T_MAX,
    rng=None,
) -> Dict[str, MultiPunchResponse]:
    """One multi-attribute punch: every named slot gets its own chain."""
    out = {}
    for name, t in plan.items():
        if name not in card.slots:
            raise ValueError(f"unknown slot {name!r}")
        out[name] = server_multi_punch(group, sk, card.slots[name], t, t_max, rng)
    return out


def client_punch_ticket(
    group: Group,
    pk: Element,
    secret: TicketSecret,
    card: TicketCard,
    responses: Dict[str, MultiPunchResponse],
    rng=None,
) -> Tuple[TicketSecret, TicketCard]:
    """Per-slot chain verification and re-masking; untouched slots keep
    their old mask and value."""
    new_masks = dict(secret.masks)
    new_counts = dict(secret.counts)
    new_slots = dict(card.slots)
    for name, resp in responses.items():
        if name not in card.slots:
            raise ProofRejected(f"response for unknown slot {name!r}")
        fake = CardSecret(u=secret.u, mask=secret.masks[name])
        updated, element, gained = client_multi_punch(
            group, pk, fake, card.slots[name], resp, rng
        )
        new_masks[name] = updated.mask
        new_counts[name] += gained
        new_slots[name] = element
    return (
        TicketSecret(u=secret.u, masks=new_masks, counts=new_counts),
        TicketCard(slots=new_slots),
    )


def client_redeem_ticket(
    group: Group, secret: TicketSecret, card: TicketCard
) -> TicketRedeemRequest:
    slots = []
    for name in sorted(card.slots):
        inv = group.invert_scalar(secret.masks[name])
        slots.append(
            (name, secret.counts[name], group.exp(card.slots[name], inv))
        )
    return TicketRedeemRequest(u=secret.u, slots=slots)


def verify_ticket(group: Group, sk: int, req: TicketRedeemRequest) -> bool:
    if len(req.u) != SECRET_SIZE or not req.slots:
        return False
    for name, count, element in req.slots:
        base = group.hash_to_group(_slot_tag(name), req.u)
        if not group.eq(element, group.exp(base, pow(sk, count, group.order))):
            return False
    return True


def server_redeem_ticket(
    group: Group, sk: int, req: TicketRedeemRequest, db
) -> RedeemStatus:
    if not verify_ticket(group, sk, req):
        return RedeemStatus.BAD_CARD
    if not db.check_and_insert(req.u):
        return RedeemStatus.DOUBLE_SPEND
    return RedeemStatus.ACCEPT
