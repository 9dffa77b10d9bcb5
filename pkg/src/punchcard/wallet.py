"""Client-side card store and the network flows that mutate it.

One wallet file holds every card for one server: the card secret u, the
current mask(s), the current group element(s), and the punch count. Updates
go through a temp file and os.replace, and the in-memory state only moves
forward after the bytes are durably on disk, so a crash at any point leaves
either the old wallet or the new one, never a half-written file.

The wallet pins the server's public key on first contact. A later punch
response is verified against the pinned key, so a server that rotates keys
mid-card (to tag one customer's punches) produces a hard failure instead of
a silently linkable card.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from typing import List, Optional, Tuple

from . import core, extensions, mergeable, wire
from .core import CardSecret, RedeemStatus
from .errors import InvalidEncoding, WalletError, WireError
from .faults import fault_point
from .groups import Group, PairingGroups, get_group, get_pairing

_MAGIC = b"PCW1"
_SCHEME_MAIN = 0
_SCHEME_MERGE = 1


@dataclass
class MainCard:
    secret: CardSecret
    element: object
    count: int


@dataclass
class MergeCardState:
    secret: mergeable.MergeCardSecret
    card: mergeable.MergeCard
    count: int


class Wallet:
    def __init__(
        self,
        path: str,
        scheme: str = "main",
        group_name: str = "ristretto255",
        pairing_name: str = "bls12-381",
    ):
        self.path = path
        self.scheme = scheme
        if scheme == "main":
            self.group: Group = get_group(group_name)
        elif scheme == "mergeable":
            self.pairing: PairingGroups = get_pairing(pairing_name)
        else:
            raise WalletError(f"unknown scheme {scheme!r}")
        self.pk_bytes: Optional[bytes] = None
        self.cards: List[object] = []
        if os.path.exists(path):
            self._load()

    # -- persistence ---------------------------------------------------------

    def _encode(self) -> bytes:
        out = bytearray(_MAGIC)
        out.append(_SCHEME_MAIN if self.scheme == "main" else _SCHEME_MERGE)
        pk = self.pk_bytes or b""
        out += struct.pack("<H", len(pk)) + pk
        out += struct.pack("<H", len(self.cards))
        for card in self.cards:
            if self.scheme == "main":
                g = self.group
                out += card.secret.u
                out += struct.pack("<I", card.count)
                out += g.encode_scalar(card.secret.mask)
                out += g.encode_element(card.element)
            else:
                pg = self.pairing
                out += card.secret.u
                out += struct.pack("<I", card.count)
                out += pg.g0.encode_scalar(card.secret.mask0)
                out += pg.g1.encode_scalar(card.secret.mask1)
                out += card.card.to_bytes(pg)
        return bytes(out)

    def _load(self) -> None:
        with open(self.path, "rb") as f:
            data = f.read()
        try:
            self._decode(data)
        except (IndexError, struct.error, InvalidEncoding) as e:
            raise WalletError(f"wallet file {self.path} is corrupt: {e}") from None

    def _decode(self, data: bytes) -> None:
        if data[:4] != _MAGIC:
            raise WalletError(f"{self.path} is not a wallet file")
        stored_scheme = "main" if data[4] == _SCHEME_MAIN else "mergeable"
        if stored_scheme != self.scheme:
            raise WalletError(
                f"wallet holds {stored_scheme} cards, opened as {self.scheme}"
            )
        off = 5
        (pk_len,) = struct.unpack_from("<H", data, off)
        off += 2
        self.pk_bytes = data[off : off + pk_len] or None
        if pk_len and len(self.pk_bytes or b"") != pk_len:
            raise WalletError("wallet file truncated in the key section")
        off += pk_len
        (n,) = struct.unpack_from("<H", data, off)
        off += 2
        cards: List[object] = []
        for _ in range(n):
            u = data[off : off + core.SECRET_SIZE]
            off += core.SECRET_SIZE
            (count,) = struct.unpack_from("<I", data, off)
            off += 4
            if self.scheme == "main":
                g = self.group
                mask = g.decode_scalar(data[off : off + g.scalar_size])
                off += g.scalar_size
                element = g.decode_element(data[off : off + g.element_size])
                off += g.element_size
                cards.append(
                    MainCard(secret=CardSecret(u=u, mask=mask), element=element, count=count)
                )
            else:
                pg = self.pairing
                mask0 = pg.g0.decode_scalar(data[off : off + pg.g0.scalar_size])
                off += pg.g0.scalar_size
                mask1 = pg.g1.decode_scalar(data[off : off + pg.g1.scalar_size])
                off += pg.g1.scalar_size
                size = pg.g0.element_size + pg.g1.element_size
                card = mergeable.MergeCard.from_bytes(pg, data[off : off + size])
                off += size
                cards.append(
                    MergeCardState(
                        secret=mergeable.MergeCardSecret(u=u, mask0=mask0, mask1=mask1),
                        card=card,
                        count=count,
                    )
                )
        if off != len(data):
            raise WalletError("trailing bytes after the last card")
        self.cards = cards

    def save(self) -> None:
        data = self._encode()
        tmp = self.path + ".tmp"
        fault_point("wallet.save.open")
        with open(tmp, "wb") as f:
            fault_point("wallet.save.write")
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        fault_point("wallet.save.replace")
        os.replace(tmp, self.path)

    # -- card lifecycle ------------------------------------------------------

    def new_card(self, rng=None) -> int:
        if self.scheme == "main":
            secret, element = core.issue(self.group, rng)
            self.cards.append(MainCard(secret=secret, element=element, count=0))
        else:
            secret, card = mergeable.issue(self.pairing, rng)
            self.cards.append(MergeCardState(secret=secret, card=card, count=0))
        self.save()
        return len(self.cards) - 1

    def _card(self, index: int):
        try:
            return self.cards[index]
        except IndexError:
            raise WalletError(f"no card #{index}") from None

    def rows(self) -> List[Tuple[int, str, int]]:
        """(index, secret prefix for display, punches)."""
        return [
            (i, c.secret.u[:4].hex(), c.count) for i, c in enumerate(self.cards)
        ]

    # -- pinned server key ---------------------------------------------------

    def ensure_pk(self, client) -> None:
        fetched = client.fetch_pk()
        if self.pk_bytes is None:
            self.pk_bytes = fetched
            self.save()
        elif self.pk_bytes != fetched:
            raise WalletError(
                "server public key changed since this wallet was created"
            )

    def _pk(self):
        if self.pk_bytes is None:
            raise WalletError("no server key pinned yet; fetch it first")
        if self.scheme == "main":
            return self.group.decode_element(self.pk_bytes)
        return mergeable.MergePublicKey.from_bytes(self.pairing, self.pk_bytes)

    # -- network flows -------------------------------------------------------

    def punch(self, client, index: int, rng=None) -> None:
        card = self._card(index)
        self.ensure_pk(client)
        if self.scheme == "main":
            g = self.group
            msg_type, body = client.call(
                wire.PUNCH_REQ, g.encode_element(card.element)
            )
            if msg_type != wire.PUNCH_RESP:
                raise WireError(body.decode(errors="replace"))
            resp = core.PunchResponse.from_bytes(g, body)
            new_secret, new_element = core.client_punch(
                g, self._pk(), card.secret, card.element, resp, rng
            )
            fault_point("wallet.punch.commit")
            card.secret, card.element = new_secret, new_element
            card.count += 1
        else:
            pg = self.pairing
            msg_type, body = client.call(
                wire.MERGE_PUNCH_REQ, card.card.to_bytes(pg)
            )
            if msg_type != wire.MERGE_PUNCH_RESP:
                raise WireError(body.decode(errors="replace"))
            resp = mergeable.MergePunchResponse.from_bytes(pg, body)
            new_secret, new_card = mergeable.client_punch(
                pg, self._pk(), card.secret, card.card, resp, rng
            )
            fault_point("wallet.punch.commit")
            card.secret, card.card = new_secret, new_card
            card.count += 1
        self.save()

    def multi_punch(self, client, index: int, t: int, rng=None) -> int:
        if self.scheme != "main":
            raise WalletError("multi-punch runs on the main scheme only")
        card = self._card(index)
        self.ensure_pk(client)
        g = self.group
        msg_type, body = client.call(
            wire.MULTI_REQ, wire.pack_multi_req(t, g.encode_element(card.element))
        )
        if msg_type != wire.MULTI_RESP:
            raise WireError(body.decode(errors="replace"))
        resp = extensions.MultiPunchResponse.from_bytes(g, body)
        new_secret, new_element, gained = extensions.client_multi_punch(
            g, self._pk(), card.secret, card.element, resp, rng
        )
        fault_point("wallet.punch.commit")
        card.secret, card.element = new_secret, new_element
        card.count += gained
        self.save()
        return gained

    def redeem(self, client, index: int) -> RedeemStatus:
        if self.scheme != "main":
            raise WalletError("use merge_redeem for mergeable cards")
        card = self._card(index)
        req = core.client_redeem(self.group, card.secret, card.element)
        msg_type, body = client.call(
            wire.REDEEM_REQ,
            wire.pack_redeem_body(card.count, req.to_bytes(self.group)),
        )
        if msg_type != wire.REDEEM_RESP or not body:
            raise WireError(body.decode(errors="replace"))
        status = RedeemStatus(body[0])
        if status is RedeemStatus.ACCEPT:
            fault_point("wallet.redeem.commit")
            del self.cards[index]
            self.save()
        return status

    def merge_redeem(
        self, client, index_a: int, index_b: Optional[int] = None, rng=None
    ) -> RedeemStatus:
        """Spend two cards as one. With no second card, a fresh zero-punch
        card is created on the spot so a single card can still be redeemed
        through the same message."""
        if self.scheme != "mergeable":
            raise WalletError("merge_redeem needs a mergeable wallet")
        pg = self.pairing
        card_a = self._card(index_a)
        if index_b is None:
            index_b = self.new_card(rng)
        if index_a == index_b:
            raise WalletError("cannot merge a card with itself")
        card_b = self._card(index_b)
        req = mergeable.client_merge_redeem(
            pg, card_a.secret, card_a.card, card_b.secret, card_b.card
        )
        total = card_a.count + card_b.count
        msg_type, body = client.call(
            wire.MERGE_REDEEM_REQ,
            wire.pack_redeem_body(total, req.to_bytes(pg)),
        )
        if msg_type != wire.MERGE_REDEEM_RESP or not body:
            raise WireError(body.decode(errors="replace"))
        status = RedeemStatus(body[0])
        if status is RedeemStatus.ACCEPT:
            fault_point("wallet.redeem.commit")
            for i in sorted((index_a, index_b), reverse=True):
                del self.cards[i]
            self.save()
        return status
