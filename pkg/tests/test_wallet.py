import random

import pytest

from punchcard import core, extensions, mergeable, wire
from punchcard.core import RedeemStatus
from punchcard.db import RedeemDb
from punchcard.faults import FaultInjected, FaultPlan
from punchcard.errors import WalletError
from punchcard.groups import get_group, get_pairing
from punchcard.wallet import Wallet


class FakeMainServer:
    """In-process stand-in that speaks the wallet's client interface."""

    def __init__(self, rng, group_name="ristretto255"):
        self.group = get_group(group_name)
        self.rng = rng
        self.sk, pk = core.server_setup(self.group, rng)
        self.pk_bytes = self.group.encode_element(pk)
        self.db = RedeemDb()

    def fetch_pk(self):
        return self.pk_bytes

    def call(self, msg_type, body):
        g = self.group
        if msg_type == wire.PUNCH_REQ:
            card = g.decode_element(body)
            resp = core.server_punch(g, self.sk, card, self.rng)
            return wire.PUNCH_RESP, resp.to_bytes(g)
        if msg_type == wire.MULTI_REQ:
            t, blob = wire.unpack_multi_req(body)
            card = g.decode_element(blob)
            resp = extensions.server_multi_punch(g, self.sk, card, t, rng=self.rng)
            return wire.MULTI_RESP, resp.to_bytes(g)
        if msg_type == wire.REDEEM_REQ:
            count, blob = wire.unpack_redeem_body(body)
            req = core.RedeemRequest.from_bytes(g, blob)
            status = core.server_redeem(g, self.sk, req, count, self.db)
            return wire.REDEEM_RESP, bytes([status.value])
        raise AssertionError(f"unexpected message type {msg_type}")


class FakeMergeServer:
    def __init__(self, rng, pairing_name="toy-pairing"):
        self.pairing = get_pairing(pairing_name)
        self.rng = rng
        self.sk, pk = mergeable.server_setup(self.pairing, rng)
        self.pk_bytes = pk.to_bytes(self.pairing)
        self.db = RedeemDb()

    def fetch_pk(self):
        return self.pk_bytes

    def call(self, msg_type, body):
        pg = self.pairing
        if msg_type == wire.MERGE_PUNCH_REQ:
            card = mergeable.MergeCard.from_bytes(pg, body)
            resp = mergeable.server_punch(pg, self.sk, card, self.rng)
            return wire.MERGE_PUNCH_RESP, resp.to_bytes(pg)
        if msg_type == wire.MERGE_REDEEM_REQ:
            count, blob = wire.unpack_redeem_body(body)
            req = mergeable.MergeRedeemRequest.from_bytes(pg, blob)
            status = mergeable.server_redeem(pg, self.sk, req, count, self.db)
            return wire.MERGE_REDEEM_RESP, bytes([status.value])
        raise AssertionError(f"unexpected message type {msg_type}")


def _wallet(tmp_path, **kw):
    return Wallet(str(tmp_path / "wallet"), **kw)


def test_new_wallet_persists_cards(tmp_path):
    rng = random.Random(151)
    w = _wallet(tmp_path, group_name="toy")
    i = w.new_card(rng)
    j = w.new_card(rng)
    assert (i, j) == (0, 1)
    again = _wallet(tmp_path, group_name="toy")
    assert len(again.cards) == 2
    for a, b in zip(w.cards, again.cards):
        assert a.secret.u == b.secret.u
        assert a.secret.mask == b.secret.mask
        assert w.group.eq(a.element, b.element)
        assert a.count == b.count == 0


def test_rows_show_prefix_not_secret(tmp_path):
    rng = random.Random(152)
    w = _wallet(tmp_path, group_name="toy")
    w.new_card(rng)
    [(idx, prefix, count)] = w.rows()
    assert idx == 0 and count == 0
    assert prefix == w.cards[0].secret.u[:4].hex()
    assert len(prefix) == 8  # 4 bytes, not the whole 32


def test_corrupt_file_raises(tmp_path):
    rng = random.Random(153)
    path = tmp_path / "wallet"
    w = Wallet(str(path), group_name="toy")
    w.new_card(rng)
    data = path.read_bytes()
    path.write_bytes(b"XXXX" + data[4:])
    with pytest.raises(WalletError):
        Wallet(str(path), group_name="toy")
    path.write_bytes(data[:-2])
    with pytest.raises(WalletError):
        Wallet(str(path), group_name="toy")
    path.write_bytes(data + b"\x00")
    with pytest.raises(WalletError):
        Wallet(str(path), group_name="toy")


def test_scheme_mismatch_raises(tmp_path):
    rng = random.Random(154)
    w = _wallet(tmp_path, scheme="mergeable", pairing_name="toy-pairing")
    w.new_card(rng)
    with pytest.raises(WalletError):
        _wallet(tmp_path, scheme="main", group_name="toy")
    with pytest.raises(WalletError):
        Wallet(str(tmp_path / "other"), scheme="sideways")


def test_pk_pinning(tmp_path):
    rng = random.Random(155)
    server = FakeMainServer(rng)
    w = _wallet(tmp_path)
    w.ensure_pk(server)
    assert w.pk_bytes == server.pk_bytes
    # pin survives reload
    again = _wallet(tmp_path)
    assert again.pk_bytes == server.pk_bytes
    # a different server key is a hard failure
    other = FakeMainServer(rng)
    assert other.pk_bytes != server.pk_bytes
    with pytest.raises(WalletError):
        again.ensure_pk(other)


def test_punch_and_redeem_through_fake_server(tmp_path):
    rng = random.Random(156)
    server = FakeMainServer(rng)
    w = _wallet(tmp_path)
    idx = w.new_card(rng)
    for _ in range(3):
        w.punch(server, idx, rng)
    assert w.cards[idx].count == 3
    # state survives a reload mid-card
    w = _wallet(tmp_path)
    gained = w.multi_punch(server, idx, 2, rng)
    assert gained == 2 and w.cards[idx].count == 5
    assert w.redeem(server, idx) is RedeemStatus.ACCEPT
    assert w.cards == []
    assert _wallet(tmp_path).cards == []


def test_redeem_keeps_card_on_rejection(tmp_path):
    rng = random.Random(157)
    server = FakeMainServer(rng)
    w = _wallet(tmp_path)
    idx = w.new_card(rng)
    w.punch(server, idx, rng)
    # wrong count claim: present 1-punch card after the server state moved on
    w.cards[idx].count = 2
    assert w.redeem(server, idx) is RedeemStatus.BAD_CARD
    assert len(w.cards) == 1
    w.cards[idx].count = 1
    assert w.redeem(server, idx) is RedeemStatus.ACCEPT


def test_punch_without_card_raises(tmp_path):
    rng = random.Random(158)
    server = FakeMainServer(rng)
    w = _wallet(tmp_path)
    with pytest.raises(WalletError):
        w.punch(server, 0, rng)


def test_scheme_guards(tmp_path):
    rng = random.Random(159)
    w = _wallet(tmp_path, scheme="mergeable", pairing_name="toy-pairing")
    idx = w.new_card(rng)
    server = FakeMergeServer(rng)
    with pytest.raises(WalletError):
        w.redeem(server, idx)
    with pytest.raises(WalletError):
        w.multi_punch(server, idx, 2, rng)
    w2 = Wallet(str(tmp_path / "m"), group_name="toy")
    w2.new_card(rng)
    with pytest.raises(WalletError):
        w2.merge_redeem(FakeMainServer(rng, "toy"), 0)


def test_merge_redeem_two_cards(tmp_path):
    rng = random.Random(160)
    server = FakeMergeServer(rng)
    w = _wallet(tmp_path, scheme="mergeable", pairing_name="toy-pairing")
    a = w.new_card(rng)
    b = w.new_card(rng)
    for _ in range(2):
        w.punch(server, a, rng)
    w.punch(server, b, rng)
    assert w.merge_redeem(server, a, b, rng) is RedeemStatus.ACCEPT
    assert w.cards == []


def test_merge_redeem_single_card_makes_partner(tmp_path):
    rng = random.Random(161)
    server = FakeMergeServer(rng)
    w = _wallet(tmp_path, scheme="mergeable", pairing_name="toy-pairing")
    a = w.new_card(rng)
    w.punch(server, a, rng)
    assert w.merge_redeem(server, a, rng=rng) is RedeemStatus.ACCEPT
    assert w.cards == []  # the implicit partner is consumed too


def test_merge_redeem_self_merge_rejected(tmp_path):
    rng = random.Random(162)
    w = _wallet(tmp_path, scheme="mergeable", pairing_name="toy-pairing")
    a = w.new_card(rng)
    with pytest.raises(WalletError):
        w.merge_redeem(FakeMergeServer(rng), a, a, rng)


# --- crash safety -------------------------------------------------------------


def test_crash_during_save_keeps_old_file(tmp_path):
    rng = random.Random(163)
    w = _wallet(tmp_path, group_name="toy")
    w.new_card(rng)
    before = (tmp_path / "wallet").read_bytes()
    w.cards[0].count = 7
    for fail_at, point in ((0, "wallet.save.open"), (1, "wallet.save.write"), (2, "wallet.save.replace")):
        with FaultPlan(fail_at=fail_at) as plan:
            with pytest.raises(FaultInjected):
                w.save()
        assert plan.hits[fail_at] == point
        assert (tmp_path / "wallet").read_bytes() == before
    # no injection: the replace goes through
    w.save()
    assert _wallet(tmp_path, group_name="toy").cards[0].count == 7


def test_crash_before_punch_commit_preserves_spendable_card(tmp_path):
    """Crash after the server punched but before the wallet moved: the disk
    still holds the pre-punch card, which the server will happily punch
    again (it is stateless per punch), so nothing is bricked."""
    rng = random.Random(164)
    server = FakeMainServer(rng)
    w = _wallet(tmp_path)
    idx = w.new_card(rng)
    w.punch(server, idx, rng)
    with FaultPlan(fail_at=None) as plan:
        w.punch(server, idx, rng)
    commit_at = plan.hits.index("wallet.punch.commit")
    with FaultPlan(fail_at=commit_at):
        with pytest.raises(FaultInjected):
            w.punch(server, idx, rng)
    again = _wallet(tmp_path)
    assert again.cards[idx].count == 2  # the interrupted punch never landed
    again.punch(server, idx, rng)
    assert again.redeem(server, idx) is RedeemStatus.ACCEPT


def test_crash_after_redeem_accept_cannot_double_accept(tmp_path):
    """Crash between the server's accept and the wallet delete: a replay of
    the same card must come back DOUBLE_SPEND, never a second accept."""
    rng = random.Random(165)
    server = FakeMainServer(rng)
    w = _wallet(tmp_path)
    idx = w.new_card(rng)
    w.punch(server, idx, rng)
    with FaultPlan(fail_at=None) as plan:
        w.redeem(server, idx)
    # that consumed the card; rebuild one to find the commit offset
    assert plan.hits.count("wallet.redeem.commit") == 1
    idx = w.new_card(rng)
    w.punch(server, idx, rng)
    commit_at = plan.hits.index("wallet.redeem.commit")
    with FaultPlan(fail_at=commit_at):
        with pytest.raises(FaultInjected):
            w.redeem(server, idx)
    again = _wallet(tmp_path)
    assert len(again.cards) == 1  # card still in the wallet
    assert again.redeem(server, idx) is RedeemStatus.DOUBLE_SPEND
