"""Message framing for the client/server loop.

Every message is `length (4 bytes LE) || type (1 byte) || body`, where
length counts the type byte plus the body. Request/response pairs:

    0x01 PUNCH_REQ      card element            -> 0x02 PUNCH_RESP
    0x03 REDEEM_REQ     count (2B LE) || u || card -> 0x04 REDEEM_RESP (status)
    0x05 MULTI_REQ      t (1B) || card          -> 0x06 MULTI_RESP
    0x07 MERGE_PUNCH_REQ  two-sided card        -> 0x08 MERGE_PUNCH_RESP
    0x09 MERGE_REDEEM_REQ count || u_a || u_b || value -> 0x0a MERGE_REDEEM_RESP
    0x10 PK_REQ         empty                   -> 0x11 PK_RESP (public key)
    0x7f ERROR          utf-8 text (server to client, fatal for the request)

The framing layer knows nothing about group elements; bodies are opaque.
"""

from __future__ import annotations

import struct
from typing import Tuple

from .errors import WireError

MAX_FRAME = 1 << 20

PUNCH_REQ = 0x01
PUNCH_RESP = 0x02
REDEEM_REQ = 0x03
REDEEM_RESP = 0x04
MULTI_REQ = 0x05
MULTI_RESP = 0x06
MERGE_PUNCH_REQ = 0x07
MERGE_PUNCH_RESP = 0x08
MERGE_REDEEM_REQ = 0x09
MERGE_REDEEM_RESP = 0x0A
PK_REQ = 0x10
PK_RESP = 0x11
ERROR = 0x7F

_KNOWN = {
    PUNCH_REQ,
    PUNCH_RESP,
    REDEEM_REQ,
    REDEEM_RESP,
    MULTI_REQ,
    MULTI_RESP,
    MERGE_PUNCH_REQ,
    MERGE_PUNCH_RESP,
    MERGE_REDEEM_REQ,
    MERGE_REDEEM_RESP,
    PK_REQ,
    PK_RESP,
    ERROR,
}


def pack_frame(msg_type: int, body: bytes) -> bytes:
    if msg_type not in _KNOWN:
        raise WireError(f"unknown message type 0x{msg_type:02x}")
    if 1 + len(body) > MAX_FRAME:
        raise WireError("frame too large")
    return struct.pack("<I", 1 + len(body)) + bytes([msg_type]) + body


def unpack_frame(data: bytes) -> Tuple[int, bytes, bytes]:
    """Split one frame off the front; returns (type, body, rest)."""
    if len(data) < 5:
        raise WireError("truncated frame header")
    (length,) = struct.unpack_from("<I", data)
    if length < 1 or length > MAX_FRAME:
        raise WireError("bad frame length")
    if len(data) < 4 + length:
        raise WireError("truncated frame body")
    msg_type = data[4]
    if msg_type not in _KNOWN:
        raise WireError(f"unknown message type 0x{msg_type:02x}")
    return msg_type, data[5 : 4 + length], data[4 + length :]


def send_frame(sock, msg_type: int, body: bytes) -> None:
    sock.sendall(pack_frame(msg_type, body))


def _recv_exact(sock, n: int) -> bytes:
    chunks = []
    got = 0
    while got < n:
        chunk = sock.recv(n - got)
        if not chunk:
            raise WireError("connection closed mid-frame")
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)


def recv_frame(sock) -> Tuple[int, bytes]:
    """Blocking read of one frame. Raises WireError on a malformed or
    oversized frame, EOFError on a clean close between frames."""
    header = sock.recv(4)
    if not header:
        raise EOFError
    if len(header) < 4:
        header += _recv_exact(sock, 4 - len(header))
    (length,) = struct.unpack("<I", header)
    if length < 1 or length > MAX_FRAME:
        raise WireError("bad frame length")
    payload = _recv_exact(sock, length)
    msg_type = payload[0]
    if msg_type not in _KNOWN:
        raise WireError(f"unknown message type 0x{msg_type:02x}")
    return msg_type, payload[1:]


def pack_redeem_body(count: int, message: bytes) -> bytes:
    if not 0 <= count < 1 << 16:
        raise WireError("punch count out of range")
    return struct.pack("<H", count) + message


def unpack_redeem_body(body: bytes) -> Tuple[int, bytes]:
    if len(body) < 2:
        raise WireError("redeem body too short")
    (count,) = struct.unpack_from("<H", body)
    return count, body[2:]


def pack_multi_req(t: int, card: bytes) -> bytes:
    if not 1 <= t <= 255:
        raise WireError("multi-punch size out of range")
    return bytes([t]) + card


def unpack_multi_req(body: bytes) -> Tuple[int, bytes]:
    if len(body) < 2:
        raise WireError("multi-punch request too short")
    return body[0], body[1:]
