"""BLS12-381 curve arithmetic and point serialization.

Both curves are short Weierstrass y^2 = x^3 + b with a = 0: E over Fq with
b = 4, and the twist E' over Fq2 with b = 4(1+i). The arithmetic is written
once over a small field-ops shim and instantiated for both fields. Affine
points are (x, y) tuples; None is the point at infinity. Scalar
multiplication runs in Jacobian coordinates.

Serialization follows the common compressed convention for this curve:
big-endian x with three flag bits on the first byte (compressed, infinity,
sign = y is the lexicographically larger root); 48 bytes for E, 96 for E'
with the c1 limb first. decode rejects non-canonical field values, bad
flags, off-curve x, and points outside the order-n subgroup.
"""

from __future__ import annotations

import hashlib

from ...errors import InvalidEncoding
from ..base import tagged
from .fields import (
    F2_ONE,
    F2_ZERO,
    N,
    P,
    XI,
    f2_add,
    f2_eq,
    f2_inv,
    f2_is_zero,
    f2_mul,
    f2_muls,
    f2_neg,
    f2_sqr,
    f2_sqrt,
    f2_sub,
    fq_inv,
    fq_sqrt,
    mpz,
)

# cofactors: h1 for E, and the effective cofactor used to clear E' into the
# order-n subgroup (gcd with n is 1 for both; pinned by the import asserts)
H1 = mpz(0x396C8C005555E1568C00AAAB0000AAAB)
H2_EFF = mpz(int(
    "BC69F08F2EE75B3584C6A0EA91B352888E2A8E9145AD7689986FF031508FFE13"
    "29C2F178731DB956D82BF015D1212B02EC0EC69D7477C1AE954CBC06689F6A35"
    "9894C0ADEBBF6B4E8020005AAA95551", 16
))


class _FqOps:
    zero = mpz(0)
    one = mpz(1)

    @staticmethod
    def add(a, b):
        return (a + b) % P

    @staticmethod
    def sub(a, b):
        return (a - b) % P

    @staticmethod
    def neg(a):
        return (-a) % P

    @staticmethod
    def mul(a, b):
        return a * b % P

    @staticmethod
    def sqr(a):
        return a * a % P

    @staticmethod
    def muls(a, s):
        return a * s % P

    inv = staticmethod(fq_inv)

    @staticmethod
    def eq(a, b):
        return a == b

    @staticmethod
    def is_zero(a):
        return a == 0


class _Fq2Ops:
    zero = F2_ZERO
    one = F2_ONE
    add = staticmethod(f2_add)
    sub = staticmethod(f2_sub)
    neg = staticmethod(f2_neg)
    mul = staticmethod(f2_mul)
    sqr = staticmethod(f2_sqr)
    inv = staticmethod(f2_inv)
    eq = staticmethod(f2_eq)
    is_zero = staticmethod(f2_is_zero)

    @staticmethod
    def muls(a, s):
        return f2_muls(a, s)


class Curve:
    """y^2 = x^3 + b over the field F; points affine (x, y) or None."""

    def __init__(self, F, b):
        self.F = F
        self.b = b

    def is_on_curve(self, pt) -> bool:
        if pt is None:
            return True
        x, y = pt
        F = self.F
        return F.eq(F.sqr(y), F.add(F.mul(F.sqr(x), x), self.b))

    def neg(self, pt):
        if pt is None:
            return None
        return (pt[0], self.F.neg(pt[1]))

    def add(self, p1, p2):
        if p1 is None:
            return p2
        if p2 is None:
            return p1
        F = self.F
        x1, y1 = p1
        x2, y2 = p2
        if F.eq(x1, x2):
            if F.eq(y1, y2) and not F.is_zero(y1):
                return self.double(p1)
            return None
        lam = F.mul(F.sub(y2, y1), F.inv(F.sub(x2, x1)))
        x3 = F.sub(F.sub(F.sqr(lam), x1), x2)
        return (x3, F.sub(F.mul(lam, F.sub(x1, x3)), y1))

    def double(self, pt):
        if pt is None or self.F.is_zero(pt[1]):
            return None
        F = self.F
        x, y = pt
        lam = F.mul(F.muls(F.sqr(x), 3), F.inv(F.muls(y, 2)))
        x3 = F.sub(F.sqr(lam), F.muls(x, 2))
        return (x3, F.sub(F.mul(lam, F.sub(x, x3)), y))

    def mul(self, pt, k: int):
        """Scalar multiplication, Jacobian double-and-add."""
        k = int(k)
        if k < 0:
            return self.mul(self.neg(pt), -k)
        if k == 0 or pt is None:
            return None
        F = self.F
        x2, y2 = pt  # fixed affine addend
        X = Y = Z = None  # accumulator starts at infinity
        for bit in bin(k)[2:]:
            if Z is not None:
                # dbl-2009-l, a = 0
                A = F.sqr(X)
                B = F.sqr(Y)
                C = F.sqr(B)
                D = F.muls(F.sub(F.sub(F.sqr(F.add(X, B)), A), C), 2)
                E = F.muls(A, 3)
                Fv = F.sqr(E)
                X3 = F.sub(Fv, F.muls(D, 2))
                Y3 = F.sub(F.mul(E, F.sub(D, X3)), F.muls(C, 8))
                Z3 = F.muls(F.mul(Y, Z), 2)
                X, Y, Z = X3, Y3, Z3
            if bit == "1":
                if Z is None:
                    X, Y, Z = x2, y2, F.one
                elif F.is_zero(Z):
                    X, Y, Z = x2, y2, F.one
                else:
                    # mixed Jacobian + affine addition
                    Z1Z1 = F.sqr(Z)
                    U2 = F.mul(x2, Z1Z1)
                    S2 = F.mul(F.mul(y2, Z), Z1Z1)
                    H = F.sub(U2, X)
                    R = F.sub(S2, Y)
                    if F.is_zero(H):
                        if F.is_zero(R):
                            # point doubling via the generic path
                            A = F.sqr(X)
                            B = F.sqr(Y)
                            C = F.sqr(B)
                            D = F.muls(F.sub(F.sub(F.sqr(F.add(X, B)), A), C), 2)
                            E = F.muls(A, 3)
                            Fv = F.sqr(E)
                            X3 = F.sub(Fv, F.muls(D, 2))
                            Y3 = F.sub(F.mul(E, F.sub(D, X3)), F.muls(C, 8))
                            Z3 = F.muls(F.mul(Y, Z), 2)
                            X, Y, Z = X3, Y3, Z3
                        else:
                            X, Y, Z = F.zero, F.one, F.zero  # infinity
                    else:
                        HH = F.sqr(H)
                        HHH = F.mul(H, HH)
                        V = F.mul(X, HH)
                        X3 = F.sub(F.sub(F.sqr(R), HHH), F.muls(V, 2))
                        Y3 = F.sub(F.mul(R, F.sub(V, X3)), F.mul(Y, HHH))
                        Z3 = F.mul(Z, H)
                        X, Y, Z = X3, Y3, Z3
        if Z is None or F.is_zero(Z):
            return None
        zinv = F.inv(Z)
        zinv2 = F.sqr(zinv)
        return (F.mul(X, zinv2), F.mul(F.mul(Y, zinv2), zinv))


B1 = mpz(4)
B2 = (mpz(4), mpz(4))  # 4 * (1 + i)

curve_g1 = Curve(_FqOps, B1)
curve_g2 = Curve(_Fq2Ops, B2)

G1_GEN = (
    mpz(int(
        "17F1D3A73197D7942695638C4FA9AC0FC3688C4F9774B905A14E3A3F171BAC58"
        "6C55E83FF97A1AEFFB3AF00ADB22C6BB", 16)),
    mpz(int(
        "08B3F481E3AAA0F1A09E30ED741D8AE4FCF5E095D5D00AF600DB18CB2C04B3ED"
        "D03CC744A2888AE40CAA232946C5E7E1", 16)),
)
G2_GEN = (
    (
        mpz(int(
            "024AA2B2F08F0A91260805272DC51051C6E47AD4FA403B02B4510B647AE3D177"
            "0BAC0326A805BBEFD48056C8C121BDB8", 16)),
        mpz(int(
            "13E02B6052719F607DACD3A088274F65596BD0D09920B61AB5DA61BBDC7F5049"
            "334CF11213945D57E5AC7D055D042B7E", 16)),
    ),
    (
        mpz(int(
            "0CE5D527727D6E118CC9CDC6DA2E351AADFD9BAA8CBDD3A76D429A695160D12C"
            "923AC9CC3BACA289E193548608B82801", 16)),
        mpz(int(
            "0606C4A02EA734CC32ACD2B02BC28B99CB3E287E85A763AF267492AB572E99AB"
            "3F370D275CEC1DA1AAA9075FF05F79BE", 16)),
    ),
)

assert curve_g1.is_on_curve(G1_GEN)
assert curve_g2.is_on_curve(G2_GEN)


def in_subgroup_g1(pt) -> bool:
    return curve_g1.mul(pt, N) is None


def in_subgroup_g2(pt) -> bool:
    return curve_g2.mul(pt, N) is None


# ---------------------------------------------------------------------------
# serialization

_FLAG_COMPRESSED = 0x80
_FLAG_INFINITY = 0x40
_FLAG_SIGN = 0x20


def _y_is_larger_fq(y) -> bool:
    return y > (P - y) % P


def _y_is_larger_fq2(y) -> bool:
    neg = f2_neg(y)
    return (int(y[1]), int(y[0])) > (int(neg[1]), int(neg[0]))


def g1_to_bytes(pt) -> bytes:
    if pt is None:
        return bytes([_FLAG_COMPRESSED | _FLAG_INFINITY]) + bytes(47)
    x, y = pt
    out = bytearray(int(x).to_bytes(48, "big"))
    out[0] |= _FLAG_COMPRESSED
    if _y_is_larger_fq(y):
        out[0] |= _FLAG_SIGN
    return bytes(out)


def g1_from_bytes(data: bytes, subgroup_check: bool = True):
    if len(data) != 48:
        raise InvalidEncoding("compressed E point must be 48 bytes")
    flags = data[0]
    if not flags & _FLAG_COMPRESSED:
        raise InvalidEncoding("uncompressed form not accepted")
    if flags & _FLAG_INFINITY:
        if flags != (_FLAG_COMPRESSED | _FLAG_INFINITY) or any(data[1:]):
            raise InvalidEncoding("malformed infinity encoding")
        return None
    x = mpz(int.from_bytes(bytes([flags & 0x1F]) + data[1:], "big"))
    if x >= P:
        raise InvalidEncoding("x coordinate out of range")
    try:
        y = fq_sqrt((x * x % P * x + B1) % P)
    except ValueError:
        raise InvalidEncoding("x is not on the curve") from None
    if bool(flags & _FLAG_SIGN) != _y_is_larger_fq(y):
        y = (-y) % P
    pt = (x, y)
    if subgroup_check and not in_subgroup_g1(pt):
        raise InvalidEncoding("point not in the prime-order subgroup")
    return pt


def g2_to_bytes(pt) -> bytes:
    if pt is None:
        return bytes([_FLAG_COMPRESSED | _FLAG_INFINITY]) + bytes(95)
    (x0, x1), y = pt
    out = bytearray(int(x1).to_bytes(48, "big") + int(x0).to_bytes(48, "big"))
    out[0] |= _FLAG_COMPRESSED
    if _y_is_larger_fq2(y):
        out[0] |= _FLAG_SIGN
    return bytes(out)


def g2_from_bytes(data: bytes, subgroup_check: bool = True):
    if len(data) != 96:
        raise InvalidEncoding("compressed twist point must be 96 bytes")
    flags = data[0]
    if not flags & _FLAG_COMPRESSED:
        raise InvalidEncoding("uncompressed form not accepted")
    if flags & _FLAG_INFINITY:
        if flags != (_FLAG_COMPRESSED | _FLAG_INFINITY) or any(data[1:]):
            raise InvalidEncoding("malformed infinity encoding")
        return None
    x1 = int.from_bytes(bytes([flags & 0x1F]) + data[1:48], "big")
    x0 = int.from_bytes(data[48:], "big")
    if x0 >= P or x1 >= P:
        raise InvalidEncoding("x coordinate out of range")
    x = (mpz(x0), mpz(x1))
    try:
        y = f2_sqrt(f2_add(f2_mul(f2_sqr(x), x), B2))
    except ValueError:
        raise InvalidEncoding("x is not on the twist") from None
    if bool(flags & _FLAG_SIGN) != _y_is_larger_fq2(y):
        y = f2_neg(y)
    pt = (x, y)
    if subgroup_check and not in_subgroup_g2(pt):
        raise InvalidEncoding("point not in the prime-order subgroup")
    return pt


# ---------------------------------------------------------------------------
# hash to curve: wide-digest try-and-increment, then cofactor clearing.
# Each counter value derives fresh 512-bit field candidates; non-squares are
# rejected and the counter bumped, so the output is deterministic, never the
# identity, and its discrete log is not revealed.


def _field_candidate(msg: bytes, ctr: int, idx: int):
    h = hashlib.sha512(msg + bytes([ctr, idx])).digest()
    return mpz(int.from_bytes(h, "big") % P)


def hash_to_g1(tag: str, data: bytes):
    msg = tagged(tag, data)
    for ctr in range(256):
        x = _field_candidate(msg, ctr, 0)
        try:
            y = fq_sqrt((x * x % P * x + B1) % P)
        except ValueError:
            continue
        if hashlib.sha512(msg + bytes([ctr, 1])).digest()[0] & 1:
            y = (-y) % P
        pt = curve_g1.mul((x, y), H1)
        if pt is not None:
            return pt
    raise RuntimeError("hash_to_g1 failed to find a point (unreachable)")


def hash_to_g2(tag: str, data: bytes):
    msg = tagged(tag, data)
    for ctr in range(256):
        x = (_field_candidate(msg, ctr, 0), _field_candidate(msg, ctr, 1))
        try:
            y = f2_sqrt(f2_add(f2_mul(f2_sqr(x), x), B2))
        except ValueError:
            continue
        if hashlib.sha512(msg + bytes([ctr, 2])).digest()[0] & 1:
            y = f2_neg(y)
        pt = curve_g2.mul((x, y), H2_EFF)
        if pt is not None:
            return pt
    raise RuntimeError("hash_to_g2 failed to find a point (unreachable)")
