"""Optimal ate pairing for BLS12-381.

The Miller loop keeps the twist point in affine Fq2 coordinates and embeds
each line into Fq12 sparsely. With the tower w^6 = xi and the untwist
(x, y) -> (x/w^2, y/w^3), the line through a twist point (xt, yt) with slope
lam, evaluated at a base-curve point (xp, yp) and scaled by the harmless
subfield unit xi, is

    xi*yp  +  (lam*xt - yt) w^3  -  (lam*xp) w^5

which is what `_line` below packs. The loop parameter is negative for this
curve, so the Miller value is conjugated before the final exponentiation.

The final exponentiation's hard part uses the chain
(x-1)^2 (x+p) (x^2+p^2-1) + 3 == 3 (p^4-p^2+1)/n  (verified as integers in
fields.py's pins), i.e. it computes the cube of the textbook pairing; that
is still a bilinear non-degenerate map since gcd(3, n) = 1, and tests
cross-check it against `final_exp_slow`, the literal pow() oracle.
"""

from __future__ import annotations

from .curve import G1_GEN, G2_GEN
from .fields import (
    F12_ONE,
    N,
    P,
    X_PARAM,
    f2_inv,
    f2_mul,
    f2_muls,
    f2_neg,
    f2_sqr,
    f2_sub,
    f12_conj,
    f12_frob,
    f12_frob2,
    f12_inv,
    f12_line,
    f12_mul,
    f12_pow,
    f12_sqr,
)

_U = -X_PARAM  # positive loop parameter
_U_BITS = bin(int(_U))[3:]  # skip the leading bit


def _miller_loop(p_pt, q_pt):
    """f_{u,Q}(P) conjugated; p_pt on E(Fq), q_pt on the twist, both affine."""
    xp, yp = p_pt
    c0 = (yp, yp)  # xi * yp
    xq, yq = q_pt
    xt, yt = xq, yq
    f = F12_ONE
    for bit in _U_BITS:
        lam = f2_mul(f2_muls(f2_sqr(xt), 3), f2_inv(f2_muls(yt, 2)))
        c3 = f2_sub(f2_mul(lam, xt), yt)
        c5 = f2_neg(f2_muls(lam, xp))
        f = f12_mul(f12_sqr(f), f12_line(c0, c3, c5))
        x_new = f2_sub(f2_sqr(lam), f2_muls(xt, 2))
        yt = f2_sub(f2_mul(lam, f2_sub(xt, x_new)), yt)
        xt = x_new
        if bit == "1":
            lam = f2_mul(f2_sub(yt, yq), f2_inv(f2_sub(xt, xq)))
            c3 = f2_sub(f2_mul(lam, xq), yq)
            c5 = f2_neg(f2_muls(lam, xp))
            f = f12_mul(f, f12_line(c0, c3, c5))
            x_new = f2_sub(f2_sub(f2_sqr(lam), xt), xq)
            yt = f2_sub(f2_mul(lam, f2_sub(xt, x_new)), yt)
            xt = x_new
    return f12_conj(f)


def _easy_part(f):
    f = f12_mul(f12_conj(f), f12_inv(f))  # ^(p^6 - 1)
    return f12_mul(f12_frob2(f), f)  # ^(p^2 + 1)


def _exp_u(g):
    """g^|x| by square-and-multiply (7 set bits)."""
    acc = g
    for bit in _U_BITS:
        acc = f12_sqr(acc)
        if bit == "1":
            acc = f12_mul(acc, g)
    return acc


def _exp_x(g):
    """g^x for unitary g (x negative: exponentiate by |x|, then conjugate)."""
    return f12_conj(_exp_u(g))


def _hard_part(m):
    a = f12_mul(_exp_x(m), f12_conj(m))  # m^(x-1)
    a = f12_mul(_exp_x(a), f12_conj(a))  # m^((x-1)^2)
    b = f12_mul(_exp_x(a), f12_frob(a))  # a^(x+p)
    c = f12_mul(_exp_x(_exp_x(b)), f12_mul(f12_frob2(b), f12_conj(b)))
    m3 = f12_mul(f12_sqr(m), m)
    return f12_mul(c, m3)


def final_exp(f):
    return _hard_part(_easy_part(f))


def final_exp_slow(f):
    """Oracle: the hard part as one literal exponentiation (cube root of
    final_exp's output exponent)."""
    return f12_pow(_easy_part(f), (P**4 - P**2 + 1) // N)


def pairing(p_pt, q_pt):
    """e(P, Q) into the cyclotomic subgroup of Fq12; bilinear, e != 1 on
    (generator, generator)."""
    if p_pt is None or q_pt is None:
        return F12_ONE
    return final_exp(_miller_loop(p_pt, q_pt))


_GT_GEN = None


def gt_generator():
    global _GT_GEN
    if _GT_GEN is None:
        _GT_GEN = pairing(G1_GEN, G2_GEN)
    return _GT_GEN
