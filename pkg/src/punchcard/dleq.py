"""Discrete-log-equality proofs (Chaum-Pedersen, made non-interactive).

Statement: for bases (g, p) and points (pk, q), the prover knows sk with
pk = g^sk and q = p^sk. The punch flow uses this so a client can check the
server applied the advertised key to its masked card and nothing else.

Transcript form is (A1, A2, z): commitments A1 = g^k, A2 = p^k, challenge
c = H(tag || g || pk || p || q || A1 || A2) via a 512-bit digest reduced mod
the group order, response z = k + c*sk. Verification checks

    g^z == A1 * pk^c        p^z == A2 * q^c

after recomputing c. The challenge-programmed simulator used by the
zero-knowledge tests lives here too, as does the interactive-transcript
checker it is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Tuple

from .errors import InvalidEncoding
from .groups import Group

Element = Any


@dataclass(frozen=True)
class DleqProof:
    commit_base: Element  # A1 = g^k
    commit_point: Element  # A2 = p^k
    response: int  # z = k + c*sk

    def to_bytes(self, group: Group) -> bytes:
        return (
            group.encode_element(self.commit_base)
            + group.encode_element(self.commit_point)
            + group.encode_scalar(self.response)
        )


def proof_size(group: Group) -> int:
    return 2 * group.element_size + group.scalar_size


def proof_from_bytes(group: Group, data: bytes) -> DleqProof:
    if len(data) != proof_size(group):
        raise InvalidEncoding(
            f"proof must be {proof_size(group)} bytes, got {len(data)}"
        )
    n = group.element_size
    return DleqProof(
        commit_base=group.decode_element(data[:n]),
        commit_point=group.decode_element(data[n : 2 * n]),
        response=group.decode_scalar(data[2 * n :]),
    )


def challenge(
    group: Group,
    tag: str,
    base: Element,
    pk: Element,
    point: Element,
    image: Element,
    commit_base: Element,
    commit_point: Element,
) -> int:
    enc = group.encode_element
    transcript = (
        enc(base) + enc(pk) + enc(point) + enc(image) + enc(commit_base) + enc(commit_point)
    )
    return group.hash_to_scalar(tag, transcript)


def prove(
    group: Group,
    tag: str,
    sk: int,
    point: Element,
    image: Element,
    rng=None,
) -> DleqProof:
    """Prove image = point^sk under the key pk = g^sk; fresh nonce k every
    call, never reused across proofs."""
    base = group.generator()
    pk = group.exp(base, sk)
    k = group.random_scalar(rng)
    commit_base = group.exp(base, k)
    commit_point = group.exp(point, k)
    c = challenge(group, tag, base, pk, point, image, commit_base, commit_point)
    z = (k + c * sk) % group.order
    return DleqProof(commit_base, commit_point, z)


def verify(
    group: Group,
    tag: str,
    pk: Element,
    point: Element,
    image: Element,
    proof: DleqProof,
) -> bool:
    base = group.generator()
    c = challenge(
        group, tag, base, pk, point, image, proof.commit_base, proof.commit_point
    )
    return verify_transcript(
        group, pk, point, image, proof.commit_base, proof.commit_point, c, proof.response
    )


def verify_transcript(
    group: Group,
    pk: Element,
    point: Element,
    image: Element,
    commit_base: Element,
    commit_point: Element,
    chal: int,
    response: int,
) -> bool:
    """The interactive verification equations, with the challenge supplied."""
    base = group.generator()
    lhs1 = group.exp(base, response)
    rhs1 = group.mul(commit_base, group.exp(pk, chal))
    lhs2 = group.exp(point, response)
    rhs2 = group.mul(commit_point, group.exp(image, chal))
    return group.eq(lhs1, rhs1) and group.eq(lhs2, rhs2)


def simulate(
    group: Group,
    pk: Element,
    point: Element,
    image: Element,
    chal: int,
    rng=None,
) -> Tuple[Element, Element, int]:
    """Produce an accepting transcript for a given challenge without the
    key: sample z, then set A1 = g^z * pk^-c, A2 = p^z * q^-c. Exists for
    the zero-knowledge tests; no protocol path calls it."""
    base = group.generator()
    z = group.random_scalar(rng)
    neg_c = (-chal) % group.order
    commit_base = group.mul(group.exp(base, z), group.exp(pk, neg_c))
    commit_point = group.mul(group.exp(point, z), group.exp(image, neg_c))
    return commit_base, commit_point, z
