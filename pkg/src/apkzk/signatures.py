"""Signature schemes used by the argument system.

Boneh-Boyen short signatures carry the verifier's registered keys: the
verification key is (g1, g2, u, v, z) with u = g2^x, v = g2^y and
z = pair(g1, g2); a signature on m in Zq* is (sigma, r) with
sigma = g1^(1/(x + m + y*r)), checked by pair(sigma, u * g2^m * v^r) = z.

The one-time signature is Lamport over the injective one-way function
f(x) = g^x in the commitment group: 2L secret scalars, publics g^x, and
signing reveals one preimage per digest bit.  Injectivity of f makes it
strongly unforgeable after a single use.  Single-use discipline is the
caller's job (the protocol state machines enforce it).
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from .algebra import (
    Group,
    GroupElement,
    PairingBackend,
    Scalar,
    decode_scalar,
    rand_scalar,
    rand_scalar_nonzero,
    scalar_width,
)

BB_SIGN_MAX_ATTEMPTS = 64


class SignError(RuntimeError):
    """Signing retry bound exhausted (only reachable at toy q)."""


def sha256_digest(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def digest_bits(digest: bytes, count: int) -> list[int]:
    """First `count` bits of a digest, most significant first."""
    if count > 8 * len(digest):
        raise ValueError("digest too short for requested bit count")
    return [(digest[i // 8] >> (7 - i % 8)) & 1 for i in range(count)]


def hash_to_zq_star(data: bytes, q: int, digest=sha256_digest) -> Scalar:
    """Map arbitrary bytes into Zq*; used to derive the signed message
    from a one-time verification key."""
    v = int.from_bytes(digest(data), "big")
    return Scalar(v % (q - 1) + 1, q)


@dataclass(frozen=True)
class BBVerKey:
    g1: GroupElement
    g2: GroupElement
    u: GroupElement
    v: GroupElement
    z: GroupElement

    def encode(self, backend: PairingBackend) -> bytes:
        return (
            backend.g1_group.encode(self.g1)
            + backend.g2_group.encode(self.g2)
            + backend.g2_group.encode(self.u)
            + backend.g2_group.encode(self.v)
            + backend.gt_group.encode(self.z)
        )


def bb_verkey_size(backend: PairingBackend) -> int:
    return (
        backend.g1_group.encoded_size()
        + 3 * backend.g2_group.encoded_size()
        + backend.gt_group.encoded_size()
    )


def decode_bb_verkey(data: bytes, backend: PairingBackend) -> BBVerKey:
    s1 = backend.g1_group.encoded_size()
    s2 = backend.g2_group.encoded_size()
    st = backend.gt_group.encoded_size()
    if len(data) != s1 + 3 * s2 + st:
        raise ValueError("bad verification key encoding")
    off = 0
    g1 = backend.g1_group.decode(data[off : off + s1])
    off += s1
    g2 = backend.g2_group.decode(data[off : off + s2])
    off += s2
    u = backend.g2_group.decode(data[off : off + s2])
    off += s2
    v = backend.g2_group.decode(data[off : off + s2])
    off += s2
    z = backend.gt_group.decode(data[off : off + st])
    vk = BBVerKey(g1, g2, u, v, z)
    if z != backend.pair(g1, g2) or u == backend.g2_group.identity() or v == backend.g2_group.identity():
        raise ValueError("verification key violates its invariants")
    return vk


@dataclass(frozen=True)
class BBSigKey:
    x: Scalar
    y: Scalar


@dataclass(frozen=True)
class BBSignature:
    sigma: GroupElement
    r: Scalar


def bb_keygen(backend: PairingBackend, rng: random.Random) -> tuple[BBVerKey, BBSigKey]:
    q = backend.order
    x = rand_scalar_nonzero(rng, q)
    y = rand_scalar_nonzero(rng, q)
    g1, g2 = backend.g1(), backend.g2()
    u = backend.g2_group.exp(g2, x)
    v = backend.g2_group.exp(g2, y)
    z = backend.pair(g1, g2)
    return BBVerKey(g1, g2, u, v, z), BBSigKey(x, y)


def bb_sign(
    backend: PairingBackend, sk: BBSigKey, m: Scalar, rng: random.Random
) -> BBSignature:
    q = backend.order
    if m.value == 0:
        raise ValueError("message must lie in Zq*")
    for _ in range(BB_SIGN_MAX_ATTEMPTS):
        r = rand_scalar_nonzero(rng, q)
        denom = (sk.x.value + m.value + sk.y.value * r.value) % q
        if denom == 0:
            continue
        sigma = backend.g1_group.exp(backend.g1(), pow(denom, -1, q))
        return BBSignature(sigma, r)
    raise SignError("could not find r with x + m + y*r nonzero")


def bb_verify(backend: PairingBackend, vk: BBVerKey, m: Scalar, sig: BBSignature) -> bool:
    g2g = backend.g2_group
    try:
        rhs = g2g.mul(g2g.mul(vk.u, g2g.exp(vk.g2, m)), g2g.exp(vk.v, sig.r))
        return backend.pair(sig.sigma, rhs) == vk.z
    except ValueError:
        return False


@dataclass(frozen=True)
class OneTimePublicKey:
    """2L public elements y[i][b] = g^x[i][b], serialized as L then the
    elements in index order; those bytes are the message other parties
    sign and commit to."""

    publics: tuple[tuple[GroupElement, GroupElement], ...]

    @property
    def bits(self) -> int:
        return len(self.publics)

    def encode(self, group: Group) -> bytes:
        out = [len(self.publics).to_bytes(4, "big")]
        for y0, y1 in self.publics:
            out.append(group.encode(y0))
            out.append(group.encode(y1))
        return b"".join(out)


def ots_pubkey_size(group: Group, bits: int) -> int:
    return 4 + 2 * bits * group.encoded_size()


def decode_ots_pubkey(data: bytes, group: Group) -> OneTimePublicKey:
    if len(data) < 4:
        raise ValueError("truncated one-time public key")
    bits = int.from_bytes(data[:4], "big")
    width = group.encoded_size()
    if len(data) != 4 + 2 * bits * width:
        raise ValueError("bad one-time public key encoding")
    publics = []
    off = 4
    for _ in range(bits):
        y0 = group.decode(data[off : off + width])
        off += width
        y1 = group.decode(data[off : off + width])
        off += width
        publics.append((y0, y1))
    return OneTimePublicKey(tuple(publics))


@dataclass(frozen=True)
class OneTimeKeypair:
    secrets: tuple[tuple[Scalar, Scalar], ...]
    public: OneTimePublicKey


@dataclass(frozen=True)
class OneTimeSignature:
    reveals: tuple[Scalar, ...]

    def encode(self, q: int) -> bytes:
        return b"".join(s.encode() for s in self.reveals)


def decode_ots_signature(data: bytes, q: int, bits: int) -> OneTimeSignature:
    width = scalar_width(q)
    if len(data) != bits * width:
        raise ValueError("bad one-time signature encoding")
    reveals = tuple(
        decode_scalar(data[i * width : (i + 1) * width], q) for i in range(bits)
    )
    return OneTimeSignature(reveals)


def ots_keygen(group: Group, bits: int, rng: random.Random) -> OneTimeKeypair:
    if bits < 1:
        raise ValueError("need at least one digest bit")
    g = group.generator()
    secrets = []
    publics = []
    for _ in range(bits):
        x0 = rand_scalar(rng, group.order)
        x1 = rand_scalar(rng, group.order)
        secrets.append((x0, x1))
        publics.append((group.exp(g, x0), group.exp(g, x1)))
    return OneTimeKeypair(tuple(secrets), OneTimePublicKey(tuple(publics)))


def ots_sign(
    kp: OneTimeKeypair, message: bytes, digest=sha256_digest
) -> OneTimeSignature:
    bits = digest_bits(digest(message), kp.public.bits)
    return OneTimeSignature(tuple(kp.secrets[i][b] for i, b in enumerate(bits)))


def ots_verify(
    pub: OneTimePublicKey,
    message: bytes,
    sig: OneTimeSignature,
    group: Group,
    digest=sha256_digest,
) -> bool:
    if len(sig.reveals) != pub.bits:
        return False
    bits = digest_bits(digest(message), pub.bits)
    g = group.generator()
    for i, b in enumerate(bits):
        if group.exp(g, sig.reveals[i]) != pub.publics[i][b]:
            return False
    return True
