"""Proof that a committed value is a valid short signature on a known message.

The statement carries commitments to the two signature parts: c_sig hides
the integer representation of sigma (as a Zq scalar) and c_rand hides the
signature randomness r, plus the verification key and the signed message m.
The proof combines a proof of knowledge of the committed openings with a
randomized check of the signature verification equation: the prover sends
F = sigma^t for a cleartext nonzero t together with A, and the verifier
checks pair(F, u * g2^m * A) = z^t; the remaining elements B, D, E tie the
signature inside F to the committed values.

Verification equations, each the inversion of one simulator assignment:
  (i)   g^y1 h^z1 = M1 * c_sig^e        (opening knowledge for c_sig)
  (ii)  g^y2 h^z2 = M2 * c_rand^e       (opening knowledge for c_rand)
  (iii) v^y2      = B * A^e             (A = v^r for the same committed r)
  (iv)  F^y1 * E  = D^e                 (D = F^(committed sigma))
  (v)   pair(F, u * g2^m * A) = z^t     (randomized signature equation)
plus t != 0.  ElGamal mode splits (i)/(ii) into four equations by adding
g^z1 = N1 * c_sig_a^e and g^z2 = N2 * c_rand_a^e for the first components.

The prover draws t from Zq* (a zero t would make sigma = F^(1/t)
unrecoverable for the extractor) and the verifier rejects t = 0.
"""

from __future__ import annotations

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
from .commitments import Opening
from .sigma import (
    ExtractionMismatch,
    OrProof,
    SigmaProtocol,
    chal_scalar,
    challenge_bits_for,
)
from .signatures import BBSignature, BBVerKey, bb_verify

PEDERSEN = "pedersen"
ELGAMAL = "elgamal"


@dataclass(frozen=True)
class CommittedSigStatement:
    """Commitments are single elements in Pedersen mode and (g^rho, value
    term) pairs in ElGamal mode; h is the commitment base in force."""

    h: GroupElement
    c_sig: object
    c_rand: object
    vk: BBVerKey
    m: Scalar


@dataclass(frozen=True)
class CommittedSigWitness:
    sigma: GroupElement
    r: Scalar
    r1: Scalar
    r2: Scalar


@dataclass(frozen=True)
class CommittedSigFirst:
    a_cap: GroupElement
    b_cap: GroupElement
    d_cap: GroupElement
    e_cap: GroupElement
    f_cap: GroupElement
    m1: GroupElement
    m2: GroupElement
    t: Scalar
    n1: GroupElement | None = None
    n2: GroupElement | None = None


@dataclass(frozen=True)
class CommittedSigResponse:
    y1: Scalar
    z1: Scalar
    y2: Scalar
    z2: Scalar


class CommittedSignatureProof(SigmaProtocol):
    def __init__(self, commit_group: Group, pairing: PairingBackend, mode: str):
        if commit_group.order != pairing.order:
            raise ValueError("commitment group and pairing must share q")
        if mode not in (PEDERSEN, ELGAMAL):
            raise ValueError(f"unknown commitment mode {mode!r}")
        self.group = commit_group
        self.pairing = pairing
        self.mode = mode
        self.challenge_bits = challenge_bits_for(commit_group.order)

    @property
    def q(self) -> int:
        return self.group.order

    def sigma_scalar(self, sigma: GroupElement) -> Scalar:
        """Integer representation of a G1 element, reduced into Zq."""
        return Scalar(self.pairing.g1_group.int_repr(sigma), self.q)

    def _open_ok(self, h, com, value: Scalar, rho: Scalar) -> bool:
        g = self.group
        gen = g.generator()
        if self.mode == PEDERSEN:
            return g.mul(g.exp(gen, value), g.exp(h, rho)) == com
        c_a, c_b = com
        return g.exp(gen, rho) == c_a and g.mul(g.exp(gen, value), g.exp(h, rho)) == c_b

    def relation(self, statement: CommittedSigStatement, witness: CommittedSigWitness) -> bool:
        if not self._open_ok(
            statement.h, statement.c_sig, self.sigma_scalar(witness.sigma), witness.r1
        ):
            return False
        if not self._open_ok(statement.h, statement.c_rand, witness.r, witness.r2):
            return False
        return bb_verify(
            self.pairing,
            statement.vk,
            statement.m,
            BBSignature(witness.sigma, witness.r),
        )

    def first_message(self, statement, witness: CommittedSigWitness, rng):
        g = self.group
        gen = g.generator()
        g1g = self.pairing.g1_group
        g2g = self.pairing.g2_group
        w1 = rand_scalar(rng, self.q)
        w2 = rand_scalar(rng, self.q)
        w3 = rand_scalar(rng, self.q)
        w4 = rand_scalar(rng, self.q)
        t = rand_scalar_nonzero(rng, self.q)
        m1 = g.mul(g.exp(gen, w1), g.exp(statement.h, w2))
        m2 = g.mul(g.exp(gen, w3), g.exp(statement.h, w4))
        f_cap = g1g.exp(witness.sigma, t)
        d_cap = g1g.exp(f_cap, self.sigma_scalar(witness.sigma))
        e_cap = g1g.exp(f_cap, -w1)
        a_cap = g2g.exp(statement.vk.v, witness.r)
        b_cap = g2g.exp(statement.vk.v, w3)
        n1 = n2 = None
        if self.mode == ELGAMAL:
            n1 = g.exp(gen, w2)
            n2 = g.exp(gen, w4)
        first = CommittedSigFirst(a_cap, b_cap, d_cap, e_cap, f_cap, m1, m2, t, n1, n2)
        return ((w1, w2, w3, w4), witness), first

    def respond(self, prover_state, e: int) -> CommittedSigResponse:
        (w1, w2, w3, w4), wit = prover_state
        es = chal_scalar(e, self.q)
        return CommittedSigResponse(
            y1=w1 + es * self.sigma_scalar(wit.sigma),
            z1=w2 + es * wit.r1,
            y2=w3 + es * wit.r,
            z2=w4 + es * wit.r2,
        )

    def _commit_checks(self, statement, first, e, resp) -> bool:
        g = self.group
        gen = g.generator()
        h = statement.h
        if self.mode == PEDERSEN:
            pairs = ((statement.c_sig, first.m1, resp.y1, resp.z1),
                     (statement.c_rand, first.m2, resp.y2, resp.z2))
            for com, m_cap, y, z in pairs:
                lhs = g.mul(g.exp(gen, y), g.exp(h, z))
                if lhs != g.mul(m_cap, g.exp(com, e)):
                    return False
            return True
        if first.n1 is None or first.n2 is None:
            return False
        quads = ((statement.c_sig, first.m1, first.n1, resp.y1, resp.z1),
                 (statement.c_rand, first.m2, first.n2, resp.y2, resp.z2))
        for (c_a, c_b), m_cap, n_cap, y, z in quads:
            if g.mul(g.exp(gen, y), g.exp(h, z)) != g.mul(m_cap, g.exp(c_b, e)):
                return False
            if g.exp(gen, z) != g.mul(n_cap, g.exp(c_a, e)):
                return False
        return True

    def verify(self, statement, first: CommittedSigFirst, e: int, resp) -> bool:
        if first.t.value == 0:
            return False
        if not self._commit_checks(statement, first, e, resp):
            return False
        g1g = self.pairing.g1_group
        g2g = self.pairing.g2_group
        vk = statement.vk
        # (iii): A carries v^r for the committed r.
        if g2g.exp(vk.v, resp.y2) != g2g.mul(first.b_cap, g2g.exp(first.a_cap, e)):
            return False
        # (iv): D carries F^(committed sigma).
        lhs = g1g.mul(g1g.exp(first.f_cap, resp.y1), first.e_cap)
        if lhs != g1g.exp(first.d_cap, e):
            return False
        # (v): randomized signature verification equation.
        inner = g2g.mul(g2g.mul(vk.u, g2g.exp(vk.g2, statement.m)), first.a_cap)
        return self.pairing.pair(first.f_cap, inner) == self.pairing.gt_group.exp(
            vk.z, first.t
        )

    def simulate(self, statement, e: int, rng):
        g = self.group
        gen = g.generator()
        g1g = self.pairing.g1_group
        g2g = self.pairing.g2_group
        vk = statement.vk
        q = self.q
        s = rand_scalar_nonzero(rng, q)
        t = rand_scalar_nonzero(rng, q)
        y1 = rand_scalar(rng, q)
        y2 = rand_scalar(rng, q)
        z1 = rand_scalar(rng, q)
        z2 = rand_scalar(rng, q)
        sigma = g1g.exp(vk.g1, s)
        sig_int = self.sigma_scalar(sigma)
        f_cap = g1g.exp(sigma, t)
        d_cap = g1g.exp(sigma, t * sig_int)
        e_cap = g1g.mul(g1g.exp(d_cap, e), g1g.exp(f_cap, -y1))
        a_cap = g2g.mul(
            g2g.mul(g2g.inv(vk.u), g2g.exp(vk.g2, -statement.m)),
            g2g.exp(vk.g2, s.inverse()),
        )
        b_cap = g2g.mul(g2g.exp(vk.v, y2), g2g.exp(a_cap, (-e) % q))
        me = (-e) % q
        if self.mode == PEDERSEN:
            m1 = g.mul(g.mul(g.exp(gen, y1), g.exp(statement.h, z1)), g.exp(statement.c_sig, me))
            m2 = g.mul(g.mul(g.exp(gen, y2), g.exp(statement.h, z2)), g.exp(statement.c_rand, me))
            n1 = n2 = None
        else:
            m1 = g.mul(g.mul(g.exp(gen, y1), g.exp(statement.h, z1)), g.exp(statement.c_sig[1], me))
            m2 = g.mul(g.mul(g.exp(gen, y2), g.exp(statement.h, z2)), g.exp(statement.c_rand[1], me))
            n1 = g.mul(g.exp(gen, z1), g.exp(statement.c_sig[0], me))
            n2 = g.mul(g.exp(gen, z2), g.exp(statement.c_rand[0], me))
        first = CommittedSigFirst(a_cap, b_cap, d_cap, e_cap, f_cap, m1, m2, t, n1, n2)
        return first, CommittedSigResponse(y1, z1, y2, z2)

    def extract(self, statement, first: CommittedSigFirst, e1, z1, e2, z2) -> CommittedSigWitness:
        q = self.q
        inv = Scalar((e1 - e2) % q, q).inverse()
        sig_scalar = (z1.y1 - z2.y1) * inv
        r1 = (z1.z1 - z2.z1) * inv
        r = (z1.y2 - z2.y2) * inv
        r2 = (z1.z2 - z2.z2) * inv
        sigma = self.pairing.g1_group.exp(first.f_cap, first.t.inverse())
        if self.sigma_scalar(sigma) != sig_scalar:
            raise ExtractionMismatch(
                "committed scalar disagrees with the signature recovered from F"
            )
        witness = CommittedSigWitness(sigma, r, r1, r2)
        if not self.relation(statement, witness):
            raise ExtractionMismatch("extracted opening/signature fails the relation")
        return witness

    def first_size(self) -> int:
        n = (
            2 * self.pairing.g2_group.encoded_size()
            + 3 * self.pairing.g1_group.encoded_size()
            + 2 * self.group.encoded_size()
            + scalar_width(self.q)
        )
        if self.mode == ELGAMAL:
            n += 2 * self.group.encoded_size()
        return n

    def response_size(self) -> int:
        return 4 * scalar_width(self.q)

    def encode_first(self, first: CommittedSigFirst) -> bytes:
        g2g = self.pairing.g2_group
        g1g = self.pairing.g1_group
        parts = [
            g2g.encode(first.a_cap),
            g2g.encode(first.b_cap),
            g1g.encode(first.d_cap),
            g1g.encode(first.e_cap),
            g1g.encode(first.f_cap),
            self.group.encode(first.m1),
            self.group.encode(first.m2),
        ]
        if self.mode == ELGAMAL:
            parts.append(self.group.encode(first.n1))
            parts.append(self.group.encode(first.n2))
        parts.append(first.t.encode())
        return b"".join(parts)

    def decode_first(self, data: bytes) -> CommittedSigFirst:
        g2g = self.pairing.g2_group
        g1g = self.pairing.g1_group
        w2, w1, wg = g2g.encoded_size(), g1g.encoded_size(), self.group.encoded_size()
        off = 0

        def take(n):
            nonlocal off
            chunk = data[off : off + n]
            off += n
            return chunk

        a_cap = g2g.decode(take(w2))
        b_cap = g2g.decode(take(w2))
        d_cap = g1g.decode(take(w1))
        e_cap = g1g.decode(take(w1))
        f_cap = g1g.decode(take(w1))
        m1 = self.group.decode(take(wg))
        m2 = self.group.decode(take(wg))
        n1 = n2 = None
        if self.mode == ELGAMAL:
            n1 = self.group.decode(take(wg))
            n2 = self.group.decode(take(wg))
        t = decode_scalar(take(scalar_width(self.q)), self.q)
        if off != len(data):
            raise ValueError("trailing bytes in first message")
        return CommittedSigFirst(a_cap, b_cap, d_cap, e_cap, f_cap, m1, m2, t, n1, n2)

    def encode_response(self, resp: CommittedSigResponse) -> bytes:
        return resp.y1.encode() + resp.z1.encode() + resp.y2.encode() + resp.z2.encode()

    def decode_response(self, data: bytes) -> CommittedSigResponse:
        w = scalar_width(self.q)
        if len(data) != 4 * w:
            raise ValueError("bad response width")
        vals = [decode_scalar(data[i * w : (i + 1) * w], self.q) for i in range(4)]
        return CommittedSigResponse(*vals)


def commit_pair(
    spec: CommittedSignatureProof,
    receiver_h: GroupElement | None,
    values: tuple[Scalar, Scalar],
    rng: random.Random,
) -> tuple[object, object, GroupElement, Opening, Opening]:
    """Commit to the two signature slots under one base.

    Pedersen mode uses the receiver-supplied h; ElGamal mode draws a
    fresh sender base (receiver_h must be None).  Returns
    (c_sig, c_rand, h, opening_sig, opening_rand).
    """
    g = spec.group
    gen = g.generator()
    v_sig, v_rand = values
    if spec.mode == PEDERSEN:
        if receiver_h is None:
            raise ValueError("pedersen mode needs the receiver base")
        h = receiver_h
        r1 = rand_scalar(rng, spec.q)
        c_sig = g.mul(g.exp(gen, v_sig), g.exp(h, r1))
        r2 = rand_scalar(rng, spec.q)
        c_rand = g.mul(g.exp(gen, v_rand), g.exp(h, r2))
    else:
        if receiver_h is not None:
            raise ValueError("elgamal commitments are sender-based")
        x_h = rand_scalar_nonzero(rng, spec.q)
        h = g.exp(gen, x_h)
        r1 = rand_scalar(rng, spec.q)
        c_sig = (g.exp(gen, r1), g.mul(g.exp(gen, v_sig), g.exp(h, r1)))
        r2 = rand_scalar(rng, spec.q)
        c_rand = (g.exp(gen, r2), g.mul(g.exp(gen, v_rand), g.exp(h, r2)))
    return c_sig, c_rand, h, Opening(v_sig, r1), Opening(v_rand, r2)


def two_key_or(spec: CommittedSignatureProof) -> OrProof:
    """OR over the same committed-signature relation under two different
    verification keys; the two statements share the commitments."""
    return OrProof((spec, spec))


def two_key_statements(
    base: CommittedSigStatement, vk0: BBVerKey, vk1: BBVerKey
) -> tuple[CommittedSigStatement, CommittedSigStatement]:
    s0 = CommittedSigStatement(base.h, base.c_sig, base.c_rand, vk0, base.m)
    s1 = CommittedSigStatement(base.h, base.c_sig, base.c_rand, vk1, base.m)
    return s0, s1
