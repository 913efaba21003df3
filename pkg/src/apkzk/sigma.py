"""Three-message proof-of-knowledge framework.

A SigmaProtocol provides: an honest prover split into first_message and
respond, a verifier predicate over (a, e, z), a fixed-challenge simulator
(special honest-verifier zero-knowledge), and a two-transcript witness
extractor (special soundness).  Challenges are l-bit strings with
l = bitlen(q) - 1, so they XOR-compose and still embed in Zq.

OR-composition generalizes to n branches: the composed challenge is the
XOR of the per-branch challenges.  When every branch can re-answer a
simulated transcript to a new challenge (linear response in the witness,
true of all the discrete-log protocols here), the composition runs in a
symmetric mode whose first message is bit-identical whichever branch
holds the witness; otherwise the known branch plays honestly and only
distributional witness indistinguishability holds.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .algebra import (
    Group,
    GroupElement,
    Scalar,
    decode_scalar,
    rand_scalar,
    scalar_width,
)
from .commitments import Opening


class ExtractionError(RuntimeError):
    pass


class ExtractionPreconditionError(ExtractionError):
    """Transcripts not extractable: shared-first-message or distinct-challenge
    precondition violated, or a transcript does not verify."""


class ExtractionMismatch(ExtractionError):
    """The algebraically extracted candidate fails the relation predicate."""


def challenge_bits_for(q: int) -> int:
    return q.bit_length() - 1


def rand_challenge(rng: random.Random, bits: int) -> int:
    return rng.randrange(1 << bits)


def encode_challenge(e: int, q: int) -> bytes:
    return e.to_bytes(scalar_width(q), "big")


def decode_challenge(data: bytes, q: int, bits: int) -> int:
    if len(data) != scalar_width(q):
        raise ValueError("bad challenge width")
    e = int.from_bytes(data, "big")
    if e >= 1 << bits:
        raise ValueError("challenge out of range")
    return e


def chal_scalar(e: int, q: int) -> Scalar:
    return Scalar(e, q)


@dataclass(frozen=True)
class SigmaTranscript:
    a: object
    e: int
    z: object


class SigmaProtocol:
    """Stateless protocol description; per-proof state is explicit."""

    challenge_bits: int
    partially_witness_independent: bool = False

    @property
    def knowledge_error(self) -> float:
        return 2.0 ** (-self.challenge_bits)

    def challenge_modulus(self) -> int:
        return self.group.order

    def relation(self, statement, witness) -> bool:
        raise NotImplementedError

    def first_message(self, statement, witness, rng) -> tuple[object, object]:
        """Returns (prover_state, a)."""
        raise NotImplementedError

    def respond(self, prover_state, e: int):
        raise NotImplementedError

    def verify(self, statement, a, e: int, z) -> bool:
        raise NotImplementedError

    def simulate(self, statement, e: int, rng) -> tuple[object, object]:
        """Returns (a, z) accepting for the given challenge."""
        raise NotImplementedError

    def extract(self, statement, a, e1: int, z1, e2: int, z2):
        raise NotImplementedError

    # Linear-response protocols additionally implement:
    #   respond_simulated(statement, witness, e_old, z_old, e_new) -> z_new
    # turning a simulated transcript into an answer for a new challenge.

    def first_size(self) -> int:
        raise NotImplementedError

    def response_size(self) -> int:
        raise NotImplementedError

    def encode_first(self, a) -> bytes:
        raise NotImplementedError

    def decode_first(self, data: bytes):
        raise NotImplementedError

    def encode_response(self, z) -> bytes:
        raise NotImplementedError

    def decode_response(self, data: bytes):
        raise NotImplementedError


class SchnorrDL(SigmaProtocol):
    """Knowledge of w with X = g^w."""

    partially_witness_independent = True

    def __init__(self, group: Group):
        self.group = group
        self.challenge_bits = challenge_bits_for(group.order)

    def relation(self, statement: GroupElement, witness: Scalar) -> bool:
        return self.group.exp(self.group.generator(), witness) == statement

    def first_message(self, statement, witness, rng):
        t = rand_scalar(rng, self.group.order)
        a = self.group.exp(self.group.generator(), t)
        return (t, witness), a

    def respond(self, prover_state, e: int) -> Scalar:
        t, w = prover_state
        return t + chal_scalar(e, self.group.order) * w

    def verify(self, statement, a, e: int, z: Scalar) -> bool:
        g = self.group
        lhs = g.exp(g.generator(), z)
        rhs = g.mul(a, g.exp(statement, e))
        return lhs == rhs

    def simulate(self, statement, e: int, rng):
        g = self.group
        z = rand_scalar(rng, g.order)
        a = g.mul(g.exp(g.generator(), z), g.exp(statement, (-e) % g.order))
        return a, z

    def respond_simulated(self, statement, witness, e_old, z_old, e_new) -> Scalar:
        q = self.group.order
        return z_old + Scalar((e_new - e_old) % q, q) * witness

    def extract(self, statement, a, e1, z1, e2, z2) -> Scalar:
        q = self.group.order
        de = Scalar((e1 - e2) % q, q)
        return (z1 - z2) * de.inverse()

    def first_size(self) -> int:
        return self.group.encoded_size()

    def response_size(self) -> int:
        return scalar_width(self.group.order)

    def encode_first(self, a) -> bytes:
        return self.group.encode(a)

    def decode_first(self, data: bytes):
        return self.group.decode(data)

    def encode_response(self, z: Scalar) -> bytes:
        return z.encode()

    def decode_response(self, data: bytes) -> Scalar:
        return decode_scalar(data, self.group.order)


class DlPair(SigmaProtocol):
    """Knowledge of (x, y) with u = g^x and v = g^y: two Schnorr instances
    sharing one challenge.  This is the relation tying a signing key to a
    registered verification key."""

    partially_witness_independent = True

    def __init__(self, group: Group):
        self.group = group
        self.challenge_bits = challenge_bits_for(group.order)

    def relation(self, statement, witness) -> bool:
        u, v = statement
        x, y = witness
        g = self.group
        return g.exp(g.generator(), x) == u and g.exp(g.generator(), y) == v

    def first_message(self, statement, witness, rng):
        g = self.group
        t1 = rand_scalar(rng, g.order)
        t2 = rand_scalar(rng, g.order)
        a = (g.exp(g.generator(), t1), g.exp(g.generator(), t2))
        return (t1, t2, witness), a

    def respond(self, prover_state, e: int):
        t1, t2, (x, y) = prover_state
        es = chal_scalar(e, self.group.order)
        return (t1 + es * x, t2 + es * y)

    def verify(self, statement, a, e: int, z) -> bool:
        u, v = statement
        a1, a2 = a
        z1, z2 = z
        g = self.group
        gen = g.generator()
        return g.exp(gen, z1) == g.mul(a1, g.exp(u, e)) and g.exp(gen, z2) == g.mul(
            a2, g.exp(v, e)
        )

    def simulate(self, statement, e: int, rng):
        u, v = statement
        g = self.group
        z1 = rand_scalar(rng, g.order)
        z2 = rand_scalar(rng, g.order)
        me = (-e) % g.order
        a = (
            g.mul(g.exp(g.generator(), z1), g.exp(u, me)),
            g.mul(g.exp(g.generator(), z2), g.exp(v, me)),
        )
        return a, (z1, z2)

    def respond_simulated(self, statement, witness, e_old, z_old, e_new):
        q = self.group.order
        x, y = witness
        d = Scalar((e_new - e_old) % q, q)
        return (z_old[0] + d * x, z_old[1] + d * y)

    def extract(self, statement, a, e1, z1, e2, z2):
        q = self.group.order
        inv = Scalar((e1 - e2) % q, q).inverse()
        return ((z1[0] - z2[0]) * inv, (z1[1] - z2[1]) * inv)

    def first_size(self) -> int:
        return 2 * self.group.encoded_size()

    def response_size(self) -> int:
        return 2 * scalar_width(self.group.order)

    def encode_first(self, a) -> bytes:
        return self.group.encode(a[0]) + self.group.encode(a[1])

    def decode_first(self, data: bytes):
        w = self.group.encoded_size()
        return (self.group.decode(data[:w]), self.group.decode(data[w:]))

    def encode_response(self, z) -> bytes:
        return z[0].encode() + z[1].encode()

    def decode_response(self, data: bytes):
        w = scalar_width(self.group.order)
        return (decode_scalar(data[:w], self.group.order), decode_scalar(data[w:], self.group.order))


class PedersenOpening(SigmaProtocol):
    """Knowledge of an opening (y, r) of C = g^y h^r."""

    partially_witness_independent = True

    def __init__(self, group: Group):
        self.group = group
        self.challenge_bits = challenge_bits_for(group.order)

    def relation(self, statement, witness: Opening) -> bool:
        h, c = statement
        g = self.group
        expect = g.mul(
            g.exp(g.generator(), witness.value), g.exp(h, witness.randomness)
        )
        return expect == c

    def first_message(self, statement, witness, rng):
        h, _ = statement
        g = self.group
        w1 = rand_scalar(rng, g.order)
        w2 = rand_scalar(rng, g.order)
        a = g.mul(g.exp(g.generator(), w1), g.exp(h, w2))
        return (w1, w2, witness), a

    def respond(self, prover_state, e: int):
        w1, w2, opening = prover_state
        es = chal_scalar(e, self.group.order)
        return (w1 + es * opening.value, w2 + es * opening.randomness)

    def verify(self, statement, a, e: int, z) -> bool:
        h, c = statement
        y_resp, z_resp = z
        g = self.group
        lhs = g.mul(g.exp(g.generator(), y_resp), g.exp(h, z_resp))
        return lhs == g.mul(a, g.exp(c, e))

    def simulate(self, statement, e: int, rng):
        h, c = statement
        g = self.group
        y_resp = rand_scalar(rng, g.order)
        z_resp = rand_scalar(rng, g.order)
        a = g.mul(
            g.mul(g.exp(g.generator(), y_resp), g.exp(h, z_resp)),
            g.exp(c, (-e) % g.order),
        )
        return a, (y_resp, z_resp)

    def respond_simulated(self, statement, witness: Opening, e_old, z_old, e_new):
        q = self.group.order
        d = Scalar((e_new - e_old) % q, q)
        return (z_old[0] + d * witness.value, z_old[1] + d * witness.randomness)

    def extract(self, statement, a, e1, z1, e2, z2) -> Opening:
        q = self.group.order
        inv = Scalar((e1 - e2) % q, q).inverse()
        return Opening((z1[0] - z2[0]) * inv, (z1[1] - z2[1]) * inv)

    def first_size(self) -> int:
        return self.group.encoded_size()

    def response_size(self) -> int:
        return 2 * scalar_width(self.group.order)

    def encode_first(self, a) -> bytes:
        return self.group.encode(a)

    def decode_first(self, data: bytes):
        return self.group.decode(data)

    def encode_response(self, z) -> bytes:
        return z[0].encode() + z[1].encode()

    def decode_response(self, data: bytes):
        w = scalar_width(self.group.order)
        return (decode_scalar(data[:w], self.group.order), decode_scalar(data[w:], self.group.order))


@dataclass(frozen=True)
class OrWitness:
    index: int
    witness: object


class OrProof(SigmaProtocol):
    """n-ary OR of sigma protocols sharing one challenge length.

    Statement: tuple of per-branch statements.  Response: per-branch
    (e_i, z_i) with XOR of the e_i equal to the composed challenge.
    """

    def __init__(self, branches: tuple[SigmaProtocol, ...]):
        if len(branches) < 2:
            raise ValueError("OR needs at least two branches")
        bits = {b.challenge_bits for b in branches}
        if len(bits) != 1:
            raise ValueError("branches must share a challenge length")
        self.branches = tuple(branches)
        self.challenge_bits = branches[0].challenge_bits
        self._symmetric = all(hasattr(b, "respond_simulated") for b in branches)
        self.partially_witness_independent = self._symmetric and all(
            b.partially_witness_independent for b in branches
        )
        self._chal_q = branches[0].challenge_modulus()

    def challenge_modulus(self) -> int:
        return self._chal_q

    def relation(self, statement, witness: OrWitness) -> bool:
        return self.branches[witness.index].relation(
            statement[witness.index], witness.witness
        )

    def first_message(self, statement, witness: OrWitness, rng):
        if not (0 <= witness.index < len(self.branches)):
            raise ValueError("witness branch out of range")
        firsts = []
        slots = []
        if self._symmetric:
            # Same draws for every branch regardless of which one is
            # known, so the first message is witness-independent bit for
            # bit; the known slot is re-answered at response time.
            for spec, stmt in zip(self.branches, statement):
                e_i = rand_challenge(rng, self.challenge_bits)
                a_i, z_i = spec.simulate(stmt, e_i, rng)
                firsts.append(a_i)
                slots.append((e_i, z_i))
            return ("sym", statement, witness, tuple(slots)), tuple(firsts)
        inner_state = None
        for i, (spec, stmt) in enumerate(zip(self.branches, statement)):
            if i == witness.index:
                inner_state, a_i = spec.first_message(stmt, witness.witness, rng)
                slots.append(None)
            else:
                e_i = rand_challenge(rng, self.challenge_bits)
                a_i, z_i = spec.simulate(stmt, e_i, rng)
                slots.append((e_i, z_i))
            firsts.append(a_i)
        return ("asym", statement, witness, tuple(slots), inner_state), tuple(firsts)

    def respond(self, prover_state, e: int):
        kind = prover_state[0]
        if kind == "sym":
            _, statement, witness, slots = prover_state
            k = witness.index
            e_known = e
            for i, (e_i, _) in enumerate(slots):
                if i != k:
                    e_known ^= e_i
            e_old, z_old = slots[k]
            z_known = self.branches[k].respond_simulated(
                statement[k], witness.witness, e_old, z_old, e_known
            )
            out = list(slots)
            out[k] = (e_known, z_known)
            return tuple(out)
        _, statement, witness, slots, inner_state = prover_state
        k = witness.index
        e_known = e
        for i, slot in enumerate(slots):
            if i != k:
                e_known ^= slot[0]
        z_known = self.branches[k].respond(inner_state, e_known)
        out = list(slots)
        out[k] = (e_known, z_known)
        return tuple(out)

    def verify(self, statement, a, e: int, z) -> bool:
        if len(z) != len(self.branches) or len(a) != len(self.branches):
            return False
        acc = 0
        for e_i, _ in z:
            acc ^= e_i
        if acc != e:
            return False
        for spec, stmt, a_i, (e_i, z_i) in zip(self.branches, statement, a, z):
            if not spec.verify(stmt, a_i, e_i, z_i):
                return False
        return True

    def simulate(self, statement, e: int, rng):
        parts = []
        firsts = []
        acc = e
        for i, (spec, stmt) in enumerate(zip(self.branches, statement)):
            if i < len(self.branches) - 1:
                e_i = rand_challenge(rng, self.challenge_bits)
                acc ^= e_i
            else:
                e_i = acc
            a_i, z_i = spec.simulate(stmt, e_i, rng)
            firsts.append(a_i)
            parts.append((e_i, z_i))
        return tuple(firsts), tuple(parts)

    def extract(self, statement, a, e1, z1, e2, z2) -> OrWitness:
        for i, spec in enumerate(self.branches):
            ei_1, zi_1 = z1[i]
            ei_2, zi_2 = z2[i]
            if ei_1 != ei_2:
                w = spec.extract(statement[i], a[i], ei_1, zi_1, ei_2, zi_2)
                return OrWitness(i, w)
        raise ExtractionPreconditionError(
            "no branch challenge differs between the transcripts"
        )

    def first_size(self) -> int:
        return sum(b.first_size() for b in self.branches)

    def response_size(self) -> int:
        w = scalar_width(self._chal_q)
        return sum(w + b.response_size() for b in self.branches)

    def encode_first(self, a) -> bytes:
        return b"".join(
            spec.encode_first(a_i) for spec, a_i in zip(self.branches, a)
        )

    def decode_first(self, data: bytes):
        out = []
        off = 0
        for spec in self.branches:
            n = spec.first_size()
            out.append(spec.decode_first(data[off : off + n]))
            off += n
        if off != len(data):
            raise ValueError("trailing bytes in OR first message")
        return tuple(out)

    def encode_response(self, z) -> bytes:
        q = self._chal_q
        return b"".join(
            encode_challenge(e_i, q) + spec.encode_response(z_i)
            for spec, (e_i, z_i) in zip(self.branches, z)
        )

    def decode_response(self, data: bytes):
        q = self._chal_q
        cw = scalar_width(q)
        out = []
        off = 0
        for spec in self.branches:
            e_i = decode_challenge(data[off : off + cw], q, self.challenge_bits)
            off += cw
            n = spec.response_size()
            out.append((e_i, spec.decode_response(data[off : off + n])))
            off += n
        if off != len(data):
            raise ValueError("trailing bytes in OR response")
        return tuple(out)


def or_compose(branches) -> OrProof:
    return OrProof(tuple(branches))


def extract_special_soundness(
    spec: SigmaProtocol, statement, t1: SigmaTranscript, t2: SigmaTranscript
):
    """Validated two-transcript extraction: checks the preconditions, runs
    the protocol's extractor, and re-checks the relation before returning."""
    if spec.encode_first(t1.a) != spec.encode_first(t2.a):
        raise ExtractionPreconditionError("transcripts do not share a first message")
    if t1.e == t2.e:
        raise ExtractionPreconditionError("transcripts share the challenge")
    if not spec.verify(statement, t1.a, t1.e, t1.z):
        raise ExtractionPreconditionError("first transcript does not verify")
    if not spec.verify(statement, t2.a, t2.e, t2.z):
        raise ExtractionPreconditionError("second transcript does not verify")
    witness = spec.extract(statement, t1.a, t1.e, t1.z, t2.e, t2.z)
    if not spec.relation(statement, witness):
        raise ExtractionMismatch("extracted candidate fails the relation")
    return witness
