"""Shared test utilities, including the exhaustive enumeration oracles."""

import itertools
from collections import Counter

from apkzk.algebra import (
    Scalar,
    SchnorrGroup,
    TOY_SCHNORR_4BIT,
    TransparentGroup,
    transparent_backend,
)
from apkzk.protocol import ProtocolConfig

Q = 11


class ScriptedRandom:
    """Replays a fixed list of draws; every draw is bounds-checked so a
    script that drifts from the implementation's draw order fails loudly."""

    def __init__(self, values):
        self.values = list(values)

    def randrange(self, a, b=None):
        lo, hi = (0, a) if b is None else (a, b)
        if not self.values:
            raise AssertionError("scripted randomness exhausted")
        v = self.values.pop(0)
        if not (lo <= v < hi):
            raise AssertionError(f"scripted value {v} outside [{lo}, {hi})")
        return v

    def getrandbits(self, k):
        return self.randrange(1 << k)


def toy_schnorr_group() -> SchnorrGroup:
    return SchnorrGroup(TOY_SCHNORR_4BIT)


def toy_transparent_group() -> TransparentGroup:
    return TransparentGroup(Q, "G")


def toy_pairing():
    return transparent_backend(Q)


def make_config(mode="pedersen", backend="schnorr", ots_bits=4) -> ProtocolConfig:
    group = toy_schnorr_group() if backend == "schnorr" else toy_transparent_group()
    return ProtocolConfig(group, toy_pairing(), mode=mode, ots_bits=ots_bits)


def pump_session(prover, verifier):
    """Drive one prover/verifier pair to completion; returns the ordered
    list of frames exchanged."""
    frames = []
    msg = prover.start()
    while msg is not None:
        frames.append(msg)
        reply = verifier.on_message(msg)
        if reply is None:
            break
        frames.append(reply)
        from apkzk.protocol import MSG_RESULT, parse_frame

        if parse_frame(reply)[0] == MSG_RESULT:
            break
        msg = prover.on_message(reply)
    return frames


def enumerate_honest(spec, stmt, wit, rand_dims, challenge):
    """All transcripts of the honest prover over its full randomness space;
    rand_dims is the number of Zq draws first_message makes."""
    out = []
    for draws in itertools.product(range(Q), repeat=rand_dims):
        state, a = spec.first_message(stmt, wit, ScriptedRandom(list(draws)))
        z = spec.respond(state, challenge)
        out.append((spec.encode_first(a), spec.encode_response(z)))
    return Counter(out)


def enumerate_simulated(spec, stmt, rand_dims, challenge):
    out = []
    for draws in itertools.product(range(Q), repeat=rand_dims):
        a, z = spec.simulate(stmt, challenge, ScriptedRandom(list(draws)))
        out.append((spec.encode_first(a), spec.encode_response(z)))
    return Counter(out)


def committed_sig_exhaustive_equality(challenge: int = 5) -> None:
    """Fixed-challenge transcript-distribution equality for the
    perfectly-hiding commitment mode of the committed-signature proof, by
    full enumeration on the transparent backend.

    Both distributions factor as (core) x (uniform responses), where
    core = (A, F, D, t) and the remaining first-message components are
    the fixed public reconstruction maps of (core, responses, challenge):
    M1 = g^y1 h^z1 C1^-e, M2 = g^y2 h^z2 C2^-e, B = v^y2 A^-e, and
    E = D^e F^-y1.  The check asserts (1) core multiset equality over the
    full core randomness of each side and (2) that both sides' responses
    sweep all of Zq^4 with the reconstruction maps holding pointwise;
    together these give equality of the full transcript distributions.
    The honest side ranges over every witness of the statement (one valid
    signature per usable randomness value), matching the simulator's
    implicit signature sampling; openings for each witness come from the
    known commitment-base trapdoor.
    """
    from apkzk.signatures import bb_keygen, bb_sign
    from apkzk.sigstmt import (
        PEDERSEN,
        CommittedSigStatement,
        CommittedSignatureProof,
        CommittedSigWitness,
        commit_pair,
    )

    group = toy_transparent_group()
    backend = toy_pairing()
    spec = CommittedSignatureProof(group, backend, PEDERSEN)
    vk, sk = bb_keygen(backend, ScriptedRandom([2, 3]))
    m = Scalar(4, Q)
    x_h = 4  # commitment-base trapdoor, known to the oracle
    h = group.exp(group.generator(), x_h)
    base_sig = bb_sign(backend, sk, m, ScriptedRandom([1]))
    base_scalar = spec.sigma_scalar(base_sig.sigma)
    c_sig, c_rand, h, o1, o2 = commit_pair(
        spec, h, (base_scalar, base_sig.r), ScriptedRandom([6, 8])
    )
    stmt = CommittedSigStatement(h, c_sig, c_rand, vk, m)
    e = challenge

    def witness_for(r_val: int) -> CommittedSigWitness:
        denom = (sk.x.value + m.value + sk.y.value * r_val) % Q
        sigma = backend.g1_group.exp(backend.g1(), pow(denom, -1, Q))
        s_int = spec.sigma_scalar(sigma)
        r1 = (o1.randomness.value + (base_scalar.value - s_int.value) * pow(x_h, -1, Q)) % Q
        r2 = (o2.randomness.value + (base_sig.r.value - r_val) * pow(x_h, -1, Q)) % Q
        wit = CommittedSigWitness(sigma, Scalar(r_val, Q), Scalar(r1, Q), Scalar(r2, Q))
        assert spec.relation(stmt, wit)
        return wit

    valid_r = [r for r in range(Q) if (sk.x.value + m.value + sk.y.value * r) % Q != 0]
    assert len(valid_r) == Q - 1

    def core(first):
        return (first.a_cap.value, first.f_cap.value, first.d_cap.value, first.t.value)

    def reconstruction_holds(first, resp):
        g = group
        gen = g.generator()
        me = (-e) % Q
        m1 = g.mul(g.mul(g.exp(gen, resp.y1), g.exp(h, resp.z1)), g.exp(c_sig, me))
        m2 = g.mul(g.mul(g.exp(gen, resp.y2), g.exp(h, resp.z2)), g.exp(c_rand, me))
        b = backend.g2_group.mul(
            backend.g2_group.exp(vk.v, resp.y2),
            backend.g2_group.exp(first.a_cap, me),
        )
        ecap = backend.g1_group.mul(
            backend.g1_group.exp(first.d_cap, e),
            backend.g1_group.exp(first.f_cap, -resp.y1),
        )
        return (
            first.m1 == m1 and first.m2 == m2
            and first.b_cap == b and first.e_cap == ecap
        )

    honest_cores = Counter()
    for r_val in valid_r:
        wit = witness_for(r_val)
        for t in range(1, Q):
            _, first = spec.first_message(stmt, wit, ScriptedRandom([0, 0, 0, 0, t]))
            honest_cores[core(first)] += 1
    sim_cores = Counter()
    for s in range(1, Q):
        for t in range(1, Q):
            first, _ = spec.simulate(stmt, e, ScriptedRandom([s, t, 0, 0, 0, 0]))
            sim_cores[core(first)] += 1
    assert honest_cores == sim_cores
    assert sum(honest_cores.values()) == (Q - 1) * (Q - 1)

    wit = witness_for(valid_r[0])
    honest_resps = set()
    for w1, w2, w3, w4 in itertools.product(range(Q), repeat=4):
        state, first = spec.first_message(stmt, wit, ScriptedRandom([w1, w2, w3, w4, 4]))
        resp = spec.respond(state, e)
        honest_resps.add((resp.y1.value, resp.z1.value, resp.y2.value, resp.z2.value))
        assert reconstruction_holds(first, resp)
    assert len(honest_resps) == Q ** 4

    sim_resps = set()
    for y1, y2, z1, z2 in itertools.product(range(Q), repeat=4):
        first, resp = spec.simulate(stmt, e, ScriptedRandom([2, 4, y1, y2, z1, z2]))
        sim_resps.add((resp.y1.value, resp.z1.value, resp.y2.value, resp.z2.value))
        assert reconstruction_holds(first, resp)
    assert len(sim_resps) == Q ** 4
