"""Bundled deterministic adversaries, each with a declared expected outcome.

relay            pipe one right session byte-for-byte from a left session;
                 the verifier accepts but transcript exclusion voids it.
maul             relay, but flip one bit of the final response; the
                 one-time-signature binding of tran makes the verifier
                 reject every time.
knowledgeable    prove a right session honestly with an own witness;
                 full success (nothing to exclude).
nesting          wrapped honest prover: two right sessions proved with own
                 witnesses and two left sessions played by relaying the
                 verifier's key-knowledge proof out of the right sessions,
                 interleaved so one pair nests inside the other.
self_registering register an own key pair in preprocessing and prove
                 knowledge of its signing key in a left session; the
                 extractor's handler-5 rewind recovers that signing key.
bpk_substitution hand the prover a fabricated key instead of a registry
                 index; only expressible when the authenticated-registry
                 guarantee is switched off.
null             end the attack immediately.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..protocol import (
    MSG_PSTEP1,
    MSG_PSTEP2,
    MSG_RESULT,
    MSG_START,
    MSG_VSTEP1,
    MSG_VSTEP2,
    NO_INDEX,
    KeyRecord,
    ProtocolConfig,
    ProverSession,
    VerifierSession,
    VerifierSecret,
    build_frame,
    parse_frame,
)
from ..algebra import scalar_width
from ..sigma import decode_challenge, encode_challenge, rand_challenge
from ..signatures import bb_keygen
from .core import (
    Adversary,
    AttackBegin,
    DeliverLeft,
    DeliverRight,
    EndAttack,
    FromLeft,
    FromRight,
    StartLeft,
    StartRight,
    StatementBank,
)


class NullAdversary(Adversary):
    def initial_state(self, prep, file, rng):
        return {}

    def step(self, state, event):
        if isinstance(event, AttackBegin):
            return state, [EndAttack()]
        return state, []


class RelayAdversary(Adversary):
    """Forward every message between one left and one right session; with
    maul=True, flip the low bit of the last response byte on the way to
    the verifier."""

    def __init__(self, config: ProtocolConfig, statement, key_index: int = 1, maul: bool = False):
        self.config = config
        self.statement = statement
        self.key_index = key_index
        self.maul = maul

    def initial_state(self, prep, file, rng):
        return {"rng": rng}

    def _maul_frame(self, frame: bytes) -> bytes:
        flipped = bytearray(frame)
        # last byte of the main-proof response region inside PSTEP2
        idx = 5 + self.config.pi_p_spec.response_size() - 1
        flipped[idx] ^= 0x01
        return bytes(flipped)

    def step(self, state, event):
        if isinstance(event, AttackBegin):
            return state, [StartLeft(self.statement, self.key_index)]
        if isinstance(event, FromLeft):
            msg_type, _ = parse_frame(event.frame)
            if msg_type == MSG_START:
                return state, [StartRight(self.statement, self.key_index)]
            frame = event.frame
            if self.maul and msg_type == MSG_PSTEP2:
                frame = self._maul_frame(frame)
            return state, [DeliverRight("R1", frame)]
        if isinstance(event, FromRight):
            msg_type, _ = parse_frame(event.frame)
            if msg_type == MSG_RESULT:
                return state, [EndAttack()]
            return state, [DeliverLeft("L1", event.frame)]
        return state, []


class KnowledgeableAdversary(Adversary):
    """Holds its own witness and proves the right session honestly."""

    def __init__(self, config: ProtocolConfig, statement, witness, key_index: int = 1):
        self.config = config
        self.statement = statement
        self.witness = witness
        self.key_index = key_index

    def initial_state(self, prep, file, rng):
        prover = ProverSession(
            self.config, self.statement, self.witness, self.key_index, file,
            random.Random(rng.getrandbits(64)),
        )
        prover.start()
        return {"prover": prover}

    def step(self, state, event):
        if isinstance(event, AttackBegin):
            return state, [StartRight(self.statement, self.key_index)]
        if isinstance(event, FromRight):
            msg_type, _ = parse_frame(event.frame)
            if msg_type == MSG_RESULT:
                return state, [EndAttack()]
            reply = state["prover"].on_message(event.frame)
            if reply is None:
                return state, [EndAttack()]
            return state, [DeliverRight("R1", reply)]
        return state, []


class WrappedProverAdversary(Adversary):
    """Two right sessions proved with own witnesses, two left sessions
    under the honest key completed by relaying the verifier's
    key-knowledge proof out of the rights, with the second pair nested
    inside the first:

        R1 VSTEP1 .. L1 PSTEP1 | R2+L2 run to completion | R1 resumes

    The key-knowledge challenge each left prover picks is injected into
    the paired right session, so the verifier itself answers it.
    """

    def __init__(self, config: ProtocolConfig, right_pairs, left_statements, key_index: int = 1):
        if len(right_pairs) != 2 or len(left_statements) != 2:
            raise ValueError("scenario is scripted for two pairs of sessions")
        self.config = config
        self.right_pairs = list(right_pairs)
        self.left_statements = list(left_statements)
        self.key_index = key_index

    def initial_state(self, prep, file, rng):
        return {
            "rng": rng,
            "file": file,
            "vstep1": {},  # right sid -> verifier's VSTEP1 frame
            "ev": {},  # right sid -> key-proof challenge from the left prover
            "prover": {},  # right sid -> embedded ProverSession
            "final": {},  # right sid -> final PSTEP2 frame to deliver
        }

    def _pair(self, sid: str) -> str:
        return {"L1": "R1", "R1": "L1", "L2": "R2", "R2": "L2"}[sid]

    def _parse_ev(self, payload: bytes) -> int:
        cfg = self.config
        return decode_challenge(
            payload[-scalar_width(cfg.q):], cfg.q, cfg.challenge_bits
        )

    def _embedded_pstep1(self, state, rid: str):
        idx = 1 if rid == "R1" else 2
        x, w = self.right_pairs[idx - 1]
        prover = ProverSession(
            self.config, x, w, self.key_index, state["file"],
            random.Random(state["rng"].getrandbits(64)),
        )
        prover.forced_pi_v_challenge = state["ev"][rid]
        prover.start()
        state["prover"][rid] = prover
        return prover.on_message(state["vstep1"][rid])

    def _left_vstep2(self, state, payload: bytes) -> bytes:
        cfg = self.config
        z_v = payload[: cfg.pi_v_spec.response_size()]
        e_p = rand_challenge(state["rng"], cfg.challenge_bits)
        return build_frame(MSG_VSTEP2, z_v + encode_challenge(e_p, cfg.q))

    def step(self, state, event):
        cfg = self.config
        if isinstance(event, AttackBegin):
            return state, [StartRight(self.right_pairs[0][0], self.key_index)]

        if isinstance(event, FromRight):
            rid = event.sid
            msg_type, payload = parse_frame(event.frame)
            if msg_type == MSG_VSTEP1:
                state["vstep1"][rid] = event.frame
                left_stmt = self.left_statements[0 if rid == "R1" else 1]
                return state, [StartLeft(left_stmt, self.key_index)]
            if msg_type == MSG_VSTEP2:
                state["final"][rid] = state["prover"][rid].on_message(event.frame)
                return state, [DeliverLeft(self._pair(rid), self._left_vstep2(state, payload))]
            if msg_type == MSG_RESULT:
                if rid == "R2":
                    # resume the outer pair
                    return state, [DeliverRight("R1", self._embedded_pstep1(state, "R1"))]
                return state, [EndAttack()]
            return state, []

        if isinstance(event, FromLeft):
            lid = event.sid
            rid = self._pair(lid)
            msg_type, payload = parse_frame(event.frame)
            if msg_type == MSG_START:
                return state, [DeliverLeft(lid, state["vstep1"][rid])]
            if msg_type == MSG_PSTEP1:
                state["ev"][rid] = self._parse_ev(payload)
                if lid == "L1":
                    # nest the second pair inside the first
                    return state, [StartRight(self.right_pairs[1][0], self.key_index)]
                return state, [DeliverRight(rid, self._embedded_pstep1(state, rid))]
            if msg_type == MSG_PSTEP2:
                return state, [DeliverRight(rid, state["final"][rid])]
            return state, []
        return state, []


class SelfRegisteringAdversary(Adversary):
    """Registers an own key pair in preprocessing and plays an honest left
    verifier under it, proving knowledge of its signing key."""

    def __init__(self, config: ProtocolConfig, statement):
        self.config = config
        self.statement = statement

    def preprocess(self, rng):
        vk0, sk0 = bb_keygen(self.config.pairing, rng)
        vk1, sk1 = bb_keygen(self.config.pairing, rng)
        b = rng.randrange(2)
        return [(vk0, vk1)], {"sk0": sk0, "sk1": sk1, "b": b}

    def initial_state(self, prep, file, rng):
        index = next(
            r.index for r in file.records if r.owner.startswith("adversary:")
        )
        sk = prep["sk0"] if prep["b"] == 0 else prep["sk1"]
        secret = VerifierSecret(index, prep["b"], sk)
        return {
            "rng": rng,
            "file": file,
            "index": index,
            "secret": secret,
            "verifier": None,
            "left_accepted": None,
        }

    def step(self, state, event):
        if isinstance(event, AttackBegin):
            return state, [StartLeft(self.statement, state["index"])]
        if isinstance(event, FromLeft):
            msg_type, _ = parse_frame(event.frame)
            if msg_type == MSG_START:
                record = state["file"].get(state["index"])
                state["verifier"] = VerifierSession(
                    self.config, record, state["secret"],
                    random.Random(state["rng"].getrandbits(64)),
                )
            reply = state["verifier"].on_message(event.frame)
            if msg_type == MSG_PSTEP2:
                state["left_accepted"] = state["verifier"].outcome
                return state, [EndAttack()]
            if reply is None:
                return state, [EndAttack()]
            return state, [DeliverLeft(event.sid, reply)]
        return state, []


class SubstitutionAdversary(Adversary):
    """Delivers a fabricated key record to the prover instead of a registry
    index.  The scheduler refuses the action under the authenticated model;
    with authentication off the prover runs under the adversary's key."""

    def __init__(self, config: ProtocolConfig, statement):
        self.config = config
        self.statement = statement

    def initial_state(self, prep, file, rng):
        vk0, sk0 = bb_keygen(self.config.pairing, rng)
        vk1, sk1 = bb_keygen(self.config.pairing, rng)
        b = rng.randrange(2)
        record = KeyRecord(NO_INDEX, vk0, vk1, "substituted:A")
        secret = VerifierSecret(NO_INDEX, b, sk0 if b == 0 else sk1)
        verifier = VerifierSession(
            self.config, record, secret, random.Random(rng.getrandbits(64)),
            allow_inline=True,
        )
        return {
            "record": record,
            "verifier": verifier,
            "left_accepted": None,
        }

    def step(self, state, event):
        if isinstance(event, AttackBegin):
            rec = state["record"]
            return state, [
                StartLeft(self.statement, NO_INDEX, inline_record=(rec.vk0, rec.vk1))
            ]
        if isinstance(event, FromLeft):
            msg_type, _ = parse_frame(event.frame)
            reply = state["verifier"].on_message(event.frame)
            if msg_type == MSG_PSTEP2:
                state["left_accepted"] = state["verifier"].outcome
                return state, [EndAttack()]
            if reply is None:
                return state, [EndAttack()]
            return state, [DeliverLeft(event.sid, reply)]
        return state, []


@dataclass
class ScenarioSpec:
    name: str
    description: str
    build: object  # callable(config, bank) -> Adversary
    target: int = 1
    apk: bool = True
    expected_estimate: float | None = None


def _relay(config, bank):
    return RelayAdversary(config, bank.statement(0))


def _maul(config, bank):
    return RelayAdversary(config, bank.statement(0), maul=True)


def _knowledgeable(config, bank):
    return KnowledgeableAdversary(config, bank.statement(0), bank.witness(0))


def _nesting(config, bank):
    rights = [(bank.statement(0), bank.witness(0)), (bank.statement(1), bank.witness(1))]
    lefts = [bank.statement(2), bank.statement(3)]
    return WrappedProverAdversary(config, rights, lefts)


def _self_registering(config, bank):
    return SelfRegisteringAdversary(config, bank.statement(0))


def _substitution(config, bank):
    return SubstitutionAdversary(config, bank.statement(0))


def _null(config, bank):
    return NullAdversary()


SCENARIOS: dict[str, ScenarioSpec] = {
    "relay": ScenarioSpec(
        "relay",
        "verifier accepts but transcript exclusion scores it zero",
        _relay,
        expected_estimate=0.0,
    ),
    "maul": ScenarioSpec(
        "maul",
        "one flipped response bit; the signed transcript check rejects",
        _maul,
        expected_estimate=0.0,
    ),
    "knowledgeable": ScenarioSpec(
        "knowledgeable",
        "adversary proves with its own witness; full success",
        _knowledgeable,
        expected_estimate=1.0,
    ),
    "nesting": ScenarioSpec(
        "nesting",
        "wrapped honest prover, two nested left/right pairs",
        _nesting,
        expected_estimate=1.0,
    ),
    "self_registering": ScenarioSpec(
        "self_registering",
        "adversary proves knowledge of its own registered key",
        _self_registering,
    ),
    "bpk_substitution": ScenarioSpec(
        "bpk_substitution",
        "prover runs under a fabricated key when authentication is off",
        _substitution,
        apk=False,
    ),
    "null": ScenarioSpec("null", "immediate end of attack", _null),
}

SCENARIOS["schedule-nesting"] = SCENARIOS["nesting"]


def bank_for(config: ProtocolConfig, seed: int, count: int = 6) -> StatementBank:
    return StatementBank.generate(config, count, seed)
