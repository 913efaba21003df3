"""Shared pieces of the attack harness: adversary interface, scheduler
events and actions, logging, and deterministic randomness derivation.

The adversary is a deterministic transition system: `step(state, event)`
returns the successor state and a list of actions.  All of its randomness
comes from RNG objects embedded in its explicit state, which is what makes
snapshot/restore rewinding sound.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from ..algebra import GroupElement, Scalar
from ..protocol import MSG_NAMES, MSG_RESULT, ProtocolConfig, parse_frame
from ..signatures import BBVerKey


def derive_rng(seed: int, label: str) -> random.Random:
    """Stable, platform-independent child RNG for a (seed, label) pair."""
    h = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return random.Random(int.from_bytes(h[:8], "big"))


# -- scheduler events delivered to the adversary ----------------------------


@dataclass(frozen=True)
class AttackBegin:
    pass


@dataclass(frozen=True)
class FromLeft:
    sid: str
    frame: bytes


@dataclass(frozen=True)
class FromRight:
    sid: str
    frame: bytes


# -- adversary actions -------------------------------------------------------


@dataclass(frozen=True)
class StartLeft:
    statement: GroupElement
    key_index: int
    inline_record: tuple[BBVerKey, BBVerKey] | None = None


@dataclass(frozen=True)
class StartRight:
    statement: GroupElement
    key_index: int


@dataclass(frozen=True)
class DeliverLeft:
    sid: str
    frame: bytes


@dataclass(frozen=True)
class DeliverRight:
    sid: str
    frame: bytes


@dataclass(frozen=True)
class EndAttack:
    pass


class Adversary:
    """Deterministic man-in-the-middle strategy.

    `preprocess` returns key records to register in the adversary's name
    plus opaque data carried into the initial state.  `step` must be a
    pure function of (state, event); fresh coins only ever come from RNGs
    stored inside the state.
    """

    def preprocess(self, rng: random.Random):
        return [], None

    def initial_state(self, prep, file, rng: random.Random):
        raise NotImplementedError

    def step(self, state, event):
        raise NotImplementedError


class AttackAborted(RuntimeError):
    """The adversary issued an action its model does not allow."""


@dataclass(frozen=True)
class LogEntry:
    seq: int
    session: str
    direction: str  # one of P->A, A->P, A->V, V->A
    msg_type: str
    data: bytes

    def to_json_dict(self) -> dict:
        return {
            "seq": self.seq,
            "session": self.session,
            "direction": self.direction,
            "msg_type": self.msg_type,
            "bytes_hex": self.data.hex(),
        }


def log_entry(seq: int, session: str, direction: str, frame: bytes) -> LogEntry:
    msg_type, _ = parse_frame(frame)
    return LogEntry(seq, session, direction, MSG_NAMES[msg_type], frame)


def session_transcript_bytes(log: list[LogEntry], sid: str) -> bytes:
    """Protocol-message bytes of one session in order; the RESULT outcome
    notification is not part of the session transcript."""
    return b"".join(e.data for e in log if e.session == sid and e.msg_type != "RESULT")


@dataclass
class StatementBank:
    """Pre-generated true statements with witnesses.  The scheduler hands
    the witness to each honest prover the adversary starts; adversaries
    that play prover themselves receive their own pairs explicitly."""

    config: ProtocolConfig
    pairs: list[tuple[GroupElement, Scalar]] = field(default_factory=list)

    @classmethod
    def generate(cls, config: ProtocolConfig, count: int, seed: int) -> "StatementBank":
        rng = derive_rng(seed, "statement-bank")
        g = config.commit_group
        pairs = []
        for _ in range(count):
            w = Scalar(rng.randrange(1, config.q), config.q)
            pairs.append((g.exp(g.generator(), w), w))
        return cls(config, pairs)

    def witness_for(self, statement: GroupElement) -> Scalar | None:
        for x, w in self.pairs:
            if x == statement:
                return w
        return None

    def statement(self, i: int) -> GroupElement:
        return self.pairs[i][0]

    def witness(self, i: int) -> Scalar:
        return self.pairs[i][1]


def frame_type(frame: bytes) -> int:
    return parse_frame(frame)[0]


def is_result(frame: bytes) -> bool:
    return frame_type(frame) == MSG_RESULT
