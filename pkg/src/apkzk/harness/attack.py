"""Deterministic scheduler running an adversary against honest parties.

The scheduler owns the registry and all honest sessions.  It processes
the adversary's actions in FIFO order; every reply an honest party emits
is delivered to the adversary immediately, and the actions that delivery
produces join the back of the queue.  Everything is a deterministic
function of the seed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..protocol import (
    MSG_START,
    NO_INDEX,
    KeyRecord,
    ProtocolConfig,
    ProverSession,
    PublicFile,
    SessionTranscript,
    VerifierSession,
    build_frame,
    verifier_keygen,
)
from .core import (
    Adversary,
    AttackBegin,
    DeliverLeft,
    DeliverRight,
    EndAttack,
    FromLeft,
    FromRight,
    LogEntry,
    StartLeft,
    StartRight,
    StatementBank,
    derive_rng,
    is_result,
    log_entry,
    session_transcript_bytes,
)


@dataclass
class HonestPartiesConfig:
    config: ProtocolConfig
    bank: StatementBank
    honest_verifiers: int = 1
    apk: bool = True  # False disables the authenticated-registry guarantee


@dataclass
class AttackView:
    """Everything observable about one run: the adversary's coins are the
    seed, plus inputs, the registry, and all session traffic in order."""

    seed: int
    file: PublicFile
    log: list[LogEntry] = field(default_factory=list)
    right_outcomes: dict[str, bool] = field(default_factory=dict)
    right_transcripts: dict[str, SessionTranscript] = field(default_factory=dict)
    left_sessions: list[str] = field(default_factory=list)
    right_sessions: list[str] = field(default_factory=list)
    left_completed: dict[str, bool] = field(default_factory=dict)
    aborted: str | None = None
    final_adversary_state: object = None

    def session_bytes(self, sid: str) -> bytes:
        return session_transcript_bytes(self.log, sid)

    def type_sequence(self) -> list[tuple[str, str, str]]:
        return [(e.session, e.direction, e.msg_type) for e in self.log]


def synth_start_frame(config: ProtocolConfig, statement, key_index: int) -> bytes:
    payload = (
        config.commit_group.encode(statement)
        + key_index.to_bytes(4, "big")
        + b"\x00"
    )
    return build_frame(MSG_START, payload)


class HonestRuntime:
    def __init__(self, adversary: Adversary, parties: HonestPartiesConfig, seed: int):
        self.adversary = adversary
        self.parties = parties
        self.config = parties.config
        self.seed = seed
        self.view = AttackView(seed=seed, file=PublicFile())
        self.provers: dict[str, ProverSession] = {}
        self.verifiers: dict[str, VerifierSession] = {}
        self.secrets = {}
        self._seq = 0
        self._left_count = 0
        self._right_count = 0

    # -- preprocessing -------------------------------------------------------

    def _preprocess(self):
        file = self.view.file
        reg_rng = derive_rng(self.seed, "registry")
        for k in range(self.parties.honest_verifiers):
            sec = verifier_keygen(
                self.config.pairing, file, f"honest:V{k + 1}", reg_rng
            )
            self.secrets[sec.key_index] = sec
        prep_records, prep = self.adversary.preprocess(
            derive_rng(self.seed, "adversary-prep")
        )
        for vk0, vk1 in prep_records:
            file.register(vk0, vk1, "adversary:A")
        file.freeze()
        return prep

    # -- logging -------------------------------------------------------------

    def _log(self, session: str, direction: str, frame: bytes) -> None:
        self.view.log.append(log_entry(self._seq, session, direction, frame))
        self._seq += 1

    # -- main loop -----------------------------------------------------------

    def run(self) -> AttackView:
        prep = self._preprocess()
        adv_state = self.adversary.initial_state(
            prep, self.view.file, derive_rng(self.seed, "adversary")
        )
        queue = deque()

        def deliver(event):
            nonlocal adv_state
            adv_state, actions = self.adversary.step(adv_state, event)
            queue.extend(actions)

        deliver(AttackBegin())
        while queue:
            action = queue.popleft()
            try:
                done = self._execute(action, deliver)
            except _Abort as abort:
                self.view.aborted = str(abort)
                self.view.final_adversary_state = adv_state
                return self.view
            if done:
                break
        self.view.final_adversary_state = adv_state
        return self.view

    def _execute(self, action, deliver) -> bool:
        cfg = self.config
        if isinstance(action, EndAttack):
            return True
        if isinstance(action, StartLeft):
            sid = f"L{self._left_count + 1}"
            self._left_count += 1
            witness = self.parties.bank.witness_for(action.statement)
            if witness is None:
                raise _Abort(f"no witness available for the statement of {sid}")
            if action.inline_record is not None:
                if self.parties.apk:
                    raise _Abort(
                        "substituted key refused: provers read the frozen "
                        "registry over an authenticated channel"
                    )
                record = KeyRecord(
                    NO_INDEX, action.inline_record[0], action.inline_record[1],
                    "substituted:A",
                )
                prover = ProverSession(
                    cfg, action.statement, witness, NO_INDEX, None,
                    derive_rng(self.seed, f"prover:{sid}"), record=record,
                )
            else:
                prover = ProverSession(
                    cfg, action.statement, witness, action.key_index,
                    self.view.file, derive_rng(self.seed, f"prover:{sid}"),
                )
            self.provers[sid] = prover
            self.view.left_sessions.append(sid)
            frame = prover.start()
            self._log(sid, "P->A", frame)
            deliver(FromLeft(sid, frame))
            return False
        if isinstance(action, StartRight):
            record = self.view.file.get(action.key_index)
            if not record.owner.startswith("honest:"):
                raise _Abort(
                    "right sessions must use a key registered by an honest verifier"
                )
            sid = f"R{self._right_count + 1}"
            self._right_count += 1
            verifier = VerifierSession(
                cfg, record, self.secrets[action.key_index],
                derive_rng(self.seed, f"verifier:{sid}"),
            )
            self.verifiers[sid] = verifier
            self.view.right_sessions.append(sid)
            start = synth_start_frame(cfg, action.statement, action.key_index)
            self._log(sid, "A->V", start)
            reply = verifier.on_message(start)
            if reply is not None:
                self._log(sid, "V->A", reply)
                deliver(FromRight(sid, reply))
            return False
        if isinstance(action, DeliverLeft):
            prover = self.provers.get(action.sid)
            if prover is None:
                raise _Abort(f"unknown left session {action.sid}")
            self._log(action.sid, "A->P", action.frame)
            reply = prover.on_message(action.frame)
            if prover.phase == "done" and not prover.aborted:
                self.view.left_completed[action.sid] = True
            if reply is not None:
                self._log(action.sid, "P->A", reply)
                deliver(FromLeft(action.sid, reply))
            return False
        if isinstance(action, DeliverRight):
            verifier = self.verifiers.get(action.sid)
            if verifier is None:
                raise _Abort(f"unknown right session {action.sid}")
            self._log(action.sid, "A->V", action.frame)
            reply = verifier.on_message(action.frame)
            if reply is not None:
                self._log(action.sid, "V->A", reply)
                if is_result(reply):
                    self.view.right_outcomes[action.sid] = verifier.outcome
                    if verifier.outcome and verifier.transcript:
                        self.view.right_transcripts[action.sid] = verifier.transcript
                deliver(FromRight(action.sid, reply))
            return False
        raise _Abort(f"unknown adversary action {action!r}")


class _Abort(Exception):
    pass


def run_attack(adversary: Adversary, parties: HonestPartiesConfig, seed: int) -> AttackView:
    """Execute preprocessing and the proof stage under the adversary's
    schedule and return the complete view."""
    return HonestRuntime(adversary, parties, seed).run()


def attack_success(view: AttackView, target_ordinal: int) -> bool:
    """Success per the transcript-exclusion rule: the target right session
    accepted AND its transcript differs from every left-session transcript."""
    sid = f"R{target_ordinal}"
    if not view.right_outcomes.get(sid):
        return False
    right_bytes = view.session_bytes(sid)
    for left in view.left_sessions:
        if view.session_bytes(left) == right_bytes:
            return False
    return True


def estimate_success(
    adversary_factory,
    parties: HonestPartiesConfig,
    target_ordinal: int,
    trials: int = 100,
    base_seed: int = 0,
) -> float:
    """Fraction of independently seeded runs in which the adversary wins
    the target right session under transcript exclusion."""
    if trials < 1:
        raise ValueError("need at least one trial")
    wins = 0
    for t in range(trials):
        view = run_attack(adversary_factory(), parties, base_seed + t)
        if view.aborted is None and attack_success(view, target_ordinal):
            wins += 1
    return wins / trials
