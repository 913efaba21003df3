"""Rewinding knowledge extractor for the man-in-the-middle setting.

The extractor plays every honest role itself: left-session prover and
right-session verifier.  In preprocessing it registers one key pair of
pairs and keeps BOTH signing keys (an honest verifier keeps one).  In the
proof stage it follows six handlers keyed on the adversary's messages:

  1. start-left: open the session and send the start announcement;
  2. start-right: answer with an honest verifier step;
  3. left VSTEP1: compose P Step 1 -- committing to a fresh signature on
     the one-time key when the session key is the extractor's own or one
     whose signing key has already been extracted, committing to
     randomness otherwise;
  4. right PSTEP1: honest V Step 2 using the retained signing key;
  5. left VSTEP2 with an accepting key-knowledge proof under an adversary
     key: rewind to before P Step 1, replay with a fresh challenge to
     collect a second accepting conversation, extract the signing key by
     special soundness, then rewind once more and redo P Step 1 on the
     signature branch;
  6. target-session PSTEP2 accepted: rewind V Step 2 with fresh
     challenges until a second accepting conversation appears, then hand
     both conversations to the predicate rho.

Rewinding is snapshot/restore of the deterministic world (adversary
state, session states, queue, logs); a restored world has no memory of
the discarded branch, which is exactly the reset discipline the
extraction argument needs.  Branch runs that themselves hit a missing-key
situation for a session whose rewind point predates the branch are
stalled rather than recursively rewound; the bundled scenarios never
need that depth and the budget accounting stays simple.
"""

from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass, field

from ..protocol import (
    MSG_PSTEP1,
    MSG_RESULT,
    MSG_VSTEP1,
    MSG_VSTEP2,
    DeferredCommitPlan,
    ProtocolConfig,
    ProverSession,
    PublicFile,
    SignatureCommitPlan,
    VerifierSession,
    parse_frame,
    pi_v_statement,
    verifier_keygen,
)
from ..sigma import (
    ExtractionError,
    OrWitness,
    SigmaTranscript,
    extract_special_soundness,
    rand_challenge,
)
from ..signatures import BBSigKey
from .attack import synth_start_frame
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
    derive_rng,
    frame_type,
    log_entry,
)


# -- queue items --------------------------------------------------------------


@dataclass(frozen=True)
class AdvEvent:
    event: object


@dataclass(frozen=True)
class StartLeftOp:
    sid: str
    statement: object
    key_index: int


@dataclass(frozen=True)
class LeftOp:
    sid: str
    frame: bytes


@dataclass(frozen=True)
class StartRightOp:
    sid: str
    statement: object
    key_index: int


@dataclass(frozen=True)
class RightOp:
    sid: str
    frame: bytes


@dataclass(frozen=True)
class EndOp:
    pass


# -- notices surfaced to the driver -------------------------------------------


@dataclass(frozen=True)
class ExtractionNeeded:
    sid: str
    key_index: int
    statement: object
    transcript: tuple  # (a_v, e_v, z_v) accepting conversation


@dataclass(frozen=True)
class LeftFailed:
    sid: str


@dataclass(frozen=True)
class LeftDone:
    sid: str


@dataclass(frozen=True)
class RightDone:
    sid: str
    accepted: bool


@dataclass(frozen=True)
class Ended:
    reason: str


@dataclass(frozen=True)
class Invalid:
    reason: str


class ExtractionWorld:
    """Deterministic world state: the adversary plus the extractor's side
    of every session.  deepcopy gives a faithful snapshot."""

    def __init__(self, adversary: Adversary, config: ProtocolConfig, seed: int):
        self.config = config
        self.seed = seed
        self.adversary = adversary
        file = PublicFile()
        self.secret = verifier_keygen(
            config.pairing, file, "honest:V1", derive_rng(seed, "extractor-keys"),
            retain_both=True,
        )
        prep_records, prep = adversary.preprocess(derive_rng(seed, "adversary-prep"))
        for vk0, vk1 in prep_records:
            file.register(vk0, vk1, "adversary:A")
        file.freeze()
        self.file = file
        self.adv_state = adversary.initial_state(
            prep, file, derive_rng(seed, "adversary")
        )
        self.rng = derive_rng(seed, "extractor-world")
        self.queue = deque([AdvEvent(AttackBegin())])
        self.left: dict[str, ProverSession] = {}
        self.left_key: dict[str, int] = {}
        self.right: dict[str, VerifierSession] = {}
        self.log: list[LogEntry] = []
        self.seq = 0
        self.counter = 0
        self.left_count = 0
        self.right_count = 0

    # -- helpers ---------------------------------------------------------

    def _log(self, session: str, direction: str, frame: bytes) -> None:
        self.log.append(log_entry(self.seq, session, direction, frame))
        self.seq += 1

    def _map_actions(self, actions) -> list:
        items = []
        for action in actions:
            if isinstance(action, StartLeft):
                if action.inline_record is not None:
                    return [Invalid("inline keys are refused in the authenticated model")]
                if not self.config.commit_group.contains(action.statement):
                    return [Invalid("left statement is not a group member")]
                self.left_count += 1
                items.append(
                    StartLeftOp(f"L{self.left_count}", action.statement, action.key_index)
                )
            elif isinstance(action, StartRight):
                record = self.file.get(action.key_index)
                if not record.owner.startswith("honest:"):
                    return [Invalid("right sessions must use an honest verifier's key")]
                self.right_count += 1
                items.append(
                    StartRightOp(f"R{self.right_count}", action.statement, action.key_index)
                )
            elif isinstance(action, DeliverLeft):
                items.append(LeftOp(action.sid, action.frame))
            elif isinstance(action, DeliverRight):
                items.append(RightOp(action.sid, action.frame))
            elif isinstance(action, EndAttack):
                items.append(EndOp())
            else:
                return [Invalid(f"unknown action {action!r}")]
        self.queue.extend(items)
        return []

    def _deliver(self, event) -> list:
        self.adv_state, actions = self.adversary.step(self.adv_state, event)
        return self._map_actions(actions)

    def _plan_for(self, key_index: int, keys: dict):
        if key_index == self.secret.key_index:
            j = self.rng.randrange(2)
            sk = self.secret.sk if j == self.secret.retained else self.secret.other_sk
            return SignatureCommitPlan(j, sk)
        if key_index in keys:
            branch, sk = keys[key_index]
            return SignatureCommitPlan(branch, sk)
        return DeferredCommitPlan()

    # -- one scheduler step ------------------------------------------------

    def step(self, keys: dict) -> list:
        if not self.queue:
            return [Ended("no pending work")]
        item = self.queue.popleft()
        self.counter += 1

        if isinstance(item, AdvEvent):
            return self._deliver(item.event)

        if isinstance(item, StartLeftOp):
            session = ProverSession(
                self.config, item.statement, None, item.key_index, self.file,
                derive_rng(self.seed, f"E-left:{item.sid}"),
                plan=DeferredCommitPlan(),
            )
            self.left[item.sid] = session
            self.left_key[item.sid] = item.key_index
            frame = session.start()
            self._log(item.sid, "P->A", frame)
            return self._deliver(FromLeft(item.sid, frame))

        if isinstance(item, LeftOp):
            return self._left_message(item.sid, item.frame, keys)

        if isinstance(item, StartRightOp):
            session = VerifierSession(
                self.config, self.file.get(item.key_index), self.secret,
                derive_rng(self.seed, f"E-right:{item.sid}"),
            )
            self.right[item.sid] = session
            start = synth_start_frame(self.config, item.statement, item.key_index)
            self._log(item.sid, "A->V", start)
            reply = session.on_message(start)
            if reply is None:
                return [RightDone(item.sid, False)]
            self._log(item.sid, "V->A", reply)
            return self._deliver(FromRight(item.sid, reply))

        if isinstance(item, RightOp):
            session = self.right.get(item.sid)
            if session is None:
                return [Invalid(f"unknown right session {item.sid}")]
            self._log(item.sid, "A->V", item.frame)
            reply = session.on_message(item.frame)
            notices = []
            if reply is not None:
                self._log(item.sid, "V->A", reply)
                if frame_type(reply) == MSG_RESULT:
                    notices.append(RightDone(item.sid, bool(session.outcome)))
                notices.extend(self._deliver(FromRight(item.sid, reply)))
            return notices

        if isinstance(item, EndOp):
            return [Ended("adversary ended the attack")]

        return [Invalid(f"unknown item {item!r}")]

    def _left_message(self, sid: str, frame: bytes, keys: dict) -> list:
        session = self.left.get(sid)
        if session is None:
            return [Invalid(f"unknown left session {sid}")]
        try:
            msg_type, payload = parse_frame(frame)
        except Exception:
            self._log(sid, "A->P", frame)
            session._abort()
            return [LeftFailed(sid)]
        self._log(sid, "A->P", frame)

        if msg_type == MSG_VSTEP1 and session.phase == "await_vstep1":
            session.plan = self._plan_for(self.left_key[sid], keys)
            reply = session.on_message(frame)
            if reply is None:
                return [LeftFailed(sid)]
            self._log(sid, "P->A", reply)
            return self._deliver(FromLeft(sid, reply))

        if msg_type == MSG_VSTEP2 and session.phase == "await_vstep2":
            session.frames.append(frame)
            try:
                session.parse_vstep2(payload)
            except Exception:
                session._abort()
                return [LeftFailed(sid)]
            if not session.pi_v_accepting():
                session._abort()
                return [LeftFailed(sid)]
            if session.plan.has_witness:
                reply = session.final_message()
                self._log(sid, "P->A", reply)
                notices = [LeftDone(sid)]
                notices.extend(self._deliver(FromLeft(sid, reply)))
                return notices
            transcript = (
                session._pi_v_first,
                session._pi_v_challenge,
                session._pi_v_response,
            )
            return [
                ExtractionNeeded(
                    sid, self.left_key[sid], pi_v_statement(session.record), transcript
                )
            ]

        if msg_type == MSG_RESULT:
            return []

        session._abort()
        return [LeftFailed(sid)]


@dataclass
class PiPConversation:
    first: object
    challenge: int
    response: object


@dataclass
class ExtrRight:
    """Extended conversation set for one right session: everything the
    extractor and adversary exchanged for it, over all rewinds, reduced
    to the main-proof conversations plus their shared statement."""

    sid: str
    statement: object
    conversations: list[PiPConversation] = field(default_factory=list)


@dataclass
class RhoOutcome:
    event: int | None  # 1 = relation witness, 2 = signature opening, None = failure
    witness: object | None
    branch: int | None
    note: str = ""


def predicate_rho(config: ProtocolConfig, extr: ExtrRight) -> RhoOutcome:
    """Pair two accepting main-proof conversations that share a first
    message and differ in challenge, extract by special soundness, and
    classify the result."""
    convs = extr.conversations
    spec = config.pi_p_spec
    for i in range(len(convs)):
        for j in range(i + 1, len(convs)):
            c1, c2 = convs[i], convs[j]
            if c1.challenge == c2.challenge:
                continue
            if spec.encode_first(c1.first) != spec.encode_first(c2.first):
                continue
            t1 = SigmaTranscript(c1.first, c1.challenge, c1.response)
            t2 = SigmaTranscript(c2.first, c2.challenge, c2.response)
            try:
                wit: OrWitness = extract_special_soundness(spec, extr.statement, t1, t2)
            except ExtractionError as exc:
                return RhoOutcome(None, None, None, f"extraction failed: {exc}")
            if wit.index == 0:
                return RhoOutcome(1, wit.witness, 0)
            return RhoOutcome(2, wit.witness, wit.index)
    return RhoOutcome(None, None, None, "no pairable conversations")


@dataclass
class ExtractionResult:
    target: str
    classification: str  # 'witness' | 'signature_opening' | 'failure'
    event: int | None
    witness: object | None
    extr_right: ExtrRight | None
    extracted_keys: dict[int, tuple[int, BBSigKey]]
    piv_rewinds: int
    pip_rewinds: int
    knowledge_error: float
    forward_view: list[LogEntry]
    branch_views: list[list[LogEntry]]
    note: str = ""

    @property
    def succeeded(self) -> bool:
        return self.classification == "witness"


class ExtractorE:
    def __init__(
        self,
        adversary: Adversary,
        config: ProtocolConfig,
        seed: int,
        target: int = 1,
        r_max: int = 64,
        step_cap: int = 50000,
    ):
        self.adversary = adversary
        self.config = config
        self.seed = seed
        self.target = target
        self.r_max = r_max
        self.step_cap = step_cap
        self.keys: dict[int, tuple[int, BBSigKey]] = {}
        self.driver_rng = derive_rng(seed, "extraction-driver")
        self.piv_rewinds = 0
        self.pip_rewinds = 0
        self._failed_rewinds = 0
        self.branch_views: list[list[LogEntry]] = []

    # -- public entry ------------------------------------------------------

    def run(self) -> ExtractionResult:
        world = ExtractionWorld(self.adversary, self.config, self.seed)
        target_sid = f"R{self.target}"
        snapshots: dict[str, tuple[int, ExtractionWorld]] = {}
        target_snap: tuple[int, ExtractionWorld] | None = None
        steps = 0
        while world.queue and steps < self.step_cap:
            steps += 1
            head = world.queue[0]
            if isinstance(head, LeftOp) and frame_type(head.frame) == MSG_VSTEP1:
                snapshots[head.sid] = (world.counter, copy.deepcopy(world))
            if (
                isinstance(head, RightOp)
                and head.sid == target_sid
                and frame_type(head.frame) == MSG_PSTEP1
            ):
                target_snap = (world.counter, copy.deepcopy(world))
            notices = world.step(self.keys)
            restored = False
            for n in notices:
                if isinstance(n, Invalid):
                    return self._failure(world, f"attack aborted: {n.reason}")
                if isinstance(n, Ended):
                    return self._failure(
                        world, "attack ended before the target session accepted"
                    )
                if isinstance(n, ExtractionNeeded):
                    if n.sid not in snapshots:
                        return self._failure(world, f"no rewind point for {n.sid}")
                    if n.key_index not in self.keys:
                        second = self._second_key_conversation(
                            snapshots[n.sid][1], n
                        )
                        if second is None:
                            return self._failure(
                                world,
                                f"rewind budget exhausted extracting the key of {n.sid}",
                            )
                        t1 = SigmaTranscript(*n.transcript)
                        try:
                            wit = extract_special_soundness(
                                self.config.pi_v_spec, n.statement, t1, second
                            )
                        except ExtractionError as exc:
                            return self._failure(world, f"key extraction failed: {exc}")
                        x, y = wit.witness
                        self.keys[n.key_index] = (wit.index, BBSigKey(x, y))
                    # Rewind to before P Step 1 and redo it on the
                    # signature branch now that the key is known.
                    counter, snap = snapshots[n.sid]
                    world = copy.deepcopy(snap)
                    snapshots = {
                        s: (c, w) for s, (c, w) in snapshots.items() if c <= counter
                    }
                    if target_snap is not None and target_snap[0] > counter:
                        target_snap = None
                    restored = True
                    break
                if isinstance(n, RightDone) and n.sid == target_sid and n.accepted:
                    return self._finish(world, target_snap, target_sid)
            if restored:
                continue
        return self._failure(world, "step cap reached before the target accepted")

    # -- rewinding helpers ---------------------------------------------------

    def _run_branch(self, w: ExtractionWorld, capture):
        steps = 0
        base = len(w.log)
        try:
            while w.queue and steps < self.step_cap:
                steps += 1
                notices = w.step(self.keys)
                for n in notices:
                    got = capture(n)
                    if got is not None:
                        return got
                    if isinstance(n, (Invalid, Ended)):
                        return None
                    # A missing-key situation inside a branch stalls that
                    # session; the branch keeps running toward its goal.
            return None
        finally:
            self.branch_views.append(w.log[base:])

    def _second_key_conversation(self, snap: ExtractionWorld, n: ExtractionNeeded):
        _, e1, _ = n.transcript
        for _ in range(self.r_max):
            self.piv_rewinds += 1
            e2 = rand_challenge(self.driver_rng, self.config.challenge_bits)
            if e2 == e1:
                self._failed_rewinds += 1
                continue
            w = copy.deepcopy(snap)
            w.left[n.sid].forced_pi_v_challenge = e2

            def want(notice):
                if isinstance(notice, ExtractionNeeded) and notice.sid == n.sid:
                    return notice
                return None

            got = self._run_branch(w, want)
            if got is None or got.transcript[1] != e2:
                self._failed_rewinds += 1
                continue
            a2, e2b, z2 = got.transcript
            return SigmaTranscript(a2, e2b, z2)
        return None

    def _finish(self, world: ExtractionWorld, target_snap, target_sid: str):
        session = world.right[target_sid]
        conv1 = PiPConversation(
            session.pi_p_first, session.pi_p_challenge, session.pi_p_response
        )
        statement = session.pi_p_statement
        extr = ExtrRight(target_sid, statement, [conv1])
        if target_snap is None:
            return self._result(world, extr, RhoOutcome(None, None, None, "no rewind point"))
        for _ in range(self.r_max):
            self.pip_rewinds += 1
            e2 = rand_challenge(self.driver_rng, self.config.challenge_bits)
            if e2 == conv1.challenge:
                self._failed_rewinds += 1
                continue
            w = copy.deepcopy(target_snap[1])
            w.right[target_sid].forced_pi_p_challenge = e2

            def want(notice):
                if (
                    isinstance(notice, RightDone)
                    and notice.sid == target_sid
                    and notice.accepted
                ):
                    return notice
                return None

            got = self._run_branch(w, want)
            if got is None:
                self._failed_rewinds += 1
                continue
            s2 = w.right[target_sid]
            if s2.pi_p_statement != statement:
                self._failed_rewinds += 1
                continue
            extr.conversations.append(
                PiPConversation(s2.pi_p_first, s2.pi_p_challenge, s2.pi_p_response)
            )
            outcome = predicate_rho(self.config, extr)
            return self._result(world, extr, outcome)
        return self._result(
            world, extr, RhoOutcome(None, None, None, "rewind budget exhausted")
        )

    # -- result assembly -----------------------------------------------------

    def _mu(self) -> float:
        attempts = max(1, self.piv_rewinds + self.pip_rewinds)
        return self.config.pi_p_spec.knowledge_error + self._failed_rewinds / attempts

    def _result(self, world, extr, outcome: RhoOutcome) -> ExtractionResult:
        classification = {1: "witness", 2: "signature_opening", None: "failure"}[
            outcome.event
        ]
        return ExtractionResult(
            target=extr.sid,
            classification=classification,
            event=outcome.event,
            witness=outcome.witness,
            extr_right=extr,
            extracted_keys=dict(self.keys),
            piv_rewinds=self.piv_rewinds,
            pip_rewinds=self.pip_rewinds,
            knowledge_error=self._mu(),
            forward_view=list(world.log),
            branch_views=self.branch_views,
            note=outcome.note,
        )

    def _failure(self, world, note: str) -> ExtractionResult:
        return ExtractionResult(
            target=f"R{self.target}",
            classification="failure",
            event=None,
            witness=None,
            extr_right=None,
            extracted_keys=dict(self.keys),
            piv_rewinds=self.piv_rewinds,
            pip_rewinds=self.pip_rewinds,
            knowledge_error=self._mu(),
            forward_view=list(world.log),
            branch_views=self.branch_views,
            note=note,
        )


def extractor_E(
    adversary: Adversary,
    config: ProtocolConfig,
    seed: int,
    target: int = 1,
    r_max: int = 64,
) -> ExtractionResult:
    """Run the extractor against a deterministic adversary and return the
    extended conversations, the classified witness, and accounting."""
    return ExtractorE(adversary, config, seed, target=target, r_max=r_max).run()
