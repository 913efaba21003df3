"""The four-message argument protocol and its registry plumbing.

Session flow in number-theoretic mode (the implemented one):

  START   P -> V   statement x and the registry index i (session start)
  VSTEP1  V -> P   first message of the key-knowledge proof + commitment
                   base f (Pedersen mode only)
  PSTEP1  P -> V   one-time key vk', commitments C, first message of the
                   main proof, challenge for the key-knowledge proof
  VSTEP2  V -> P   key-knowledge response + challenge e for the main proof
  PSTEP2  P -> V   main-proof response z + one-time signature over tran
  RESULT  V -> P   accept/reject notification (not a protocol message)

The verifier proves knowledge of one of its two registered signing keys
(an OR of two discrete-log pairs, witness-independent in its first
message).  The prover proves knowledge of a witness for x OR of an
opening of C to a valid signature on vk' under either registered key.
tran is the byte-canonical concatenation of the frames through VSTEP2
plus the length-prefixed z bytes; both sides assemble it independently
and the one-time signature binds it.

The generic 5-round variant (P Step 0 carrying a commitment-receiver
message for the key-knowledge proof) is an interface hook only.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .algebra import Group, GroupElement, PairingBackend, Scalar, rand_scalar
from .commitments import Opening, pedersen_receiver_setup
from .sigma import (
    DlPair,
    OrProof,
    OrWitness,
    SchnorrDL,
    decode_challenge,
    encode_challenge,
    rand_challenge,
)
from .signatures import (
    BBSigKey,
    BBSignature,
    BBVerKey,
    bb_keygen,
    bb_sign,
    bb_verkey_size,
    decode_bb_verkey,
    decode_ots_pubkey,
    decode_ots_signature,
    hash_to_zq_star,
    ots_keygen,
    ots_pubkey_size,
    ots_sign,
    ots_verify,
    sha256_digest,
)
from .sigstmt import (
    PEDERSEN,
    CommittedSignatureProof,
    CommittedSigStatement,
    CommittedSigWitness,
    commit_pair,
)

MSG_START = 1
MSG_VSTEP1 = 2
MSG_PSTEP1 = 3
MSG_VSTEP2 = 4
MSG_PSTEP2 = 5
MSG_RESULT = 6

MSG_NAMES = {
    MSG_START: "START",
    MSG_VSTEP1: "VSTEP1",
    MSG_PSTEP1: "PSTEP1",
    MSG_VSTEP2: "VSTEP2",
    MSG_PSTEP2: "PSTEP2",
    MSG_RESULT: "RESULT",
}

NO_INDEX = 0xFFFFFFFF  # START index sentinel for an inline (substituted) key


class ProtocolError(RuntimeError):
    pass


def build_frame(msg_type: int, payload: bytes) -> bytes:
    return (len(payload) + 1).to_bytes(4, "big") + bytes([msg_type]) + payload


def parse_frame(frame: bytes) -> tuple[int, bytes]:
    if len(frame) < 5:
        raise ProtocolError("frame too short")
    length = int.from_bytes(frame[:4], "big")
    if length != len(frame) - 4:
        raise ProtocolError("frame length mismatch")
    msg_type = frame[4]
    if msg_type not in MSG_NAMES:
        raise ProtocolError(f"unknown message type {msg_type}")
    return msg_type, frame[5:]


class ByteReader:
    def __init__(self, data: bytes):
        self.data = data
        self.off = 0

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.data):
            raise ProtocolError("truncated payload")
        chunk = self.data[self.off : self.off + n]
        self.off += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return int.from_bytes(self.take(4), "big")

    def done(self) -> None:
        if self.off != len(self.data):
            raise ProtocolError("trailing bytes in payload")


class ProtocolConfig:
    """Immutable bundle of groups, proof specs, and knobs for one protocol
    deployment.  Snapshots share it."""

    def __init__(
        self,
        commit_group: Group,
        pairing: PairingBackend,
        mode: str = PEDERSEN,
        ots_bits: int = 4,
        digest=sha256_digest,
        rounds: str = "nt",
    ):
        if commit_group.order != pairing.order:
            raise ValueError("commitment group and pairing must share q")
        if rounds not in ("nt", "generic"):
            raise ValueError("rounds must be 'nt' or 'generic'")
        self.commit_group = commit_group
        self.pairing = pairing
        self.mode = mode
        self.ots_bits = ots_bits
        self.digest = digest
        self.rounds = rounds
        self.q = commit_group.order
        self.rl_spec = SchnorrDL(commit_group)
        self.stmt2_spec = CommittedSignatureProof(commit_group, pairing, mode)
        g2g = pairing.g2_group
        self.pi_v_spec = OrProof((DlPair(g2g), DlPair(g2g)))
        self.pi_p_spec = OrProof((self.rl_spec, self.stmt2_spec, self.stmt2_spec))
        self.challenge_bits = self.pi_p_spec.challenge_bits

    def __deepcopy__(self, memo):
        return self

    def __copy__(self):
        return self


@dataclass(frozen=True)
class KeyRecord:
    index: int
    vk0: BBVerKey
    vk1: BBVerKey
    owner: str

    def payload(self, pairing: PairingBackend) -> bytes:
        return self.vk0.encode(pairing) + self.vk1.encode(pairing)


def record_payload_size(pairing: PairingBackend) -> int:
    return 2 * bb_verkey_size(pairing)


def decode_record_payload(data: bytes, pairing: PairingBackend) -> tuple[BBVerKey, BBVerKey]:
    n = bb_verkey_size(pairing)
    if len(data) != 2 * n:
        raise ProtocolError("bad key record payload")
    return decode_bb_verkey(data[:n], pairing), decode_bb_verkey(data[n:], pairing)


class PublicFile:
    """Registry of verifier keys: append-only until frozen, immutable and
    readable by every prover afterward."""

    def __init__(self):
        self.records: list[KeyRecord] = []
        self.frozen = False

    def register(self, vk0: BBVerKey, vk1: BBVerKey, owner: str) -> int:
        if self.frozen:
            raise ProtocolError("public file is frozen; registration refused")
        index = len(self.records) + 1
        self.records.append(KeyRecord(index, vk0, vk1, owner))
        return index

    def freeze(self) -> None:
        self.frozen = True

    def get(self, index: int) -> KeyRecord:
        if not (1 <= index <= len(self.records)):
            raise ProtocolError(f"no registry entry {index}")
        return self.records[index - 1]

    def __deepcopy__(self, memo):
        if not self.frozen:
            raise ProtocolError("only frozen files are shared")
        return self

    def __len__(self):
        return len(self.records)


@dataclass(frozen=True)
class VerifierSecret:
    key_index: int
    retained: int  # which of the two signing keys this verifier holds
    sk: BBSigKey
    other_sk: BBSigKey | None = None  # the extractor's verifier keeps both


def verifier_keygen(
    pairing: PairingBackend,
    file: PublicFile,
    owner: str,
    rng: random.Random,
    retain_both: bool = False,
) -> VerifierSecret:
    """Generate both key pairs, register (vk0, vk1), retain one signing key
    (chosen by coin); the extractor's variant keeps the other one too."""
    vk0, sk0 = bb_keygen(pairing, rng)
    vk1, sk1 = bb_keygen(pairing, rng)
    b = rng.randrange(2)
    index = file.register(vk0, vk1, owner)
    keep, other = (sk0, sk1) if b == 0 else (sk1, sk0)
    return VerifierSecret(index, b, keep, other if retain_both else None)


def pi_v_statement(record: KeyRecord):
    return ((record.vk0.u, record.vk0.v), (record.vk1.u, record.vk1.v))


def pi_p_statement(
    config: ProtocolConfig,
    x: GroupElement,
    h: GroupElement,
    c_sig,
    c_rand,
    record: KeyRecord,
    m: Scalar,
):
    base = CommittedSigStatement(h, c_sig, c_rand, record.vk0, m)
    other = CommittedSigStatement(h, c_sig, c_rand, record.vk1, m)
    return (x, base, other)


@dataclass(frozen=True)
class SessionTranscript:
    tran: bytes
    delta_bytes: bytes
    vk_prime: bytes

    def full_bytes(self) -> bytes:
        return self.tran + self.delta_bytes


def assemble_tran(frames: list[bytes], z_bytes: bytes) -> bytes:
    return b"".join(frames) + len(z_bytes).to_bytes(4, "big") + z_bytes


# ---------------------------------------------------------------------------
# P Step 1 commitment strategies.  The honest prover commits to a random
# dummy value and proves the witness branch; parties that know a signing
# key commit to a fresh signature on vk' and prove the matching signature
# branch; a deferred plan commits like the honest prover but leaves the
# main proof unanswerable (the extractor rewinds such sessions before
# ever needing the response).
# ---------------------------------------------------------------------------


class HonestCommitPlan:
    def __init__(self, witness: Scalar):
        self.witness = witness
        self.has_witness = True

    def values(self, config, m, rng):
        return rand_scalar(rng, config.q), rand_scalar(rng, config.q)

    def or_witness(self, config, o_sig: Opening, o_rand: Opening) -> OrWitness:
        return OrWitness(0, self.witness)


class SignatureCommitPlan:
    def __init__(self, branch: int, sigkey: BBSigKey):
        if branch not in (0, 1):
            raise ValueError("branch selects one of the two registered keys")
        self.branch = branch
        self.sigkey = sigkey
        self.has_witness = True
        self._sig: BBSignature | None = None

    def values(self, config, m: Scalar, rng):
        self._sig = bb_sign(config.pairing, self.sigkey, m, rng)
        return config.stmt2_spec.sigma_scalar(self._sig.sigma), self._sig.r

    def or_witness(self, config, o_sig: Opening, o_rand: Opening) -> OrWitness:
        wit = CommittedSigWitness(
            self._sig.sigma, self._sig.r, o_sig.randomness, o_rand.randomness
        )
        return OrWitness(1 + self.branch, wit)


class DeferredCommitPlan:
    """Commit to randomness with no way to answer the main proof; only
    meaningful inside the extractor, which rewinds before responding."""

    has_witness = False

    def values(self, config, m, rng):
        return rand_scalar(rng, config.q), rand_scalar(rng, config.q)

    def or_witness(self, config, o_sig, o_rand) -> OrWitness:
        # Placeholder branch-0 witness: makes the first message (which is
        # witness-independent on branch 0) well-formed.
        return OrWitness(0, Scalar(0, config.q))


class ProverSession:
    """Prover state machine for one session.  Messages arrive as frames;
    out-of-order or malformed input aborts the session."""

    def __init__(
        self,
        config: ProtocolConfig,
        statement: GroupElement,
        witness: Scalar | None,
        key_index: int,
        file: PublicFile | None,
        rng: random.Random,
        record: KeyRecord | None = None,
        plan=None,
    ):
        if config.rounds == "generic":
            raise NotImplementedError(
                "generic 5-round mode is an interface hook; only the "
                "number-theoretic 4-message mode is implemented"
            )
        self.config = config
        self.statement = statement
        self.rng = rng
        if record is None:
            if file is None:
                raise ProtocolError("prover needs a registry or an explicit record")
            if not file.frozen:
                raise ProtocolError("proof stage requires a frozen public file")
            record = file.get(key_index)
        self.record = record
        self.key_index = key_index
        if plan is None:
            if witness is None or not config.rl_spec.relation(statement, witness):
                raise ProtocolError("witness does not satisfy the relation")
            plan = HonestCommitPlan(witness)
        self.plan = plan
        self.forced_pi_v_challenge: int | None = None
        self.phase = "start"
        self.aborted = False
        self.frames: list[bytes] = []
        self.transcript: SessionTranscript | None = None
        self._pi_v_first = None
        self._pi_v_challenge = None
        self._receiver_h = None
        self._pi_p_state = None
        self._pi_p_statement = None
        self._pi_p_first = None
        self._ots = None
        self._ots_used = False
        self._vk_bytes = None

    # -- message handling ---------------------------------------------------

    def start(self) -> bytes:
        if self.phase != "start":
            raise ProtocolError("session already started")
        payload = self._encode_start()
        frame = build_frame(MSG_START, payload)
        self.frames.append(frame)
        self.phase = "await_vstep1"
        return frame

    def on_message(self, frame: bytes) -> bytes | None:
        if self.aborted:
            return None
        try:
            msg_type, payload = parse_frame(frame)
        except ProtocolError:
            self._abort()
            return None
        if msg_type == MSG_RESULT:
            # outcome notification, not a protocol message
            return None
        try:
            if self.phase == "await_vstep1" and msg_type == MSG_VSTEP1:
                self.frames.append(frame)
                reply = self.handle_vstep1(payload)
                self.frames.append(reply)
                self.phase = "await_vstep2"
                return reply
            if self.phase == "await_vstep2" and msg_type == MSG_VSTEP2:
                self.frames.append(frame)
                self.parse_vstep2(payload)
                if not self.pi_v_accepting():
                    self._abort()
                    return None
                reply = self.final_message()
                self.phase = "done"
                return reply
        except (ProtocolError, ValueError):
            pass
        # out-of-order, duplicate, or malformed
        self._abort()
        return None

    def _abort(self) -> None:
        self.aborted = True
        self.phase = "done"

    # -- steps --------------------------------------------------------------

    def _encode_start(self) -> bytes:
        g = self.config.commit_group
        if self.key_index == NO_INDEX:
            inline = self.record.payload(self.config.pairing)
            return (
                g.encode(self.statement)
                + NO_INDEX.to_bytes(4, "big")
                + b"\x01"
                + inline
            )
        return g.encode(self.statement) + self.key_index.to_bytes(4, "big") + b"\x00"

    def handle_vstep1(self, payload: bytes) -> bytes:
        cfg = self.config
        r = ByteReader(payload)
        a_v_bytes = r.take(cfg.pi_v_spec.first_size())
        self._pi_v_first = cfg.pi_v_spec.decode_first(a_v_bytes)
        has_f = r.u8()
        if cfg.mode == PEDERSEN:
            if has_f != 1:
                raise ProtocolError("pedersen mode requires the receiver base f")
            self._receiver_h = cfg.commit_group.decode(
                r.take(cfg.commit_group.encoded_size())
            )
            if self._receiver_h == cfg.commit_group.identity():
                raise ProtocolError("degenerate commitment base")
        else:
            if has_f != 0:
                raise ProtocolError("elgamal mode sends no receiver base")
        r.done()

        # P Step 1: one-time key, commitments, main-proof first message.
        self._ots = ots_keygen(cfg.commit_group, cfg.ots_bits, self.rng)
        self._vk_bytes = self._ots.public.encode(cfg.commit_group)
        m = hash_to_zq_star(self._vk_bytes, cfg.q, cfg.digest)
        values = self.plan.values(cfg, m, self.rng)
        receiver_h = self._receiver_h if cfg.mode == PEDERSEN else None
        c_sig, c_rand, h_used, o_sig, o_rand = commit_pair(
            cfg.stmt2_spec, receiver_h, values, self.rng
        )
        self._commit_h = h_used
        self._c_sig, self._c_rand = c_sig, c_rand
        self._pi_p_statement = pi_p_statement(
            cfg, self.statement, h_used, c_sig, c_rand, self.record, m
        )
        or_wit = self.plan.or_witness(cfg, o_sig, o_rand)
        self._pi_p_state, self._pi_p_first = cfg.pi_p_spec.first_message(
            self._pi_p_statement, or_wit, self.rng
        )
        if self.forced_pi_v_challenge is not None:
            self._pi_v_challenge = self.forced_pi_v_challenge
        else:
            self._pi_v_challenge = rand_challenge(self.rng, cfg.challenge_bits)
        payload_out = (
            self._vk_bytes
            + self._encode_commitments()
            + cfg.pi_p_spec.encode_first(self._pi_p_first)
            + encode_challenge(self._pi_v_challenge, cfg.q)
        )
        return build_frame(MSG_PSTEP1, payload_out)

    def _encode_commitments(self) -> bytes:
        g = self.config.commit_group
        if self.config.mode == PEDERSEN:
            return g.encode(self._c_sig) + g.encode(self._c_rand)
        return (
            g.encode(self._commit_h)
            + g.encode(self._c_sig[0])
            + g.encode(self._c_sig[1])
            + g.encode(self._c_rand[0])
            + g.encode(self._c_rand[1])
        )

    def parse_vstep2(self, payload: bytes) -> None:
        cfg = self.config
        r = ByteReader(payload)
        z_v = cfg.pi_v_spec.decode_response(r.take(cfg.pi_v_spec.response_size()))
        e_p = decode_challenge(
            r.take(len(encode_challenge(0, cfg.q))), cfg.q, cfg.challenge_bits
        )
        r.done()
        self._pi_v_response = z_v
        self._pi_p_challenge = e_p

    def pi_v_accepting(self) -> bool:
        return self.config.pi_v_spec.verify(
            pi_v_statement(self.record),
            self._pi_v_first,
            self._pi_v_challenge,
            self._pi_v_response,
        )

    def final_message(self) -> bytes:
        cfg = self.config
        if not self.plan.has_witness:
            raise ProtocolError("no witness available for the main proof")
        if self._ots_used:
            raise ProtocolError("one-time key already used")
        z_p = cfg.pi_p_spec.respond(self._pi_p_state, self._pi_p_challenge)
        z_bytes = cfg.pi_p_spec.encode_response(z_p)
        tran = assemble_tran(self.frames, z_bytes)
        delta = ots_sign(self._ots, tran, cfg.digest)
        self._ots_used = True
        delta_bytes = delta.encode(cfg.q)
        self.transcript = SessionTranscript(tran, delta_bytes, self._vk_bytes)
        self.phase = "done"
        return build_frame(MSG_PSTEP2, z_bytes + delta_bytes)


class VerifierSession:
    """Verifier state machine for one session; emits a RESULT frame after
    the final check."""

    def __init__(
        self,
        config: ProtocolConfig,
        record: KeyRecord,
        secret: VerifierSecret,
        rng: random.Random,
        allow_inline: bool = False,
    ):
        if secret.key_index != record.index:
            raise ProtocolError("secret does not belong to this record")
        self.config = config
        self.record = record
        self.secret = secret
        self.rng = rng
        self.allow_inline = allow_inline
        self.phase = "await_start"
        self.outcome: bool | None = None
        self.frames: list[bytes] = []
        self.transcript: SessionTranscript | None = None
        self.forced_pi_p_challenge: int | None = None
        self.statement = None
        self.pi_p_statement = None
        self.pi_p_first = None
        self.pi_p_challenge = None
        self.pi_p_response = None
        self._pi_v_state = None
        self._pedersen_h = None
        self._vk_bytes = None
        self._ots_pub = None

    def on_message(self, frame: bytes) -> bytes | None:
        if self.phase == "done":
            return None
        try:
            msg_type, payload = parse_frame(frame)
            if self.phase == "await_start" and msg_type == MSG_START:
                self.frames.append(frame)
                reply = self._handle_start(payload)
                self.frames.append(reply)
                self.phase = "await_pstep1"
                return reply
            if self.phase == "await_pstep1" and msg_type == MSG_PSTEP1:
                self.frames.append(frame)
                reply = self._handle_pstep1(payload)
                self.frames.append(reply)
                self.phase = "await_pstep2"
                return reply
            if self.phase == "await_pstep2" and msg_type == MSG_PSTEP2:
                # tran covers the frames through VSTEP2 plus the z bytes;
                # the PSTEP2 frame itself stays out of the frame log.
                return self._handle_pstep2(payload)
        except (ProtocolError, ValueError):
            pass
        return self._reject()

    def _reject(self) -> bytes:
        self.outcome = False
        self.phase = "done"
        return build_frame(MSG_RESULT, b"\x00")

    def _handle_start(self, payload: bytes) -> bytes:
        cfg = self.config
        r = ByteReader(payload)
        self.statement = cfg.commit_group.decode(
            r.take(cfg.commit_group.encoded_size())
        )
        index = r.u32()
        has_inline = r.u8()
        if has_inline:
            if not self.allow_inline:
                raise ProtocolError("verifier refuses inline keys")
            r.take(record_payload_size(cfg.pairing))
        if index != self.record.index:
            raise ProtocolError("announced index does not match this verifier")
        r.done()
        wit = OrWitness(self.secret.retained, (self.secret.sk.x, self.secret.sk.y))
        self._pi_v_state, a_v = cfg.pi_v_spec.first_message(
            pi_v_statement(self.record), wit, self.rng
        )
        out = [cfg.pi_v_spec.encode_first(a_v)]
        if cfg.mode == PEDERSEN:
            params, _ = pedersen_receiver_setup(cfg.commit_group, self.rng)
            self._pedersen_h = params.h
            out.append(b"\x01")
            out.append(cfg.commit_group.encode(params.h))
        else:
            out.append(b"\x00")
        return build_frame(MSG_VSTEP1, b"".join(out))

    def _handle_pstep1(self, payload: bytes) -> bytes:
        cfg = self.config
        g = cfg.commit_group
        r = ByteReader(payload)
        self._vk_bytes = r.take(ots_pubkey_size(g, cfg.ots_bits))
        self._ots_pub = decode_ots_pubkey(self._vk_bytes, g)
        if self._ots_pub.bits != cfg.ots_bits:
            raise ProtocolError("one-time key has the wrong digest length")
        if cfg.mode == PEDERSEN:
            h = self._pedersen_h
            c_sig = g.decode(r.take(g.encoded_size()))
            c_rand = g.decode(r.take(g.encoded_size()))
        else:
            h = g.decode(r.take(g.encoded_size()))
            c_sig = (g.decode(r.take(g.encoded_size())), g.decode(r.take(g.encoded_size())))
            c_rand = (g.decode(r.take(g.encoded_size())), g.decode(r.take(g.encoded_size())))
        a_p_bytes = r.take(cfg.pi_p_spec.first_size())
        e_v = decode_challenge(
            r.take(len(encode_challenge(0, cfg.q))), cfg.q, cfg.challenge_bits
        )
        r.done()
        m = hash_to_zq_star(self._vk_bytes, cfg.q, cfg.digest)
        self.pi_p_statement = pi_p_statement(
            cfg, self.statement, h, c_sig, c_rand, self.record, m
        )
        self.pi_p_first = cfg.pi_p_spec.decode_first(a_p_bytes)
        z_v = cfg.pi_v_spec.respond(self._pi_v_state, e_v)
        if self.forced_pi_p_challenge is not None:
            self.pi_p_challenge = self.forced_pi_p_challenge
        else:
            self.pi_p_challenge = rand_challenge(self.rng, cfg.challenge_bits)
        payload_out = cfg.pi_v_spec.encode_response(z_v) + encode_challenge(
            self.pi_p_challenge, cfg.q
        )
        return build_frame(MSG_VSTEP2, payload_out)

    def _handle_pstep2(self, payload: bytes) -> bytes:
        cfg = self.config
        r = ByteReader(payload)
        z_bytes = r.take(cfg.pi_p_spec.response_size())
        delta_bytes = r.take(len(payload) - cfg.pi_p_spec.response_size())
        r.done()
        z_p = cfg.pi_p_spec.decode_response(z_bytes)
        delta = decode_ots_signature(delta_bytes, cfg.q, cfg.ots_bits)
        tran = assemble_tran(self.frames, z_bytes)
        ok = cfg.pi_p_spec.verify(
            self.pi_p_statement, self.pi_p_first, self.pi_p_challenge, z_p
        ) and ots_verify(self._ots_pub, tran, delta, cfg.commit_group, cfg.digest)
        self.pi_p_response = z_p
        self.outcome = ok
        self.phase = "done"
        if ok:
            self.transcript = SessionTranscript(tran, delta_bytes, self._vk_bytes)
        return build_frame(MSG_RESULT, b"\x01" if ok else b"\x00")
