"""Session state machines, wire format, registry, and transcript binding."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from apkzk.algebra import Scalar
from apkzk.protocol import (
    MSG_NAMES,
    MSG_PSTEP2,
    MSG_RESULT,
    MSG_START,
    MSG_VSTEP1,
    NO_INDEX,
    KeyRecord,
    ProtocolConfig,
    ProtocolError,
    ProverSession,
    PublicFile,
    VerifierSession,
    build_frame,
    parse_frame,
    verifier_keygen,
)
from apkzk.signatures import bb_keygen
from helpers import Q, make_config, pump_session


def setup_parties(config, seed=0, retain_both=False):
    file = PublicFile()
    rng = random.Random(seed)
    secret = verifier_keygen(config.pairing, file, "honest:V1", rng, retain_both=retain_both)
    file.freeze()
    w = Scalar(rng.randrange(1, Q), Q)
    g = config.commit_group
    statement = g.exp(g.generator(), w)
    prover = ProverSession(config, statement, w, 1, file, random.Random(seed + 1))
    verifier = VerifierSession(config, file.get(1), secret, random.Random(seed + 2))
    return prover, verifier, file, secret


class TestWireFormat:
    def test_frame_roundtrip(self):
        frame = build_frame(MSG_START, b"payload")
        assert parse_frame(frame) == (MSG_START, b"payload")

    def test_bad_frames_rejected(self):
        with pytest.raises(ProtocolError):
            parse_frame(b"\x00\x00")
        with pytest.raises(ProtocolError):
            parse_frame(b"\x00\x00\x00\x05\x63abc")  # wrong length
        with pytest.raises(ProtocolError):
            parse_frame(build_frame(99, b""))


class TestPublicFile:
    def test_append_then_freeze(self, config):
        file = PublicFile()
        rng = random.Random(0)
        s1 = verifier_keygen(config.pairing, file, "honest:V1", rng)
        s2 = verifier_keygen(config.pairing, file, "honest:V2", rng)
        assert (s1.key_index, s2.key_index) == (1, 2)
        file.freeze()
        with pytest.raises(ProtocolError):
            verifier_keygen(config.pairing, file, "honest:V3", rng)

    def test_distinct_keys_per_registration(self, config):
        file = PublicFile()
        rng = random.Random(1)
        verifier_keygen(config.pairing, file, "honest:V1", rng)
        verifier_keygen(config.pairing, file, "honest:V2", rng)
        r1, r2 = file.get(1), file.get(2)
        assert r1.vk0 != r2.vk0

    def test_honest_verifier_retains_one_key(self, config):
        file = PublicFile()
        sec = verifier_keygen(config.pairing, file, "honest:V1", random.Random(2))
        assert sec.other_sk is None
        both = verifier_keygen(
            config.pairing, file, "honest:V2", random.Random(3), retain_both=True
        )
        assert both.other_sk is not None

    def test_registered_keys_satisfy_invariants(self, config):
        file = PublicFile()
        verifier_keygen(config.pairing, file, "honest:V1", random.Random(4))
        rec = file.get(1)
        backend = config.pairing
        for vk in (rec.vk0, rec.vk1):
            assert vk.z == backend.pair(vk.g1, vk.g2)
            assert vk.u != backend.g2_group.identity()


class TestHonestSession:
    def test_complete_session_accepts(self, any_config):
        prover, verifier, _, _ = setup_parties(any_config)
        frames = pump_session(prover, verifier)
        assert verifier.outcome is True
        assert not prover.aborted
        assert prover.transcript is not None

    def test_exactly_four_protocol_messages_after_start(self, any_config):
        prover, verifier, _, _ = setup_parties(any_config)
        frames = pump_session(prover, verifier)
        types = [MSG_NAMES[parse_frame(f)[0]] for f in frames]
        assert types[0] == "START"
        assert types[1:5] == ["VSTEP1", "PSTEP1", "VSTEP2", "PSTEP2"]
        assert types[5:] == ["RESULT"]

    def test_transcripts_byte_match(self, any_config):
        prover, verifier, _, _ = setup_parties(any_config)
        pump_session(prover, verifier)
        assert prover.transcript.tran == verifier.transcript.tran
        assert prover.transcript.delta_bytes == verifier.transcript.delta_bytes

    def test_receiver_base_present_only_in_hiding_mode(self):
        for mode, expect in (("pedersen", 1), ("elgamal", 0)):
            config = make_config(mode=mode)
            prover, verifier, _, _ = setup_parties(config)
            frames = pump_session(prover, verifier)
            vstep1 = next(f for f in frames if parse_frame(f)[0] == MSG_VSTEP1)
            payload = parse_frame(vstep1)[1]
            flag = payload[config.pi_v_spec.first_size()]
            assert flag == expect

    def test_fresh_receiver_base_per_session(self, config):
        prover1, verifier1, file, secret = setup_parties(config, seed=1)
        pump_session(prover1, verifier1)
        prover2, verifier2, _, _ = setup_parties(config, seed=2)
        pump_session(prover2, verifier2)
        assert verifier1._pedersen_h != verifier2._pedersen_h

    def test_statement_witness_mismatch_rejected_before_messages(self, config):
        file = PublicFile()
        verifier_keygen(config.pairing, file, "honest:V1", random.Random(0))
        file.freeze()
        g = config.commit_group
        statement = g.exp(g.generator(), 3)
        with pytest.raises(ProtocolError):
            ProverSession(config, statement, Scalar(4, Q), 1, file, random.Random(1))

    def test_unfrozen_file_rejected(self, config):
        file = PublicFile()
        verifier_keygen(config.pairing, file, "honest:V1", random.Random(0))
        g = config.commit_group
        with pytest.raises(ProtocolError):
            ProverSession(config, g.exp(g.generator(), 3), Scalar(3, Q), 1, file, random.Random(1))

    def test_generic_round_mode_is_a_hook(self):
        config = make_config()
        generic = ProtocolConfig(
            config.commit_group, config.pairing, mode="pedersen", ots_bits=4,
            rounds="generic",
        )
        file = PublicFile()
        verifier_keygen(generic.pairing, file, "honest:V1", random.Random(0))
        file.freeze()
        g = generic.commit_group
        with pytest.raises(NotImplementedError):
            ProverSession(generic, g.exp(g.generator(), 3), Scalar(3, Q), 1, file, random.Random(1))

    def test_one_time_key_single_use(self, config):
        prover, verifier, _, _ = setup_parties(config)
        pump_session(prover, verifier)
        with pytest.raises(ProtocolError):
            prover.final_message()

    def test_self_signed_transcript_checks_out(self, config):
        from apkzk.signatures import decode_ots_pubkey, decode_ots_signature, ots_verify

        prover, verifier, _, _ = setup_parties(config)
        pump_session(prover, verifier)
        st_ = prover.transcript
        pub = decode_ots_pubkey(st_.vk_prime, config.commit_group)
        delta = decode_ots_signature(st_.delta_bytes, config.q, config.ots_bits)
        assert ots_verify(pub, st_.tran, delta, config.commit_group, config.digest)


class TestStateMachineDiscipline:
    def test_out_of_order_message_aborts_prover(self, config):
        prover, verifier, _, _ = setup_parties(config)
        start = prover.start()
        vstep1 = verifier.on_message(start)
        # deliver a VSTEP2-typed frame when VSTEP1 is expected
        bogus = build_frame(4, b"\x00" * 8)
        assert prover.on_message(bogus) is None
        assert prover.aborted

    def test_duplicate_message_rejected_by_verifier(self, config):
        prover, verifier, _, _ = setup_parties(config)
        start = prover.start()
        verifier.on_message(start)
        reply = verifier.on_message(start)
        assert parse_frame(reply)[0] == MSG_RESULT
        assert verifier.outcome is False

    def test_wrong_index_announcement_rejected(self, config):
        file = PublicFile()
        rng = random.Random(0)
        verifier_keygen(config.pairing, file, "honest:V1", rng)
        secret2 = verifier_keygen(config.pairing, file, "honest:V2", rng)
        file.freeze()
        g = config.commit_group
        prover = ProverSession(config, g.exp(g.generator(), 3), Scalar(3, Q), 1, file, rng)
        wrong_verifier = VerifierSession(config, file.get(2), secret2, rng)
        reply = wrong_verifier.on_message(prover.start())
        assert parse_frame(reply)[0] == MSG_RESULT
        assert wrong_verifier.outcome is False

    def test_honest_verifier_refuses_inline_keys(self, config):
        file = PublicFile()
        rng = random.Random(0)
        secret = verifier_keygen(config.pairing, file, "honest:V1", rng)
        file.freeze()
        record = file.get(1)
        inline = KeyRecord(NO_INDEX, record.vk0, record.vk1, "substituted:A")
        g = config.commit_group
        prover = ProverSession(
            config, g.exp(g.generator(), 3), Scalar(3, Q), NO_INDEX, None,
            rng, record=inline,
        )
        verifier = VerifierSession(config, record, secret, rng)
        reply = verifier.on_message(prover.start())
        assert verifier.outcome is False


class TestTranscriptBinding:
    def _run_with_flip(self, config, frame_idx, byte_idx, seed=0):
        """Replay a session, flipping one bit of the frame_idx-th message
        in flight; returns the verifier outcome."""
        prover, verifier, _, _ = setup_parties(config, seed=seed)

        def flip(frame, at):
            if at != frame_idx or byte_idx >= len(frame):
                return frame
            flipped = bytearray(frame)
            flipped[byte_idx] ^= 0x01
            return bytes(flipped)

        msg = prover.start()
        idx = 0
        while msg is not None:
            msg = flip(msg, idx)
            idx += 1
            reply = verifier.on_message(msg)
            if reply is None:
                break
            reply = flip(reply, idx)
            idx += 1
            try:
                if parse_frame(reply)[0] == MSG_RESULT:
                    break
            except ProtocolError:
                pass  # mangled beyond parsing; the prover will abort on it
            msg = prover.on_message(reply)
        return verifier.outcome

    def test_every_byte_of_every_message_is_load_bearing(self, config):
        """Flipping the low bit of any byte of any protocol message keeps
        the verifier from accepting."""
        prover, verifier, _, _ = setup_parties(config)
        frames = pump_session(prover, verifier)
        assert verifier.outcome is True
        for frame_idx, frame in enumerate(frames[:-1]):  # skip RESULT
            for byte_idx in range(len(frame)):
                outcome = self._run_with_flip(config, frame_idx, byte_idx)
                assert outcome is not True, (
                    f"bit flip in frame {frame_idx} byte {byte_idx} survived"
                )

    @given(seed=st.integers(0, 50))
    @settings(max_examples=15, deadline=None)
    def test_replayed_signature_from_other_session_rejected(self, seed):
        config = make_config()
        p1, v1, _, _ = setup_parties(config, seed=seed)
        frames1 = pump_session(p1, v1)
        pstep2 = next(f for f in frames1 if parse_frame(f)[0] == MSG_PSTEP2)
        p2, v2, _, _ = setup_parties(config, seed=seed + 1000)
        msg = p2.start()
        for _ in range(2):
            reply = v2.on_message(msg)
            msg = p2.on_message(reply)
        # splice in the other session's final message
        final = v2.on_message(pstep2)
        assert v2.outcome is False


class TestWitnessIndependence:
    def test_verifier_first_message_identical_under_key_swap(self, config):
        """With fixed coins, VSTEP1 does not depend on which signing key
        the verifier holds."""
        file = PublicFile()
        rng = random.Random(0)
        vk0, sk0 = bb_keygen(config.pairing, rng)
        vk1, sk1 = bb_keygen(config.pairing, rng)
        index = file.register(vk0, vk1, "honest:V1")
        file.freeze()
        record = file.get(index)
        from apkzk.protocol import VerifierSecret

        g = config.commit_group
        w = Scalar(3, Q)
        outs = []
        for retained, sk in ((0, sk0), (1, sk1)):
            secret = VerifierSecret(index, retained, sk)
            verifier = VerifierSession(config, record, secret, random.Random(42))
            prover = ProverSession(
                config, g.exp(g.generator(), w), w, index, file, random.Random(7)
            )
            outs.append(verifier.on_message(prover.start()))
        assert outs[0] == outs[1]

    def test_key_proof_answers_interchange_pointwise(self):
        """Honest re-answering of a simulated slot sweeps the same response
        set the simulator does, for every challenge: the two-key proof's
        transcripts cannot betray the key in use."""
        config = make_config()
        spec = config.pi_v_spec.branches[0]
        backend = config.pairing
        rng = random.Random(0)
        vk, sk = bb_keygen(backend, rng)
        stmt = (vk.u, vk.v)
        wit = (sk.x, sk.y)
        for e_old in range(1 << spec.challenge_bits):
            for e_new in range(1 << spec.challenge_bits):
                honest, simulated = set(), set()
                for z1 in range(Q):
                    for z2 in range(Q):
                        z_old = (Scalar(z1, Q), Scalar(z2, Q))
                        z_new = spec.respond_simulated(stmt, wit, e_old, z_old, e_new)
                        honest.add((z_new[0].value, z_new[1].value))
                        simulated.add((z1, z2))
                assert honest == simulated
