"""Reproducible session recordings for wire-stability checks.

Each recorded session is an honest prover/verifier run with all coins
derived from the session number through labeled SHA-256 streams, so the
byte-level event log is identical across runs, Python builds, and
platforms.  Sessions cycle through the four deployment combinations of
commitment mode and commitment-group backend.
"""

from __future__ import annotations

import json

from ..algebra import Scalar, SchnorrGroup, TOY_SCHNORR_4BIT, TransparentGroup, transparent_backend
from ..protocol import (
    MSG_RESULT,
    ProtocolConfig,
    ProverSession,
    PublicFile,
    VerifierSession,
    parse_frame,
    verifier_keygen,
)
from .core import derive_rng, log_entry

COMBOS = [
    ("pedersen", "transparent"),
    ("pedersen", "schnorr"),
    ("elgamal", "transparent"),
    ("elgamal", "schnorr"),
]


def _config(mode: str, backend: str) -> ProtocolConfig:
    if backend == "schnorr":
        group = SchnorrGroup(TOY_SCHNORR_4BIT)
    else:
        group = TransparentGroup(11, "G")
    return ProtocolConfig(group, transparent_backend(11), mode=mode, ots_bits=4)


def record_session(session_no: int) -> list:
    mode, backend = COMBOS[session_no % len(COMBOS)]
    config = _config(mode, backend)
    file = PublicFile()
    secret = verifier_keygen(
        config.pairing, file, "honest:V1", derive_rng(session_no, "golden-registry")
    )
    file.freeze()
    wit_rng = derive_rng(session_no, "golden-witness")
    w = Scalar(wit_rng.randrange(1, config.q), config.q)
    g = config.commit_group
    statement = g.exp(g.generator(), w)
    prover = ProverSession(
        config, statement, w, 1, file, derive_rng(session_no, "golden-prover")
    )
    verifier = VerifierSession(
        config, file.get(1), secret, derive_rng(session_no, "golden-verifier")
    )
    sid = f"S{session_no}"
    entries = []
    seq = 0
    msg = prover.start()
    while msg is not None:
        entries.append(log_entry(seq, sid, "P->V", msg))
        seq += 1
        reply = verifier.on_message(msg)
        if reply is None:
            break
        entries.append(log_entry(seq, sid, "V->P", reply))
        seq += 1
        if parse_frame(reply)[0] == MSG_RESULT:
            break
        msg = prover.on_message(reply)
    if verifier.outcome is not True:
        raise RuntimeError(f"golden session {session_no} did not accept")
    return entries


def golden_jsonl(count: int = 10) -> str:
    lines = []
    for n in range(count):
        for entry in record_session(n):
            lines.append(json.dumps(entry.to_json_dict(), sort_keys=True))
    return "\n".join(lines) + "\n"
