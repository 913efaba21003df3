#!/usr/bin/env python3
"""End-to-end demo: registry lifecycle plus one argued session per
deployment combination, with the exponentiation bill for each party.

    python scripts/demo_session.py [seed]
"""

import pathlib
import random
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from apkzk.algebra import (
    Scalar,
    SchnorrGroup,
    TOY_SCHNORR_4BIT,
    TransparentGroup,
    exp_count,
    transparent_backend,
)
from apkzk.protocol import (
    MSG_NAMES,
    ProtocolConfig,
    ProverSession,
    PublicFile,
    VerifierSession,
    parse_frame,
    verifier_keygen,
)


def run(mode: str, backend: str, seed: int) -> None:
    group = SchnorrGroup(TOY_SCHNORR_4BIT) if backend == "schnorr" else TransparentGroup(11, "G")
    config = ProtocolConfig(group, transparent_backend(11), mode=mode, ots_bits=4)
    file = PublicFile()
    rng = random.Random(seed)
    secret = verifier_keygen(config.pairing, file, "honest:V1", rng)
    file.freeze()
    w = Scalar(rng.randrange(1, config.q), config.q)
    statement = group.exp(group.generator(), w)

    mark = exp_count()
    prover = ProverSession(config, statement, w, 1, file, random.Random(seed + 1))
    p_exps = exp_count() - mark  # construction checks the witness
    verifier = VerifierSession(config, file.get(1), secret, random.Random(seed + 2))
    v_exps = 0

    print(f"== {mode} commitments over the {backend} group ==")
    msg = prover.start()
    while msg is not None:
        print(f"  P -> V  {MSG_NAMES[parse_frame(msg)[0]]:7s} {len(msg):4d} bytes")
        mark = exp_count()
        reply = verifier.on_message(msg)
        v_exps += exp_count() - mark
        if reply is None:
            break
        print(f"  V -> P  {MSG_NAMES[parse_frame(reply)[0]]:7s} {len(reply):4d} bytes")
        if parse_frame(reply)[0] == 6:
            break
        mark = exp_count()
        msg = prover.on_message(reply)
        p_exps += exp_count() - mark
    print(f"  outcome: {'ACCEPT' if verifier.outcome else 'REJECT'}")
    print(f"  exponentiations: prover {p_exps}, verifier {v_exps}\n")


def main() -> int:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 7
    for mode in ("pedersen", "elgamal"):
        for backend in ("transparent", "schnorr"):
            run(mode, backend, seed)
    return 0


if __name__ == "__main__":
    sys.exit(main())
