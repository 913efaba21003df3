#!/usr/bin/env python3
"""Run every bundled attack scenario and the extractor, printing a summary.

    python scripts/run_scenarios.py [seed] [trials]
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from apkzk.algebra import SchnorrGroup, TOY_SCHNORR_4BIT, transparent_backend
from apkzk.harness import HonestPartiesConfig, estimate_success, extractor_E, run_attack
from apkzk.harness.scenarios import SCENARIOS, bank_for
from apkzk.protocol import ProtocolConfig


def main() -> int:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    trials = int(sys.argv[2]) if len(sys.argv) > 2 else 50
    config = ProtocolConfig(
        SchnorrGroup(TOY_SCHNORR_4BIT), transparent_backend(11), ots_bits=4
    )
    bank = bank_for(config, seed)

    print(f"{'scenario':18s} {'accepted':9s} {'estimate':9s} notes")
    for name, spec in SCENARIOS.items():
        parties = HonestPartiesConfig(config, bank, apk=spec.apk)
        view = run_attack(spec.build(config, bank), parties, seed)
        accepted = sum(1 for ok in view.right_outcomes.values() if ok)
        note = view.aborted or ""
        est = "-"
        if view.right_sessions and view.aborted is None:
            est = f"{estimate_success(lambda: spec.build(config, bank), parties, spec.target, trials, seed):.2f}"
        print(f"{name:18s} {accepted:<9d} {est:9s} {note}")

    print("\nextraction against the nested wrapped prover:")
    res = extractor_E(SCENARIOS["nesting"].build(config, bank), config, seed, target=1)
    print(
        f"  {res.classification} (event {res.event}), witness={getattr(res.witness, 'value', None)},"
        f" rewinds: key-proof {res.piv_rewinds} / main-proof {res.pip_rewinds}"
    )

    print("extraction against the self-registering adversary:")
    res = extractor_E(
        SCENARIOS["self_registering"].build(config, bank), config, seed, target=1
    )
    for idx, (branch, sk) in res.extracted_keys.items():
        print(f"  recovered signing key of registry entry {idx} (key {branch}): x={sk.x.value} y={sk.y.value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
