#!/usr/bin/env python3
"""Regenerate the frozen wire recordings used by the acceptance suite.

Run from the repository root after any intentional wire-format change:

    python scripts/record_golden.py
"""

import hashlib
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from apkzk.harness.golden import golden_jsonl

DATA_DIR = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data"


def main() -> int:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    blob = golden_jsonl(10)
    (DATA_DIR / "golden_sessions.jsonl").write_text(blob)
    digest = hashlib.sha256(blob.encode()).hexdigest()
    (DATA_DIR / "golden_sessions.sha256").write_text(digest + "\n")
    print(f"wrote {DATA_DIR / 'golden_sessions.jsonl'} ({len(blob)} bytes)")
    print(f"sha256 {digest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
