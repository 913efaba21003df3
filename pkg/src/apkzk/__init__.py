"""Concurrently non-malleable zero-knowledge arguments over an authenticated
public-key registry, plus the adversarial harness that attacks and extracts
from them."""

__version__ = "0.1.0"
