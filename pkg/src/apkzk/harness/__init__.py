"""Adversarial harness: deterministic man-in-the-middle scheduler, success
estimation under transcript exclusion, the rewinding extractor, bundled
attack scenarios, and the command-line interface."""

from .attack import (
    AttackView,
    HonestPartiesConfig,
    attack_success,
    estimate_success,
    run_attack,
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
)
from .extractor import (
    ExtractionResult,
    ExtractorE,
    ExtrRight,
    PiPConversation,
    RhoOutcome,
    extractor_E,
    predicate_rho,
)
from .scenarios import SCENARIOS, bank_for

__all__ = [
    "Adversary",
    "AttackBegin",
    "AttackView",
    "DeliverLeft",
    "DeliverRight",
    "EndAttack",
    "ExtractionResult",
    "ExtractorE",
    "ExtrRight",
    "FromLeft",
    "FromRight",
    "HonestPartiesConfig",
    "LogEntry",
    "PiPConversation",
    "RhoOutcome",
    "SCENARIOS",
    "StartLeft",
    "StartRight",
    "StatementBank",
    "attack_success",
    "bank_for",
    "derive_rng",
    "estimate_success",
    "extractor_E",
    "predicate_rho",
    "run_attack",
]
