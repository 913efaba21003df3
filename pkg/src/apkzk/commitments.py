"""Pedersen and ElGamal commitments over a prime-order group.

Pedersen: receiver supplies h = g^x, sender posts C = g^y h^r.  Perfectly
hiding, binding under DL.  ElGamal: sender picks its own h and posts
(g^r, g^y h^r).  Perfectly binding, hiding under DDH.  Both use the same
order-q group as the rest of the stack.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .algebra import Group, GroupElement, Scalar, rand_scalar, rand_scalar_nonzero


@dataclass(frozen=True)
class PedersenParams:
    group: Group
    h: GroupElement

    def __post_init__(self):
        if not self.group.contains(self.h) or self.h == self.group.identity():
            raise ValueError("h must be a non-identity subgroup member")


@dataclass(frozen=True)
class PedersenCommitment:
    c: GroupElement


@dataclass(frozen=True)
class ElGamalCommitment:
    c_a: GroupElement  # g^r
    c_b: GroupElement  # g^y h^r
    h: GroupElement  # sender-chosen base


@dataclass(frozen=True)
class Opening:
    value: Scalar
    randomness: Scalar


def pedersen_receiver_setup(
    group: Group, rng: random.Random
) -> tuple[PedersenParams, Scalar]:
    """Receiver draws x and publishes h = g^x; x = 0 is re-drawn (h = 1
    would void hiding).  The trapdoor x stays with the receiver."""
    x = rand_scalar_nonzero(rng, group.order)
    h = group.exp(group.generator(), x)
    return PedersenParams(group, h), x


def pedersen_commit(
    params: PedersenParams, value: Scalar, rng: random.Random
) -> tuple[PedersenCommitment, Opening]:
    group = params.group
    r = rand_scalar(rng, group.order)
    c = group.mul(group.exp(group.generator(), value), group.exp(params.h, r))
    return PedersenCommitment(c), Opening(value, r)


def pedersen_verify_open(
    params: PedersenParams, com: PedersenCommitment, opening: Opening
) -> bool:
    group = params.group
    expect = group.mul(
        group.exp(group.generator(), opening.value),
        group.exp(params.h, opening.randomness),
    )
    return expect == com.c


@dataclass(frozen=True)
class ElGamalSenderParams:
    group: Group
    h: GroupElement


def elgamal_sender_setup(
    group: Group, rng: random.Random
) -> tuple[ElGamalSenderParams, Scalar]:
    x = rand_scalar_nonzero(rng, group.order)
    h = group.exp(group.generator(), x)
    return ElGamalSenderParams(group, h), x


def elgamal_commit(
    group: Group,
    value: Scalar,
    rng: random.Random,
    sender: ElGamalSenderParams | None = None,
) -> tuple[ElGamalCommitment, Opening]:
    """Non-interactive commitment (g^r, g^y h^r).  The sender base h is
    drawn fresh unless sender params are supplied (a sender committing to
    several values reuses one h)."""
    if sender is None:
        sender, _ = elgamal_sender_setup(group, rng)
    r = rand_scalar(rng, group.order)
    g = group.generator()
    c_a = group.exp(g, r)
    c_b = group.mul(group.exp(g, value), group.exp(sender.h, r))
    return ElGamalCommitment(c_a, c_b, sender.h), Opening(value, r)


def elgamal_verify_open(com: ElGamalCommitment, opening: Opening, group: Group) -> bool:
    g = group.generator()
    if group.exp(g, opening.randomness) != com.c_a:
        return False
    expect = group.mul(group.exp(g, opening.value), group.exp(com.h, opening.randomness))
    return expect == com.c_b
