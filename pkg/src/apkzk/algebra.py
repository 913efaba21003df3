"""Prime-order group arithmetic with two interchangeable backends.

The multiplicative backend is the order-q subgroup of Z_p* for a safe
prime p = 2q + 1.  The "transparent" backend represents every element of
G1/G2/GT by its discrete log to the generator, so exponentiation is a
single modular multiplication and the bilinear map is multiplication of
dlogs.  The transparent backend offers NO hiding or hardness whatsoever;
it exists so that every protocol equation can be checked exhaustively at
toy sizes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import gmpy2

GROUP_TAG_BYTES = {"G": 0x00, "G1": 0x01, "G2": 0x02, "GT": 0x03}

# Global exponentiation counter, bumped by every Group.exp call.  The
# harness samples it around party steps; single-threaded use only.
_EXP_COUNT = 0


def exp_count() -> int:
    return _EXP_COUNT


def _bump_exp() -> None:
    global _EXP_COUNT
    _EXP_COUNT += 1


class GroupError(ValueError):
    """Cross-group operation, bad encoding, or membership failure."""


class ParamSearchError(RuntimeError):
    """Parameter search exceeded its attempt bound."""


@dataclass(frozen=True)
class Scalar:
    """An exponent reduced mod the group order q."""

    value: int
    q: int

    def __post_init__(self):
        if not (0 <= self.value < self.q):
            raise ValueError(f"scalar {self.value} not reduced mod {self.q}")

    def _check(self, other: "Scalar") -> None:
        if self.q != other.q:
            raise ValueError("scalars from different moduli")

    def __add__(self, other: "Scalar") -> "Scalar":
        self._check(other)
        return Scalar((self.value + other.value) % self.q, self.q)

    def __sub__(self, other: "Scalar") -> "Scalar":
        self._check(other)
        return Scalar((self.value - other.value) % self.q, self.q)

    def __mul__(self, other: "Scalar") -> "Scalar":
        self._check(other)
        return Scalar((self.value * other.value) % self.q, self.q)

    def __neg__(self) -> "Scalar":
        return Scalar(-self.value % self.q, self.q)

    def inverse(self) -> "Scalar":
        if self.value == 0:
            raise ZeroDivisionError("scalar 0 has no inverse")
        return Scalar(pow(self.value, -1, self.q), self.q)

    def encode(self) -> bytes:
        return self.value.to_bytes(scalar_width(self.q), "big")


def scalar_width(q: int) -> int:
    return (q.bit_length() + 7) // 8


def decode_scalar(data: bytes, q: int) -> Scalar:
    if len(data) != scalar_width(q):
        raise GroupError("scalar encoding has wrong width")
    value = int.from_bytes(data, "big")
    if value >= q:
        raise GroupError(f"scalar {value} out of range mod {q}")
    return Scalar(value, q)


def rand_scalar(rng: random.Random, q: int) -> Scalar:
    return Scalar(rng.randrange(q), q)


def rand_scalar_nonzero(rng: random.Random, q: int) -> Scalar:
    """Draw from Zq, re-drawing zero (so scripted tapes can exercise it)."""
    while True:
        v = rng.randrange(q)
        if v != 0:
            return Scalar(v, q)


@dataclass(frozen=True)
class GroupElement:
    value: int
    tag: str


class Group:
    """Cyclic group of prime order q.  Elements are immutable."""

    tag: str
    order: int

    def generator(self) -> GroupElement:
        raise NotImplementedError

    def identity(self) -> GroupElement:
        raise NotImplementedError

    def contains(self, a: GroupElement) -> bool:
        raise NotImplementedError

    def _member(self, a: GroupElement) -> GroupElement:
        if a.tag != self.tag:
            raise GroupError(f"element of group {a.tag} used in group {self.tag}")
        return a

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        raise NotImplementedError

    def exp(self, base: GroupElement, k) -> GroupElement:
        raise NotImplementedError

    def inv(self, a: GroupElement) -> GroupElement:
        raise NotImplementedError

    def element_width(self) -> int:
        raise NotImplementedError

    def encode(self, a: GroupElement) -> bytes:
        self._member(a)
        payload = a.value.to_bytes(self.element_width(), "big")
        return bytes([GROUP_TAG_BYTES[self.tag]]) + payload

    def encoded_size(self) -> int:
        return 1 + self.element_width()

    def decode(self, data: bytes) -> GroupElement:
        if len(data) != self.encoded_size():
            raise GroupError("element encoding has wrong width")
        if data[0] != GROUP_TAG_BYTES[self.tag]:
            raise GroupError("element tag does not match group")
        elt = GroupElement(int.from_bytes(data[1:], "big"), self.tag)
        if not self.contains(elt):
            raise GroupError(f"decoded value is not a member of {self.tag}")
        return elt

    def int_repr(self, a: GroupElement) -> int:
        """Canonical integer representation of an element, reduced mod q."""
        self._member(a)
        return a.value % self.order

    def rand_element(self, rng: random.Random) -> GroupElement:
        return self.exp(self.generator(), rng.randrange(self.order))

    # Groups are immutable; snapshots share them.
    def __deepcopy__(self, memo):
        return self

    def __copy__(self):
        return self


def _exp_scalar(k, q: int) -> int:
    if isinstance(k, Scalar):
        if k.q != q:
            raise ValueError("exponent reduced mod the wrong order")
        return k.value
    return int(k) % q


@dataclass(frozen=True)
class SchnorrGroupParams:
    """Safe-prime group description: p = 2q + 1, g generates the order-q subgroup."""

    p: int
    q: int
    g: int

    def __post_init__(self):
        if not gmpy2.is_prime(self.p) or not gmpy2.is_prime(self.q):
            raise ValueError("p and q must be prime")
        if self.p != 2 * self.q + 1:
            raise ValueError("p must equal 2q + 1")
        if self.g <= 1 or self.g >= self.p or pow(self.g, self.q, self.p) != 1:
            raise ValueError("g must generate the order-q subgroup")


class SchnorrGroup(Group):
    """The order-q subgroup of Z_p*, which is exactly the quadratic residues."""

    tag = "G"

    def __init__(self, params: SchnorrGroupParams):
        self.params = params
        self.order = params.q
        self._g = GroupElement(params.g, self.tag)
        self._one = GroupElement(1, self.tag)

    def generator(self) -> GroupElement:
        return self._g

    def identity(self) -> GroupElement:
        return self._one

    def contains(self, a: GroupElement) -> bool:
        if a.tag != self.tag or not (1 <= a.value < self.params.p):
            return False
        # QR test via the Jacobi symbol; the order-q subgroup of a safe
        # prime is the set of quadratic residues.
        return gmpy2.jacobi(a.value, self.params.p) == 1

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        self._member(a)
        self._member(b)
        return GroupElement(a.value * b.value % self.params.p, self.tag)

    def exp(self, base: GroupElement, k) -> GroupElement:
        self._member(base)
        if not self.contains(base):
            raise GroupError("exponentiation base fails membership")
        _bump_exp()
        e = _exp_scalar(k, self.order)
        return GroupElement(pow(base.value, e, self.params.p), self.tag)

    def inv(self, a: GroupElement) -> GroupElement:
        self._member(a)
        return GroupElement(pow(a.value, -1, self.params.p), self.tag)

    def element_width(self) -> int:
        return (self.params.p.bit_length() + 7) // 8

    def __eq__(self, other):
        return isinstance(other, SchnorrGroup) and other.params == self.params

    def __hash__(self):
        return hash(("SchnorrGroup", self.params))


class TransparentGroup(Group):
    """Order-q group whose elements are their own discrete logs.

    g^k is k mod q, the group operation is addition of dlogs.  Provides
    no hiding whatsoever; test instrument only.
    """

    def __init__(self, q: int, tag: str = "G"):
        if not gmpy2.is_prime(q):
            raise ValueError("q must be prime")
        if tag not in GROUP_TAG_BYTES:
            raise ValueError(f"unknown group tag {tag!r}")
        self.order = q
        self.tag = tag

    def generator(self) -> GroupElement:
        return GroupElement(1, self.tag)

    def identity(self) -> GroupElement:
        return GroupElement(0, self.tag)

    def contains(self, a: GroupElement) -> bool:
        return a.tag == self.tag and 0 <= a.value < self.order

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        self._member(a)
        self._member(b)
        return GroupElement((a.value + b.value) % self.order, self.tag)

    def exp(self, base: GroupElement, k) -> GroupElement:
        self._member(base)
        if not self.contains(base):
            raise GroupError("exponentiation base fails membership")
        _bump_exp()
        e = _exp_scalar(k, self.order)
        return GroupElement(base.value * e % self.order, self.tag)

    def inv(self, a: GroupElement) -> GroupElement:
        self._member(a)
        return GroupElement(-a.value % self.order, self.tag)

    def element_width(self) -> int:
        return scalar_width(self.order)

    def __eq__(self, other):
        return (
            isinstance(other, TransparentGroup)
            and other.order == self.order
            and other.tag == self.tag
        )

    def __hash__(self):
        return hash(("TransparentGroup", self.order, self.tag))


class PairingBackend:
    """Bilinear structure over groups G1, G2, GT of common prime order q.

    Required laws: pair(u^a, v^b) = pair(u, v)^(a*b), pair(g1, g2) != 1,
    and psi(g2) = g1.  Any backend satisfying them can be plugged in.
    """

    g1_group: Group
    g2_group: Group
    gt_group: Group

    @property
    def order(self) -> int:
        return self.g1_group.order

    def g1(self) -> GroupElement:
        return self.g1_group.generator()

    def g2(self) -> GroupElement:
        return self.g2_group.generator()

    def pair(self, a: GroupElement, b: GroupElement) -> GroupElement:
        raise NotImplementedError

    def psi(self, b: GroupElement) -> GroupElement:
        raise NotImplementedError

    def __deepcopy__(self, memo):
        return self

    def __copy__(self):
        return self


class TransparentPairing(PairingBackend):
    """Dlog-representation pairing: pair multiplies dlogs mod q.  Insecure."""

    def __init__(self, q: int):
        self.g1_group = TransparentGroup(q, "G1")
        self.g2_group = TransparentGroup(q, "G2")
        self.gt_group = TransparentGroup(q, "GT")

    def pair(self, a: GroupElement, b: GroupElement) -> GroupElement:
        if a.tag != "G1" or not self.g1_group.contains(a):
            raise GroupError("pairing left operand must lie in G1")
        if b.tag != "G2" or not self.g2_group.contains(b):
            raise GroupError("pairing right operand must lie in G2")
        return GroupElement(a.value * b.value % self.order, "GT")

    def psi(self, b: GroupElement) -> GroupElement:
        if b.tag != "G2" or not self.g2_group.contains(b):
            raise GroupError("psi takes a G2 element")
        return GroupElement(b.value, "G1")

    def __eq__(self, other):
        return isinstance(other, TransparentPairing) and other.order == self.order

    def __hash__(self):
        return hash(("TransparentPairing", self.order))


def transparent_backend(q: int) -> TransparentPairing:
    return TransparentPairing(q)


def group_exp(group: Group, base: GroupElement, k) -> GroupElement:
    return group.exp(base, k)


def pair(backend: PairingBackend, a: GroupElement, b: GroupElement) -> GroupElement:
    return backend.pair(a, b)


# Pinned toy parameters so that every worked example is reproducible.
TOY_SCHNORR_4BIT = SchnorrGroupParams(p=23, q=11, g=2)
TOY_SCHNORR_5BIT = SchnorrGroupParams(p=47, q=23, g=4)

_FIXED_PARAMS = {4: TOY_SCHNORR_4BIT, 5: TOY_SCHNORR_5BIT}


def gen_schnorr_params(
    bits: int, seed=None, max_attempts: int | None = None
) -> SchnorrGroupParams:
    """Find (p, q, g) with p = 2q + 1 and q a prime of `bits` bits.

    Sizes 4 and 5 come from the pinned table; larger sizes are searched
    with a seeded RNG so results are reproducible.
    """
    if bits < 4:
        raise ValueError("need bits >= 4")
    if bits in _FIXED_PARAMS:
        return _FIXED_PARAMS[bits]
    rng = random.Random(seed)
    attempts = max_attempts if max_attempts is not None else 4000 * bits
    for _ in range(attempts):
        q = rng.randrange(1 << (bits - 1), 1 << bits) | 1
        if not gmpy2.is_prime(q):
            continue
        p = 2 * q + 1
        if not gmpy2.is_prime(p):
            continue
        while True:
            h = rng.randrange(2, p - 1)
            g = h * h % p
            if g != 1:
                break
        return SchnorrGroupParams(p=p, q=q, g=g)
    raise ParamSearchError(f"no safe prime found in {attempts} attempts")
