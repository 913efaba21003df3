"""Group arithmetic, the transparent pairing, and parameter generation."""

import random

import pytest
from hypothesis import given, strategies as st

from apkzk.algebra import (
    GroupElement,
    GroupError,
    ParamSearchError,
    Scalar,
    SchnorrGroup,
    SchnorrGroupParams,
    TOY_SCHNORR_4BIT,
    TOY_SCHNORR_5BIT,
    TransparentGroup,
    decode_scalar,
    gen_schnorr_params,
    group_exp,
    pair,
    transparent_backend,
)

Q = 11


class TestScalar:
    def test_range_enforced(self):
        with pytest.raises(ValueError):
            Scalar(11, 11)
        with pytest.raises(ValueError):
            Scalar(-1, 11)

    def test_arithmetic_mod_q(self):
        a, b = Scalar(7, Q), Scalar(9, Q)
        assert (a + b).value == 5
        assert (a - b).value == 9
        assert (a * b).value == 8
        assert (-a).value == 4

    def test_inverse_exhaustive(self):
        for v in range(1, Q):
            s = Scalar(v, Q)
            assert (s.inverse() * s).value == 1

    def test_zero_has_no_inverse(self):
        with pytest.raises(ZeroDivisionError):
            Scalar(0, Q).inverse()

    def test_cross_modulus_rejected(self):
        with pytest.raises(ValueError):
            Scalar(1, 11) + Scalar(1, 23)

    @given(st.integers(0, Q - 1), st.integers(0, Q - 1))
    def test_add_commutes(self, a, b):
        assert Scalar(a, Q) + Scalar(b, Q) == Scalar(b, Q) + Scalar(a, Q)


class TestSchnorrGroup:
    def test_pinned_toy_parameters(self):
        assert (TOY_SCHNORR_4BIT.p, TOY_SCHNORR_4BIT.q, TOY_SCHNORR_4BIT.g) == (23, 11, 2)

    def test_exponentiation(self):
        g = SchnorrGroup(TOY_SCHNORR_4BIT)
        assert g.exp(g.generator(), 4).value == 16
        assert g.exp(g.generator(), 0) == g.identity()
        assert g.exp(g.generator(), 11) == g.identity()

    def test_exp_homomorphism_exhaustive(self):
        g = SchnorrGroup(TOY_SCHNORR_4BIT)
        x = g.exp(g.generator(), 5)
        for a in range(Q):
            for b in range(Q):
                assert g.exp(g.exp(x, a), b) == g.exp(x, (a * b) % Q)

    def test_membership_of_all_elements(self):
        g = SchnorrGroup(TOY_SCHNORR_4BIT)
        members = {g.exp(g.generator(), k).value for k in range(Q)}
        assert len(members) == Q
        for v in members:
            assert g.contains(GroupElement(v, "G"))
            # direct order check agrees with the Jacobi-symbol test
            assert pow(v, Q, 23) == 1
        for v in range(1, 23):
            if v not in members:
                assert not g.contains(GroupElement(v, "G"))

    def test_mul_and_inv(self):
        g = SchnorrGroup(TOY_SCHNORR_4BIT)
        a = g.exp(g.generator(), 3)
        assert g.mul(a, g.inv(a)) == g.identity()

    def test_cross_group_rejected(self):
        g = SchnorrGroup(TOY_SCHNORR_4BIT)
        with pytest.raises(GroupError):
            g.exp(GroupElement(3, "G1"), 2)

    def test_bad_params_rejected(self):
        with pytest.raises(ValueError):
            SchnorrGroupParams(p=25, q=12, g=2)
        with pytest.raises(ValueError):
            SchnorrGroupParams(p=23, q=11, g=1)

    def test_encode_decode_roundtrip(self):
        g = SchnorrGroup(TOY_SCHNORR_4BIT)
        for k in range(Q):
            e = g.exp(g.generator(), k)
            assert g.decode(g.encode(e)) == e

    def test_decode_rejects_nonmembers(self):
        g = SchnorrGroup(TOY_SCHNORR_4BIT)
        with pytest.raises(GroupError):
            g.decode(bytes([0x00, 5]))  # 5 is not a quadratic residue mod 23
        with pytest.raises(GroupError):
            g.decode(bytes([0x01, 4]))  # wrong tag byte


class TestTransparentBackend:
    def test_generator_and_exp_are_dlogs(self):
        backend = transparent_backend(Q)
        g1 = backend.g1()
        assert g1.value == 1
        assert backend.g1_group.exp(g1, 5).value == 5

    def test_pair_multiplies_dlogs(self):
        backend = transparent_backend(Q)
        assert pair(backend, GroupElement(3, "G1"), GroupElement(4, "G2")).value == 1
        assert pair(backend, GroupElement(2, "G1"), GroupElement(3, "G2")).value == 6

    def test_pair_of_generators_not_identity(self):
        backend = transparent_backend(Q)
        z = pair(backend, backend.g1(), backend.g2())
        assert z != backend.gt_group.identity()

    def test_bilinearity_symmetry(self):
        backend = transparent_backend(Q)
        rng = random.Random(0)
        for _ in range(20):
            a = rng.randrange(Q)
            lhs = pair(backend, backend.g1_group.exp(backend.g1(), a), backend.g2())
            rhs = pair(backend, backend.g1(), backend.g2_group.exp(backend.g2(), a))
            assert lhs == rhs

    def test_bilinearity_exhaustive(self):
        backend = transparent_backend(Q)
        x, y = GroupElement(3, "G1"), GroupElement(5, "G2")
        base = pair(backend, x, y)
        for a in range(Q):
            for b in range(Q):
                lhs = pair(
                    backend,
                    backend.g1_group.exp(x, a),
                    backend.g2_group.exp(y, b),
                )
                assert lhs == backend.gt_group.exp(base, (a * b) % Q)

    def test_psi_maps_g2_to_g1(self):
        backend = transparent_backend(Q)
        assert backend.psi(backend.g2()) == backend.g1()
        assert backend.psi(GroupElement(7, "G2")) == GroupElement(7, "G1")

    def test_wrong_group_operands_rejected(self):
        backend = transparent_backend(Q)
        with pytest.raises(GroupError):
            pair(backend, GroupElement(3, "G2"), GroupElement(4, "G2"))
        with pytest.raises(GroupError):
            backend.psi(GroupElement(3, "G1"))

    def test_nonprime_order_rejected(self):
        with pytest.raises(ValueError):
            transparent_backend(12)

    def test_group_exp_module_function(self):
        g = TransparentGroup(Q, "G")
        assert group_exp(g, g.generator(), 7).value == 7


class TestParamGeneration:
    def test_fixed_table(self):
        assert gen_schnorr_params(4) == TOY_SCHNORR_4BIT
        assert gen_schnorr_params(5) == TOY_SCHNORR_5BIT

    def test_generated_params_satisfy_invariants(self):
        params = gen_schnorr_params(16, seed=7)
        assert params.p == 2 * params.q + 1
        assert pow(params.g, params.q, params.p) == 1
        assert params.q.bit_length() == 16

    def test_deterministic_for_seed(self):
        assert gen_schnorr_params(12, seed=3) == gen_schnorr_params(12, seed=3)

    def test_search_exhaustion(self):
        with pytest.raises(ParamSearchError):
            gen_schnorr_params(16, seed=1, max_attempts=1)

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            gen_schnorr_params(3)


def test_scalar_codec_roundtrip():
    for v in range(Q):
        s = Scalar(v, Q)
        assert decode_scalar(s.encode(), Q) == s


def test_scalar_decode_rejects_out_of_range():
    with pytest.raises(GroupError):
        decode_scalar(bytes([13]), Q)
