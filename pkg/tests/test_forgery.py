import json
import math

import numpy as np
import pytest

from aqslab.aqs import RotationFamily, SchemeConfig, sign, verify_exact
from aqslab.forgery import (
    abc,
    check_forgeable,
    classify_table1,
    construct_witness,
    key_residuals,
    table1_conditions,
    uniform_forgery,
    witness_from_dict,
    witness_to_dict,
    witness_via_eigenstate,
)
from aqslab.qcore import basis, bloch_state, from_pauli_coeffs, haar_state, haar_unitary, pauli

from conftest import I2, PAULIS, SQ2, SQ3, T_LITERAL, WA_LITERAL, X, Z, equal_up_to_phase

Z2, Z4 = RotationFamily.BIASED_Z2, RotationFamily.UNBIASED_Z4


def brute_force_forgeable(w, rotations, m, q):
    """Independent check: every key's attacked state is parallel to the first."""
    states = []
    for r in rotations:
        for k in range(4):
            enc = PAULIS[k] @ w @ r
            states.append(enc.conj().T @ q @ enc @ m)
    return all(equal_up_to_phase(s, states[0]) for s in states)


def clifford_group():
    h = (X + Z) / SQ2
    s = np.diag([1, 1j])
    group = [I2]
    frontier = [I2]
    while frontier:
        nxt = []
        for g in frontier:
            for gen in (h, s):
                c = g @ gen
                if not any(equal_up_to_phase(c, e, 1e-9) for e in group):
                    group.append(c)
                    nxt.append(c)
        frontier = nxt
    return group


CLIFFORDS = clifford_group()


def structured_assistant(rng):
    """exp(i*t*sigma_l) C maps sigma_l onto a Pauli, so sigma_l forges every message."""
    l = int(rng.integers(1, 4))
    t = rng.uniform(0, 2 * math.pi)
    rot = math.cos(t) * I2 + 1j * math.sin(t) * PAULIS[l]
    return rot @ CLIFFORDS[int(rng.integers(len(CLIFFORDS)))]


def random_message(rng):
    return bloch_state(math.acos(1 - 2 * rng.random()), 2 * math.pi * rng.random())


def test_clifford_group_size():
    assert len(CLIFFORDS) == 24


class TestAbc:
    def test_wa(self):
        # (w0, w1, w2, w3) = (0, 1/2, 1/2, sqrt2/2) substituted by hand
        assert np.allclose(abc(WA_LITERAL), (-0.25, SQ2 / 4, -0.25), atol=1e-12)

    def test_identity(self):
        assert abc(I2) == (0.5, 0.0, 0.0)

    def test_t(self):
        # (0, 1/sqrt3, 1/sqrt3, 1/sqrt3): alpha = 1/3 - 1/2, beta = 1/3, gamma = 0 - 1/3
        assert np.allclose(abc(T_LITERAL), (-1 / 6, 1 / 3, -1 / 3), atol=1e-12)

    def test_norm_identity(self, rng):
        for _ in range(200):
            a = abc(haar_unitary(rng))
            assert a.alpha**2 + a.beta**2 + a.gamma**2 == pytest.approx(0.25, abs=1e-12)

    def test_phase_blind(self, rng):
        w = haar_unitary(rng)
        assert np.allclose(abc(w), abc(np.exp(2.1j) * w), atol=1e-13)


class TestCheckForgeable:
    def test_wa_z2_basis(self, wa_z2):
        wit = check_forgeable(wa_z2, basis(0), pauli(3))
        assert wit is not None
        assert equal_up_to_phase(wit.replacement @ basis(0), basis(1))
        assert len(wit.phases) == 8

    def test_wa_z4_basis(self, wa_z4):
        wit = check_forgeable(wa_z4, basis(1), pauli(3))
        assert wit is not None
        assert equal_up_to_phase(wit.replacement @ basis(1), basis(0))
        assert len(wit.phases) == 16

    def test_t_z4_not_forgeable(self, t_z4):
        assert not brute_force_forgeable(T_LITERAL, PAULIS, basis(0), Z)
        assert check_forgeable(t_z4, basis(0), pauli(3)) is None

    def test_identity_attack_is_not_a_forgery(self, t_z4):
        assert check_forgeable(t_z4, basis(0), np.exp(0.3j) * I2) is None

    def test_replacement_is_unitary(self, wa_z2):
        u = check_forgeable(wa_z2, basis(0), pauli(3)).replacement
        assert np.allclose(u.conj().T @ u, I2, atol=1e-12)

    def test_attack_phase_invariance(self, wa_z4):
        a = check_forgeable(wa_z4, basis(0), pauli(3))
        b = check_forgeable(wa_z4, basis(0), np.exp(1.3j) * pauli(3))
        assert b is not None
        assert equal_up_to_phase(a.replacement @ basis(0), b.replacement @ basis(0))
        assert check_forgeable(wa_z4, np.array([1, 1]) / SQ2, np.exp(1.3j) * pauli(3)) is None

    def test_agrees_with_brute_force(self, rng):
        for _ in range(100):
            w = haar_unitary(rng)
            m = haar_state(rng)
            q = pauli(int(rng.integers(1, 4)))
            for fam, rots in ((Z2, [X, Z]), (Z4, PAULIS)):
                got = check_forgeable(SchemeConfig(fam, w), m, q) is not None
                assert got == brute_force_forgeable(w, rots, m, q)


class TestConstructWitness:
    def test_wa_message(self):
        wit = construct_witness(WA_LITERAL)
        norm = SQ2 * math.sqrt(3 - SQ3)
        assert np.allclose(wit.message, [(SQ3 - 1) / norm, SQ2 / norm], atol=1e-9)
        assert np.array_equal(wit.attack, X)

    def test_wa_image(self):
        # the attacked state is W_a M0 or conj(W_a) M0 up to phase
        wit = construct_witness(WA_LITERAL)
        image = wit.replacement @ wit.message
        assert equal_up_to_phase(image, WA_LITERAL @ wit.message) or equal_up_to_phase(
            image, WA_LITERAL.conj() @ wit.message
        )

    def test_identity_beta_zero(self):
        wit = construct_witness(I2)
        assert np.array_equal(wit.message, basis(0))
        assert equal_up_to_phase(wit.replacement @ basis(0), basis(1))

    def test_random_brute_force(self, rng):
        for _ in range(200):
            w = haar_unitary(rng)
            wit = construct_witness(w)
            assert brute_force_forgeable(w, [X, Z], wit.message, X)
            # U M0 is the image under the key (0, 0): X W^dag X W X M0
            assert equal_up_to_phase(wit.replacement @ wit.message, X @ w.conj().T @ X @ w @ X @ wit.message)

    def test_alternate_replacement(self, rng):
        for _ in range(50):
            w = haar_unitary(rng)
            wit = construct_witness(w)
            assert equal_up_to_phase(wit.alternate @ wit.message, wit.replacement @ wit.message)

    def test_forged_pair_passes_verification(self, rng):
        for _ in range(50):
            w = haar_unitary(rng)
            scheme = SchemeConfig(Z2, w)
            wit = construct_witness(w)
            for key in scheme.keys():
                s = sign(scheme, key, wit.message)
                assert verify_exact(scheme, key, wit.replacement @ wit.message, wit.attack @ s)

    def test_residuals(self, wa_z2):
        wit = construct_witness(WA_LITERAL)
        assert max(key_residuals(wa_z2, wit).values()) <= 1e-9


class TestEigenstateWitness:
    def test_wa_matches_constructive(self):
        m0 = construct_witness(WA_LITERAL).message
        a = witness_via_eigenstate(WA_LITERAL, 1, 0).message
        b = witness_via_eigenstate(WA_LITERAL, 1, 1).message
        assert abs(np.vdot(a, b)) < 1e-12
        assert equal_up_to_phase(m0, a) or equal_up_to_phase(m0, b)

    def test_identity(self):
        for which in (0, 1):
            wit = witness_via_eigenstate(I2, 1, which)
            assert brute_force_forgeable(I2, [X, Z], wit.message, X)

    def test_t_l2(self):
        wit = witness_via_eigenstate(T_LITERAL, 2)
        assert brute_force_forgeable(T_LITERAL, [X, Z], wit.message, PAULIS[2])

    @pytest.mark.parametrize("l", [1, 2, 3])
    def test_random(self, rng, l):
        for _ in range(100):
            w = haar_unitary(rng)
            for which in (0, 1):
                wit = witness_via_eigenstate(w, l, which)
                assert brute_force_forgeable(w, [X, Z], wit.message, PAULIS[l])

    def test_consistent_with_constructive(self, rng):
        checked = 0
        while checked < 100:
            w = haar_unitary(rng)
            if abs(abc(w).beta) <= 0.05:
                continue
            m0 = construct_witness(w).message
            eig = [witness_via_eigenstate(w, 1, i).message for i in (0, 1)]
            assert any(equal_up_to_phase(m0, v) for v in eig)
            checked += 1

    def test_bad_pauli(self):
        with pytest.raises(ValueError):
            witness_via_eigenstate(I2, 0)


class TestUniformForgery:
    def test_identity_x(self):
        res = uniform_forgery(SchemeConfig(Z2, I2), pauli(1))
        assert res.exists
        assert equal_up_to_phase(res.replacement, X)

    @pytest.mark.parametrize("l", [1, 2, 3])
    def test_wa_none(self, wa_z2, l):
        assert not uniform_forgery(wa_z2, pauli(l)).exists

    def test_t_random_attacks(self, t_z4, rng):
        for _ in range(100):
            q = haar_unitary(rng)
            assert not uniform_forgery(t_z4, q).exists

    def test_uniform_implies_every_message_forgeable(self, rng):
        scheme = SchemeConfig(Z2, I2)
        for _ in range(20):
            assert check_forgeable(scheme, haar_state(rng), pauli(3)) is not None


class TestTable1:
    def test_example_row(self):
        w = from_pauli_coeffs([1 / SQ2, 1 / SQ2, 0, 0])
        c = classify_table1(w)
        assert 1 in c.forging_paulis
        assert (1, 3) in c.satisfied_conditions

    def test_identity_all(self):
        assert classify_table1(I2).forging_paulis == [1, 2, 3]

    def test_t_none(self):
        c = classify_table1(T_LITERAL)
        assert c.forging_paulis == []
        assert min(min(r) for r in c.residuals.values()) > 0.1

    def test_wa(self, wa_z4, rng):
        c = classify_table1(WA_LITERAL)
        assert c.forging_paulis == []
        # only one expression of the sigma_3 row vanishes: basis states alone are forgeable
        e3 = table1_conditions(WA_LITERAL)[3]
        assert abs(e3[0]) < 1e-12 and abs(e3[1]) > 0.1 and abs(e3[2]) > 0.1
        for l in (1, 2, 3):
            assert any(check_forgeable(wa_z4, random_message(rng), pauli(l)) is None for _ in range(50))

    def test_two_nonzero_coefficients_always_forging(self, rng):
        for _ in range(100):
            i, j = rng.choice(4, 2, replace=False)
            w = np.zeros(4)
            w[[i, j]] = rng.standard_normal(2)
            w /= np.linalg.norm(w)
            assert classify_table1(from_pauli_coeffs(w)).forging_paulis

    def test_structured_reports_agree_with_messages(self, rng):
        for _ in range(40):
            w = structured_assistant(rng)
            scheme = SchemeConfig(Z4, w)
            c = classify_table1(w)
            assert c.forging_paulis
            for l in (1, 2, 3):
                reported = l in c.forging_paulis
                assert reported == uniform_forgery(scheme, pauli(l)).exists
                if reported:
                    assert all(check_forgeable(scheme, random_message(rng), pauli(l)) for _ in range(50))

    def test_random_agree(self, rng):
        for _ in range(200):
            w = haar_unitary(rng)
            scheme = SchemeConfig(Z4, w)
            c = classify_table1(w)
            for l in (1, 2, 3):
                assert (l in c.forging_paulis) == uniform_forgery(scheme, pauli(l)).exists


class TestJson:
    def test_round_trip(self):
        wit = construct_witness(WA_LITERAL)
        doc = json.loads(json.dumps(witness_to_dict(wit)))
        back = witness_from_dict(doc)
        assert np.array_equal(back.message, wit.message)
        assert np.array_equal(back.attack, wit.attack)
        assert np.array_equal(back.replacement, wit.replacement)
        assert np.array_equal(back.alternate, wit.alternate)
        assert back.phases == wit.phases
        assert set(doc["phases"]) == {f"{j},{k}" for j in (0, 1) for k in range(4)}

    def test_schema(self):
        doc = witness_to_dict(check_forgeable(SchemeConfig(Z2, WA_LITERAL), basis(0), pauli(3)))
        assert set(doc) == {"message", "attack", "replacement", "phases", "residual"}
        assert np.shape(doc["message"]) == (2, 2)
        assert np.shape(doc["attack"]) == (2, 2, 2)
