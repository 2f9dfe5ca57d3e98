"""State-vector layer: construction, gate application, comparison."""
import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from exchange_teleport.qstate import (
    HADAMARD,
    I2,
    X,
    Z,
    StateVector,
    apply_unitary,
    equal_up_to_global_phase,
    extract_qubit,
    factor_out,
    fidelity,
    full_operator,
    inner,
    ket,
    make_state,
    random_state,
    random_unitary,
    reduced_purity,
    singlet,
    tensor,
    triplet0,
    triplet0_x,
    zero,
)

S = 1 / math.sqrt(2)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_singlet_amplitudes():
    assert np.allclose(singlet().amps, [0, S, -S, 0], atol=1e-15)


def test_zero_amplitudes():
    assert np.allclose(zero().amps, [1, 0])


def test_triplet0_x_expands_to_z_basis():
    by_hand = (np.kron(ket("+").amps, ket("-").amps) + np.kron(ket("-").amps, ket("+").amps)) * S
    assert np.allclose(triplet0_x().amps, by_hand, atol=1e-15)
    assert np.allclose(by_hand, [S, 0, 0, -S], atol=1e-15)


def test_make_state_normalizes_amplitudes():
    s = make_state(1, [3, 4j])
    assert abs(s.norm() - 1) < 1e-12
    assert np.allclose(s.amps, [0.6, 0.8j])


def test_make_state_labels_read_left_to_right():
    # |q1 q2 q3>: qubit 1 is the most significant bit.
    s = make_state(3, "011")
    assert s.amps[0b011] == 1


@pytest.mark.parametrize("bad", [[0, 0], [1e-14, 0]])
def test_make_state_rejects_zero_norm(bad):
    with pytest.raises(ValueError):
        make_state(1, bad)


@pytest.mark.parametrize("n", [0, 9])
def test_make_state_rejects_bad_qubit_count(n):
    with pytest.raises(ValueError):
        make_state(n, "0" * max(n, 1))


def test_state_rejects_non_finite():
    with pytest.raises(ValueError):
        StateVector([np.nan, 1])


def test_states_are_immutable():
    s = ket("0")
    with pytest.raises(ValueError):
        s.amps[0] = 0


def test_apply_identity_is_noop():
    s = random_state(3, np.random.default_rng(0))
    assert np.allclose(apply_unitary(s, [2], I2).amps, s.amps)


def test_zz_on_singlet_flips_sign():
    out = apply_unitary(singlet(), [1, 2], np.kron(Z, Z))
    assert np.allclose(out.amps, -singlet().amps)


def test_bit_flip_on_first_qubit():
    assert apply_unitary(ket("01"), [1], X) == ket("11")


def test_target_order_matters():
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    assert apply_unitary(ket("10"), [1, 2], cnot) == ket("11")
    assert apply_unitary(ket("10"), [2, 1], cnot) == ket("10")


def test_apply_unitary_errors():
    s = ket("00")
    with pytest.raises(ValueError):
        apply_unitary(s, [1, 1], np.eye(4))
    with pytest.raises(ValueError):
        apply_unitary(s, [1], np.eye(4))
    with pytest.raises(ValueError):
        apply_unitary(s, [3], X)
    # Non-unitary input is caught by the norm check.
    with pytest.raises(ValueError):
        apply_unitary(ket("10"), [1], np.array([[1, 1], [0, 1]]))


def test_full_operator_matches_apply():
    rng = np.random.default_rng(5)
    s = random_state(3, rng)
    u = random_unitary(4, rng)
    assert np.allclose(full_operator(3, [3, 1], u) @ s.amps, apply_unitary(s, [3, 1], u).amps)


def test_tensor_index_placement():
    psi = make_state(1, [0.6, 0.8])
    out = tensor(psi, ket("01"))
    expected = np.zeros(8)
    expected[0b001] = 0.6
    expected[0b101] = 0.8
    assert np.allclose(out.amps, expected)


def test_tensor_size_limit():
    with pytest.raises(ValueError):
        tensor(ket("0000"), ket("00000"))


def test_inner_products():
    assert abs(inner(singlet(), triplet0())) < 1e-15
    assert abs(inner(singlet(), singlet()) - 1) < 1e-15


def test_inner_is_conjugate_linear_in_first_argument():
    a = make_state(1, [1, 1j])
    b = ket("1")
    assert abs(inner(a, b) - (-1j * S)) < 1e-15


def test_global_phase_examples():
    rng = np.random.default_rng(1)
    psi = random_state(1, rng)
    theta = rng.uniform(0, 2 * math.pi)
    assert equal_up_to_global_phase(psi, StateVector(cmath.exp(1j * theta) * psi.amps))
    assert not equal_up_to_global_phase(ket("0"), ket("1"))
    phi = 0.77
    rot = np.diag([cmath.exp(-0.5j * phi), cmath.exp(0.5j * phi)])
    good = StateVector(rot @ psi.amps)
    assert equal_up_to_global_phase(StateVector(-(rot @ psi.amps)), good)


def test_global_phase_dimension_mismatch():
    with pytest.raises(ValueError):
        equal_up_to_global_phase(ket("0"), ket("00"))


def test_factor_out_and_extract():
    psi = random_state(1, np.random.default_rng(2))
    joint = tensor(ket("1"), psi, ket("+"))
    assert equal_up_to_global_phase(factor_out(joint, [1, 3], ket("1+")), psi)
    assert equal_up_to_global_phase(extract_qubit(joint, 2), psi)


def test_extract_rejects_entangled():
    with pytest.raises(ValueError):
        extract_qubit(tensor(ket("0"), singlet()), 2)


def test_reduced_purity():
    assert abs(reduced_purity(singlet(), [1]) - 0.5) < 1e-12
    assert abs(reduced_purity(ket("01"), [1]) - 1) < 1e-12


def test_norm_preserved_for_many_random_pairs():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        k = int(rng.integers(1, n + 1))
        targets = list(rng.permutation(np.arange(1, n + 1))[:k])
        s = apply_unitary(random_state(n, rng), targets, random_unitary(1 << k, rng))
        assert abs(np.linalg.norm(s.amps) - 1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_disjoint_gates_commute(seed):
    rng = np.random.default_rng(seed)
    s = random_state(4, rng)
    ua, ub = random_unitary(4, rng), random_unitary(2, rng)
    one = apply_unitary(apply_unitary(s, [1, 3], ua), [4], ub)
    two = apply_unitary(apply_unitary(s, [4], ub), [1, 3], ua)
    assert np.allclose(one.amps, two.amps, atol=1e-12, rtol=0)


@settings(max_examples=60, deadline=None)
@given(seeds, st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_phase_equality_is_an_equivalence(seed, t1, t2):
    rng = np.random.default_rng(seed)
    a = random_state(2, rng)
    b = StateVector(cmath.exp(1j * t1) * a.amps)
    c = StateVector(cmath.exp(1j * t2) * b.amps)
    assert equal_up_to_global_phase(a, a)
    assert equal_up_to_global_phase(a, b) and equal_up_to_global_phase(b, a)
    assert equal_up_to_global_phase(a, c, tol=2e-10)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_fidelity_bounded(seed):
    rng = np.random.default_rng(seed)
    a, b = random_state(2, rng), random_state(2, rng)
    f = fidelity(a, b)
    assert -1e-15 <= f <= 1 + 1e-15


def test_hadamard_maps_basis():
    assert apply_unitary(ket("0"), [1], HADAMARD) == ket("+")
    assert apply_unitary(ket("1"), [1], HADAMARD) == ket("-")
