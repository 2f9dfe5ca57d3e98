"""Gate compiler: conjugation identities, step counts, Euler synthesis."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from exchange_teleport.exchange import ExchangePulse, r_gate
from exchange_teleport.qstate import HADAMARD, I2, X, Y, Z, random_unitary
from exchange_teleport.universality import (
    NAMED_TARGETS,
    EulerAngles,
    GateSequence,
    RGate,
    anticommuting_pairs,
    build_xx,
    build_y_rotation,
    build_yx,
    build_z_rotation,
    conjugate,
    conjugation_identity,
    euler_angles,
    euler_synthesize,
    evaluate,
    parse_target,
    pauli_exp,
    pauli_matrix,
    phase_aligned_residual,
    read_matrix_file,
    rotation_matrix,
    sequence_residual,
)

angles = st.floats(min_value=-2 * math.pi, max_value=2 * math.pi, allow_nan=False)


def kron(*ms):
    out = np.eye(1)
    for m in ms:
        out = np.kron(out, m)
    return out


def test_empty_sequence_is_identity():
    assert np.allclose(evaluate(GateSequence()), np.eye(4))


def test_r_squared_is_i_sigma():
    seq = GateSequence((RGate(1, "z"), RGate(1, "z")))
    assert np.allclose(evaluate(seq, 1), 1j * Z)


def test_r_cubed_is_minus_r_dagger():
    seq = GateSequence((RGate(1, "z"),) * 3)
    assert np.allclose(evaluate(seq, 1), -r_gate("z", True))


def test_evaluate_order_first_step_acts_first():
    seq = GateSequence((RGate(1, "x"), RGate(1, "z")))
    assert np.allclose(evaluate(seq, 1), r_gate("z") @ r_gate("x"))


def test_evaluate_index_out_of_range():
    with pytest.raises(ValueError):
        evaluate(GateSequence((ExchangePulse(1, 3, 0.1),)), 2)


def test_sequence_rejects_foreign_steps():
    with pytest.raises(TypeError):
        GateSequence(("R1z",))


def test_rgate_axis_check():
    with pytest.raises(ValueError):
        RGate(1, "y")


def test_inverse_sequence():
    seq = build_z_rotation(0.4, 0.2)
    assert np.allclose(evaluate(seq.inverse()) @ evaluate(seq), np.eye(4), atol=1e-12)


def test_conjugate_layout_and_count():
    a = GateSequence((RGate(1, "x"),))
    body = GateSequence((ExchangePulse(1, 2, 0.3),))
    seq = conjugate(a, body)
    assert seq.steps == (RGate(1, "x", True), ExchangePulse(1, 2, 0.3), RGate(1, "x"))
    assert seq.step_count == len(body) + 2 * len(a)


def test_conjugation_flips_anticommuting_rotation():
    rng = np.random.default_rng(0)
    for phi in rng.uniform(-3, 3, size=20):
        left, right = conjugation_identity("xi", "zi", math.pi / 2, phi)
        assert np.allclose(left, right, atol=1e-10)
        assert np.allclose(right, pauli_exp("zi", phi))


def test_conjugation_quarter_turn_gives_product():
    phi = 0.61
    left, right = conjugation_identity("zi", "xx", math.pi / 4, phi)
    assert np.allclose(left, right, atol=1e-10)
    # Z1 X1 X2 = i Y1 X2.
    assert np.allclose(right, expm(phi * kron(Z, I2) @ kron(X, X)), atol=1e-10)
    assert np.allclose(right, expm(1j * phi * kron(Y, X)), atol=1e-10)


def test_conjugation_commuting_is_noop():
    phi, theta = 0.8, 0.3
    a = pauli_exp("zi", theta)
    body = pauli_exp("zi", phi)
    assert np.allclose(a @ body @ a.conj().T, body)


def test_identities_for_all_anticommuting_pairs():
    pairs = anticommuting_pairs()
    assert len(pairs) > 0
    rng = np.random.default_rng(1)
    for a, b in pairs:
        pa, pb = pauli_matrix(a), pauli_matrix(b)
        assert np.allclose(pa @ pa, np.eye(4))
        assert np.allclose(pa @ pb, -pb @ pa)
        for theta in (math.pi / 2, math.pi / 4):
            phi = rng.uniform(-3, 3)
            left, right = conjugation_identity(a, b, theta, phi)
            assert np.allclose(left, right, atol=1e-10, rtol=0)


def test_conjugation_identity_rejects_other_angles():
    with pytest.raises(ValueError):
        conjugation_identity("xi", "zi", 0.3, 0.1)


def test_step_counts():
    assert build_xx(0.3).step_count == 6
    assert build_yx(0.3).step_count == 8
    assert build_z_rotation(0.3).step_count == 22
    assert build_y_rotation(0.3).step_count == 22


def test_xx_wings_are_r_gates():
    steps = build_xx(0.5).steps
    assert sum(isinstance(s, RGate) for s in steps) == 4
    assert sum(isinstance(s, ExchangePulse) for s in steps) == 2


def test_xx_zero_angle_is_identity():
    assert phase_aligned_residual(evaluate(build_xx(0.0, 0.7)), np.eye(4)) < 1e-10


def test_xx_independent_of_phi_z():
    ref = evaluate(build_xx(math.pi / 4, 0.0))
    for phi_z in (0.3, -1.2, 2.5):
        assert phase_aligned_residual(evaluate(build_xx(math.pi / 4, phi_z)), ref) < 1e-10


def test_yx_matches_exponential():
    assert phase_aligned_residual(evaluate(build_yx(0.7)), expm(-0.7j * kron(Y, X))) < 1e-10
    assert phase_aligned_residual(evaluate(build_yx(0.0)), np.eye(4)) < 1e-10


def test_z_half_turn():
    # exp(-i pi Z) = -I; Z itself (up to phase) needs phi = pi/2.
    assert np.allclose(evaluate(build_z_rotation(math.pi)), -np.eye(4), atol=1e-10)
    assert phase_aligned_residual(evaluate(build_z_rotation(math.pi / 2)), kron(Z, I2)) < 1e-10


def test_z_rotation_diagonal():
    phi = 1.234
    target = np.diag([np.exp(-1j * phi), np.exp(1j * phi)])
    assert sequence_residual(build_z_rotation(phi), target) < 1e-10


def test_rotations_over_many_angles():
    rng = np.random.default_rng(2)
    for _ in range(200):
        phi = rng.uniform(-2 * math.pi, 2 * math.pi)
        phi_z = rng.uniform(-math.pi, math.pi)
        assert sequence_residual(build_z_rotation(phi, phi_z), rotation_matrix("z", phi)) < 1e-10
        assert sequence_residual(build_y_rotation(phi, phi_z), rotation_matrix("y", phi)) < 1e-10


@settings(max_examples=50, deadline=None)
@given(angles, angles)
def test_xx_property(phi, phi_z):
    assert phase_aligned_residual(evaluate(build_xx(phi, phi_z)), expm(-1j * phi * kron(X, X))) < 1e-10


def test_euler_identity():
    syn = euler_synthesize(np.eye(2))
    assert (syn.angles.alpha, syn.angles.beta, syn.angles.gamma) == (0.0, 0.0, 0.0)
    assert syn.sequence.step_count == 0
    assert set(syn.elided) == {"alpha", "beta", "gamma"}


def test_euler_single_z_factor():
    phi = 0.9
    syn = euler_synthesize(rotation_matrix("z", phi))
    assert abs(syn.angles.alpha - phi) < 1e-12
    assert syn.angles.beta == 0.0 and syn.angles.gamma == 0.0
    assert syn.sequence.step_count == 22


def test_euler_hadamard():
    syn = euler_synthesize(HADAMARD)
    assert phase_aligned_residual(syn.angles.matrix(), HADAMARD) < 1e-10
    assert syn.sequence.step_count <= 66
    assert sequence_residual(syn.sequence, HADAMARD) < 1e-10


def test_euler_ranges():
    rng = np.random.default_rng(3)
    for _ in range(200):
        ang = euler_angles(random_unitary(2, rng))
        assert 0 <= ang.beta <= math.pi / 2 + 1e-12
        assert -math.pi / 2 < ang.alpha <= math.pi / 2
        assert -math.pi / 2 < ang.gamma <= math.pi / 2


def test_euler_round_trip_haar():
    rng = np.random.default_rng(4)
    for _ in range(500):
        u = random_unitary(2, rng)
        assert phase_aligned_residual(euler_angles(u).matrix(), u) < 1e-10


def test_euler_synthesis_round_trip_sample():
    rng = np.random.default_rng(5)
    for _ in range(25):
        u = random_unitary(2, rng)
        assert sequence_residual(euler_synthesize(u).sequence, u) < 1e-10


@pytest.mark.parametrize("name", sorted(NAMED_TARGETS))
def test_named_targets_compile(name):
    u = NAMED_TARGETS[name]
    syn = euler_synthesize(u)
    assert sequence_residual(syn.sequence, u) < 1e-10
    assert syn.sequence.step_count == 22 * (3 - len(syn.elided))


def test_degenerate_beta_half_turn():
    # beta = pi/2 corner: Y itself.
    syn = euler_synthesize(Y)
    assert sequence_residual(syn.sequence, Y) < 1e-10


def test_euler_rejects_non_unitary():
    with pytest.raises(ValueError):
        euler_angles(np.array([[1, 1], [0, 1]]))


def test_euler_angles_matrix():
    ang = EulerAngles(0.1, 0.2, 0.3)
    expected = rotation_matrix("z", 0.1) @ rotation_matrix("y", 0.2) @ rotation_matrix("z", 0.3)
    assert np.allclose(ang.matrix(), expected)


def test_parse_target_forms(tmp_path):
    u, name = parse_target("H")
    assert np.allclose(u, HADAMARD) and name == "H"
    u, _ = parse_target("rz:0.9")
    assert np.allclose(u, rotation_matrix("z", 0.9))
    path = tmp_path / "m.txt"
    path.write_text("0 0 1 0\n1 0 0 0\n")
    assert np.allclose(parse_target(str(path))[0], X)
    assert np.allclose(read_matrix_file(str(path)), X)


def test_matrix_file_wrong_count(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("1 0 0 0 0 0")
    with pytest.raises(ValueError):
        read_matrix_file(str(path))


def test_sequence_serialization():
    d = build_xx(0.2, 0.1).as_dict()
    assert d["step_count"] == 6
    kinds = [s["kind"] for s in d["steps"]]
    assert kinds.count("U") == 2 and kinds.count("R") == 4
    pulse = [s for s in d["steps"] if s["kind"] == "U"][0]
    assert pulse["qubits"] == [1, 2] and pulse["phi_perp"] == 0.1
