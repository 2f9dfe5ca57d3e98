"""Compiling single-qubit rotations into exchange pulses and R gates.

A ``GateSequence`` lists elementary steps in time order: the first step
acts first, so the sequence evaluates to ``S_k ... S_2 S_1``.

Conjugation ``conjugate(a, body)`` with ``a`` realizing exp(+i theta A)
produces ``inverse(a) + body + a``, whose operator is
exp(+i theta A) body exp(-i theta A).  For A^2 = I anticommuting with B,
that maps exp(-i phi B) to exp(+i phi B) at theta = pi/2 and to
exp(phi A B) at theta = pi/4.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Union

import numpy as np

from .exchange import ExchangePulse, r_gate
from .qstate import HADAMARD, X, Y, Z, check_unitary, full_operator

ANGLE_TOL = 1e-12


@dataclass(frozen=True)
class RGate:
    qubit: int
    axis: str
    dagger: bool = False

    def __post_init__(self):
        if self.axis not in ("x", "z"):
            raise ValueError(f"R gates exist for axes x and z, got {self.axis!r}")

    @property
    def qubits(self) -> tuple[int]:
        return (self.qubit,)

    def unitary(self) -> np.ndarray:
        return r_gate(self.axis, self.dagger)

    def inverse(self) -> "RGate":
        return RGate(self.qubit, self.axis, not self.dagger)

    def as_dict(self) -> dict[str, Any]:
        return {"kind": "R", "qubits": [self.qubit], "axis": self.axis, "dagger": self.dagger}


def _pulse_inverse(p: ExchangePulse) -> ExchangePulse:
    return ExchangePulse(p.i, p.j, -p.phi_perp, -p.phi_z)


def _pulse_dict(p: ExchangePulse) -> dict[str, Any]:
    return {"kind": "U", "qubits": [p.i, p.j], "phi_perp": p.phi_perp, "phi_z": p.phi_z}


ElementaryStep = Union[ExchangePulse, RGate]


def step_inverse(step: ElementaryStep) -> ElementaryStep:
    if isinstance(step, RGate):
        return step.inverse()
    return _pulse_inverse(step)


def step_dict(step: ElementaryStep) -> dict[str, Any]:
    if isinstance(step, RGate):
        return step.as_dict()
    return _pulse_dict(step)


@dataclass(frozen=True)
class GateSequence:
    steps: tuple[ElementaryStep, ...] = ()
    declared_target: str = ""

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        for s in self.steps:
            if not isinstance(s, (ExchangePulse, RGate)):
                raise TypeError(f"not an elementary step: {s!r}")

    @property
    def step_count(self) -> int:
        return len(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def __add__(self, other: "GateSequence") -> "GateSequence":
        return GateSequence(self.steps + other.steps, self.declared_target)

    def inverse(self) -> "GateSequence":
        return GateSequence(tuple(step_inverse(s) for s in reversed(self.steps)),
                            f"inverse({self.declared_target})")

    def with_target(self, target: str) -> "GateSequence":
        return GateSequence(self.steps, target)

    def n_qubits(self) -> int:
        return max((q for s in self.steps for q in s.qubits), default=1)

    def as_dict(self) -> dict[str, Any]:
        return {
            "declared_target": self.declared_target,
            "step_count": self.step_count,
            "steps": [step_dict(s) for s in self.steps],
        }


def evaluate(seq: GateSequence, n: int = 2) -> np.ndarray:
    """Unitary of the whole sequence on ``n`` qubits (first step applied first)."""
    dim = 1 << n
    total = np.eye(dim, dtype=complex)
    for step in seq.steps:
        for q in step.qubits:
            if not 1 <= q <= n:
                raise ValueError(f"step {step!r} touches qubit {q} outside 1..{n}")
        total = full_operator(n, list(step.qubits), step.unitary()) @ total
    return total


def conjugate(a_seq: GateSequence, body: GateSequence) -> GateSequence:
    """inverse(a) + body + a."""
    return GateSequence(a_seq.inverse().steps + body.steps + a_seq.steps, body.declared_target)


def _r(qubit: int, axis: str, dagger: bool = False) -> GateSequence:
    return GateSequence((RGate(qubit, axis, dagger),))


def build_xx(phi: float, phi_z: float = 0.0) -> GateSequence:
    """exp(-i phi X1 X2) in six steps.

    U(phi/2, phi_z) conjugated by exp(i pi/2 X1) = R_1x^2 flips the YY and ZZ
    parts, so multiplying by a second U(phi/2, phi_z) cancels them.
    """
    pulse = GateSequence((ExchangePulse(1, 2, phi / 2, phi_z),))
    wing = _r(1, "x") + _r(1, "x")
    seq = conjugate(wing, pulse) + pulse
    return seq.with_target(f"exp(-i*{phi!r}*X1X2)")


def build_yx(phi: float, phi_z: float = 0.0) -> GateSequence:
    """exp(-i phi Y1 X2): the six-step XX rotation conjugated by R_1z-dagger."""
    seq = conjugate(_r(1, "z", dagger=True), build_xx(phi, phi_z))
    return seq.with_target(f"exp(-i*{phi!r}*Y1X2)")


def _z_core(phi: float, phi_z: float) -> GateSequence:
    # Conjugating exp(-i phi X1X2) by exp(+i pi/4 Y1X2) gives exp(-i phi Z1).
    return conjugate(build_yx(-math.pi / 4, phi_z), build_xx(phi, phi_z))


def build_z_rotation(phi: float, phi_z: float = 0.0) -> GateSequence:
    """exp(-i phi Z1) in 8 + 6 + 8 = 22 steps."""
    return _z_core(phi, phi_z).with_target(f"exp(-i*{phi!r}*Z1)")


def build_y_rotation(phi: float, phi_z: float = 0.0) -> GateSequence:
    """exp(-i phi Y1) in 22 steps.

    The Z construction is wrapped by R_1z ... R_1z-dagger, which commutes
    with the Z rotation inside.  Swapping that outer layer for
    R_1x-dagger ... R_1x conjugates the inner exp(-i phi Z1) into
    exp(-i phi Y1) at no extra cost.
    """
    z = _z_core(phi, phi_z)
    first, last = z.steps[0], z.steps[-1]
    assert first == RGate(1, "z") and last == RGate(1, "z", True)
    inner = GateSequence(z.steps[1:-1])
    seq = conjugate(_r(1, "x"), inner)
    return seq.with_target(f"exp(-i*{phi!r}*Y1)")


def rotation_matrix(axis: str, phi: float) -> np.ndarray:
    pauli = {"x": X, "y": Y, "z": Z}[axis]
    return math.cos(phi) * np.eye(2) - 1j * math.sin(phi) * pauli


def _wrap(angle: float) -> float:
    """Reduce modulo pi into (-pi/2, pi/2]; a shift by pi only flips the global sign."""
    a = math.remainder(angle, math.pi)
    if a <= -math.pi / 2 + ANGLE_TOL:
        a += math.pi
    if abs(a) < ANGLE_TOL:
        a = 0.0
    return a


@dataclass(frozen=True)
class EulerAngles:
    alpha: float
    beta: float
    gamma: float

    def matrix(self) -> np.ndarray:
        return rotation_matrix("z", self.alpha) @ rotation_matrix("y", self.beta) @ rotation_matrix("z", self.gamma)


def euler_angles(u: np.ndarray) -> EulerAngles:
    """Angles with u = exp(-i alpha Z) exp(-i beta Y) exp(-i gamma Z) up to phase.

    beta lies in [0, pi/2]; alpha and gamma in (-pi/2, pi/2].  When beta is
    0 or pi/2 only alpha + gamma (or alpha - gamma) is determined and gamma
    is set to 0.
    """
    u = check_unitary(u)
    if u.shape != (2, 2):
        raise ValueError("expected a 2x2 unitary")
    v = u / cmath.sqrt(np.linalg.det(u))
    c, s = abs(v[0, 0]), abs(v[1, 0])
    beta = math.atan2(s, c)
    if s < 1e-14:
        alpha, gamma = cmath.phase(v[1, 1]), 0.0
    elif c < 1e-14:
        alpha, gamma = cmath.phase(v[1, 0]), 0.0
    else:
        plus = cmath.phase(v[1, 1])   # alpha + gamma
        minus = cmath.phase(v[1, 0])  # alpha - gamma
        alpha, gamma = (plus + minus) / 2, (plus - minus) / 2
    return EulerAngles(_wrap(alpha), beta if beta > ANGLE_TOL else 0.0, _wrap(gamma))


@dataclass(frozen=True)
class Synthesis:
    angles: EulerAngles
    sequence: GateSequence
    elided: tuple[str, ...] = field(default=())


def euler_synthesize(u: np.ndarray, phi_z: float = 0.0) -> Synthesis:
    """ZYZ decomposition compiled into 22-step rotations; zero factors are dropped."""
    ang = euler_angles(u)
    seq = GateSequence()
    elided = []
    # gamma acts first, alpha last.
    for name, axis, value in (("gamma", "z", ang.gamma), ("beta", "y", ang.beta), ("alpha", "z", ang.alpha)):
        if abs(value) < ANGLE_TOL:
            elided.append(name)
            continue
        builder = build_z_rotation if axis == "z" else build_y_rotation
        seq = seq + builder(value, phi_z)
    return Synthesis(ang, seq.with_target("euler(U)"), tuple(elided))


def phase_aligned_residual(actual: np.ndarray, target: np.ndarray) -> float:
    """max |actual - e^{i theta} target| with theta from the trace overlap."""
    overlap = np.vdot(target, actual)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-15 else 1.0
    return float(np.max(np.abs(actual - phase * target)))


def embed_first(u: np.ndarray, n: int = 2) -> np.ndarray:
    """u on qubit 1, identity on the rest."""
    return full_operator(n, [1], u)


def sequence_residual(seq: GateSequence, target: np.ndarray, n: int = 2) -> float:
    """Residual of a compiled single-qubit target acting on qubit 1 of ``n``."""
    return phase_aligned_residual(evaluate(seq, n), embed_first(target, n))


NAMED_TARGETS = {
    "I": np.eye(2, dtype=complex),
    "X": X,
    "Y": Y,
    "Z": Z,
    "H": HADAMARD,
    "S": np.diag([1, 1j]).astype(complex),
    "T": np.diag([1, cmath.exp(1j * math.pi / 4)]).astype(complex),
    "Rz": r_gate("z"),
    "Rx": r_gate("x"),
}


def parse_target(spec: str) -> tuple[np.ndarray, str]:
    """Named gate (``H``), rotation (``rz:0.9``, ``ry:1.2``, ``rx:0.3``), or a matrix file.

    Rotations use the exp(-i phi sigma) convention.
    """
    if spec in NAMED_TARGETS:
        return NAMED_TARGETS[spec], spec
    if ":" in spec:
        head, _, tail = spec.partition(":")
        axis = head.lower()
        if axis in ("rx", "ry", "rz"):
            phi = float(tail)
            return rotation_matrix(axis[1], phi), f"exp(-i*{phi!r}*{axis[1].upper()})"
    return read_matrix_file(spec), spec


def read_matrix_file(path: str) -> np.ndarray:
    """Four complex entries as whitespace-separated ``re im`` pairs, row-major."""
    with open(path) as fh:
        nums = [float(tok) for tok in fh.read().split()]
    if len(nums) != 8:
        raise ValueError(f"{path}: expected 8 numbers (4 complex entries), found {len(nums)}")
    vals = [complex(nums[k], nums[k + 1]) for k in range(0, 8, 2)]
    return np.array(vals, dtype=complex).reshape(2, 2)


def anticommuting_pairs(paulis: Iterable[str] = ("i", "x", "y", "z")) -> list[tuple[str, str]]:
    """Two-qubit Pauli labels (A, B) with {A, B} = 0, A on qubit 1 or both."""
    labels = [a + b for a in "xyz" for b in paulis]
    out = []
    for a in labels:
        for b in labels:
            if _anticommute(a, b):
                out.append((a, b))
    return out


def pauli_matrix(label: str) -> np.ndarray:
    mats = {"i": np.eye(2, dtype=complex), "x": X, "y": Y, "z": Z}
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        out = np.kron(out, mats[ch])
    return out


def _anticommute(a: str, b: str) -> bool:
    flips = sum(1 for p, q in zip(a, b) if p != "i" and q != "i" and p != q)
    return flips % 2 == 1


def pauli_exp(label: str, theta: float) -> np.ndarray:
    """exp(i theta P) for a Pauli string P."""
    p = pauli_matrix(label)
    return math.cos(theta) * np.eye(p.shape[0]) + 1j * math.sin(theta) * p


def conjugation_identity(a: str, b: str, theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of C_A^theta o exp(-i phi B) for the two standard angles.

    Left side is built literally as exp(+i theta A) exp(-i phi B) exp(-i theta A);
    right side is exp(+i phi B) at theta = pi/2 and exp(phi A B) at pi/4.
    """
    left = pauli_exp(a, theta) @ pauli_exp(b, -phi) @ pauli_exp(a, -theta)
    if math.isclose(theta, math.pi / 2):
        right = pauli_exp(b, phi)
    elif math.isclose(theta, math.pi / 4):
        ab = pauli_matrix(a) @ pauli_matrix(b)
        right = _expm_anti(phi, ab)
    else:
        raise ValueError("identities are stated for theta = pi/2 and pi/4")
    return left, right


def _expm_anti(phi: float, ab: np.ndarray) -> np.ndarray:
    # (AB)^2 = -I for anticommuting Hermitian involutions, so exp(phi AB) = cos phi + AB sin phi.
    return math.cos(phi) * np.eye(ab.shape[0]) + math.sin(phi) * ab

