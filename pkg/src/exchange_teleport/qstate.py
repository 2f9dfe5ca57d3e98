"""Dense state vectors for a handful of spin-1/2 systems.

Qubits are labelled 1..n and qubit 1 is the most significant bit of the
basis index, so the ket |q1 q2 ... qn> reads left to right exactly as
written.  States are values: every operation returns a new
``StateVector`` and never mutates its inputs.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

MAX_QUBITS = 8
NORM_TOL = 1e-12
PHASE_TOL = 1e-10

SQRT1_2 = 1 / math.sqrt(2)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = SQRT1_2 * np.array([[1, 1], [1, -1]], dtype=complex)

PAULIS = {"i": I2, "x": X, "y": Y, "z": Z}

_KET_LABELS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": SQRT1_2 * np.array([1, 1], dtype=complex),
    "-": SQRT1_2 * np.array([1, -1], dtype=complex),
}


class StateVector:
    """Normalized pure state of ``n`` qubits.

    The amplitude array is read-only; use the module functions to derive
    new states.
    """

    __slots__ = ("n", "amps")

    def __init__(self, amps: Union[Sequence[complex], np.ndarray], normalize: bool = True):
        vec = np.array(amps, dtype=complex).reshape(-1)
        dim = vec.shape[0]
        n = dim.bit_length() - 1
        if dim < 2 or 1 << n != dim:
            raise ValueError(f"amplitude count must be a power of two >= 2, got {dim}")
        if n > MAX_QUBITS:
            raise ValueError(f"at most {MAX_QUBITS} qubits supported, got {n}")
        if not np.all(np.isfinite(vec)):
            raise ValueError("amplitudes must be finite")
        norm = float(np.linalg.norm(vec))
        if norm <= NORM_TOL:
            raise ValueError("cannot normalize a zero-norm vector")
        if normalize:
            vec = vec / norm
        elif abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm {norm!r})")
        vec.flags.writeable = False
        self.n = n
        self.amps = vec

    @classmethod
    def _trusted(cls, vec: np.ndarray) -> "StateVector":
        # Internal fast path for vectors already known to be normalized.
        obj = cls.__new__(cls)
        vec.flags.writeable = False
        obj.n = vec.shape[0].bit_length() - 1
        obj.amps = vec
        return obj

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def __len__(self) -> int:
        return self.dim

    def __repr__(self) -> str:
        terms = []
        for idx, amp in enumerate(self.amps):
            if abs(amp) > 1e-9:
                terms.append(f"({amp.real:+.4f}{amp.imag:+.4f}j)|{idx:0{self.n}b}>")
        return "StateVector(" + " ".join(terms) + ")"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.n == other.n and np.allclose(self.amps, other.amps, atol=PHASE_TOL, rtol=0)

    __hash__ = None  # type: ignore[assignment]


def make_state(n: int, assignment: Union[str, Sequence[complex], np.ndarray]) -> StateVector:
    """Build an ``n``-qubit state from a ket label or an amplitude list.

    A label is a string of ``0``, ``1``, ``+`` and ``-`` characters, one per
    qubit, e.g. ``make_state(3, "0+1")``.  Amplitude lists are normalized.
    """
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count must be in 1..{MAX_QUBITS}, got {n}")
    if isinstance(assignment, str):
        if len(assignment) != n:
            raise ValueError(f"label {assignment!r} does not describe {n} qubits")
        vec = np.ones(1, dtype=complex)
        for ch in assignment:
            try:
                vec = np.kron(vec, _KET_LABELS[ch])
            except KeyError:
                raise ValueError(f"unknown ket label {ch!r}") from None
        return StateVector._trusted(vec)
    vec = np.asarray(assignment, dtype=complex).reshape(-1)
    if vec.shape[0] != 1 << n:
        raise ValueError(f"expected {1 << n} amplitudes for {n} qubits, got {vec.shape[0]}")
    return StateVector(vec)


@lru_cache(maxsize=256)
def ket(label: str) -> StateVector:
    return make_state(len(label), label)


def zero() -> StateVector:
    return ket("0")


def one() -> StateVector:
    return ket("1")


def plus() -> StateVector:
    return ket("+")


def minus() -> StateVector:
    return ket("-")


def singlet() -> StateVector:
    """(|01> - |10>)/sqrt 2."""
    return StateVector._trusted(np.array([0, SQRT1_2, -SQRT1_2, 0], dtype=complex))


def triplet0() -> StateVector:
    """(|01> + |10>)/sqrt 2."""
    return StateVector._trusted(np.array([0, SQRT1_2, SQRT1_2, 0], dtype=complex))


def triplet0_x() -> StateVector:
    """(|+-> + |-+>)/sqrt 2, which equals (|00> - |11>)/sqrt 2."""
    return StateVector._trusted(np.array([SQRT1_2, 0, 0, -SQRT1_2], dtype=complex))


def bell_phi_plus() -> StateVector:
    return StateVector._trusted(np.array([SQRT1_2, 0, 0, SQRT1_2], dtype=complex))


def random_state(n: int, rng: np.random.Generator) -> StateVector:
    vec = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(vec)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    g = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def is_unitary(u: np.ndarray, tol: float = PHASE_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol, rtol=0))


def check_unitary(u: np.ndarray, tol: float = PHASE_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    dim = u.shape[0]
    if dim < 2 or dim & (dim - 1):
        raise ValueError(f"matrix dimension must be a power of two, got {dim}")
    if not is_unitary(u, tol):
        raise ValueError("matrix is not unitary")
    return u


def _check_targets(n: int, targets: Sequence[int]) -> list[int]:
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target qubit in {targets}")
    for t in targets:
        if not 1 <= t <= n:
            raise ValueError(f"qubit {t} out of range 1..{n}")
    return targets


def _front(amps: np.ndarray, n: int, targets: Sequence[int]) -> np.ndarray:
    """Reshape to (2**k, rest) with the target qubits leading, in order."""
    k = len(targets)
    if list(targets) == list(range(1, k + 1)):
        return amps.reshape(1 << k, -1)
    axes = [t - 1 for t in targets]
    rest = [a for a in range(n) if a not in axes]
    tensor = amps.reshape((2,) * n).transpose(axes + rest)
    return tensor.reshape(1 << len(axes), -1)


def _back(mat: np.ndarray, n: int, targets: Sequence[int]) -> np.ndarray:
    if list(targets) == list(range(1, len(targets) + 1)):
        return mat.reshape(-1)
    axes = [t - 1 for t in targets]
    rest = [a for a in range(n) if a not in axes]
    order = axes + rest
    inverse = np.argsort(order)
    return mat.reshape((2,) * n).transpose(inverse).reshape(-1)


def apply_unitary(s: StateVector, targets: Sequence[int], u: np.ndarray) -> StateVector:
    """Apply ``u`` to the listed qubits; the first target is u's high bit."""
    targets = _check_targets(s.n, targets)
    u = np.asarray(u, dtype=complex)
    if u.shape != (1 << len(targets), 1 << len(targets)):
        raise ValueError(
            f"operator of shape {u.shape} does not act on {len(targets)} qubit(s)"
        )
    out = _back(u @ _front(s.amps, s.n, targets), s.n, targets)
    norm = np.linalg.norm(out)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"operator did not preserve the norm ({norm!r}); is it unitary?")
    return StateVector._trusted(out)


def apply_operator(s: StateVector, targets: Sequence[int], op: np.ndarray) -> np.ndarray:
    """Raw (possibly non-unitary) action on the listed qubits; returns amplitudes."""
    targets = _check_targets(s.n, targets)
    return _back(np.asarray(op, dtype=complex) @ _front(s.amps, s.n, targets), s.n, targets)


def full_operator(n: int, targets: Sequence[int], op: np.ndarray) -> np.ndarray:
    """Embed ``op`` on ``targets`` into the full 2**n dimensional space."""
    targets = _check_targets(n, targets)
    dim = 1 << n
    cols = np.eye(dim, dtype=complex)
    out = np.empty((dim, dim), dtype=complex)
    for c in range(dim):
        out[:, c] = _back(op @ _front(cols[:, c], n, targets), n, targets)
    return out


def inner(s1: StateVector, s2: StateVector) -> complex:
    """<s1|s2>, conjugate-linear in the first argument."""
    if s1.n != s2.n:
        raise ValueError(f"qubit counts differ: {s1.n} vs {s2.n}")
    return complex(np.vdot(s1.amps, s2.amps))


def fidelity(s1: StateVector, s2: StateVector) -> float:
    """|<s1|s2>|, insensitive to global phase."""
    return abs(inner(s1, s2))


def equal_up_to_global_phase(s1: StateVector, s2: StateVector, tol: float = PHASE_TOL) -> bool:
    return fidelity(s1, s2) >= 1.0 - tol


def tensor(*states: StateVector) -> StateVector:
    """Tensor product; the first argument's qubits come first."""
    total = sum(s.n for s in states)
    if total > MAX_QUBITS:
        raise ValueError(f"tensor product would have {total} qubits (max {MAX_QUBITS})")
    vec = states[0].amps
    for s in states[1:]:
        vec = np.multiply.outer(vec, s.amps).reshape(-1)
    return StateVector._trusted(np.array(vec, dtype=complex))


def contract(s: StateVector, qubits: Sequence[int], partner: StateVector) -> np.ndarray:
    """Unnormalized amplitudes of <partner|_qubits |s> on the remaining qubits.

    Remaining qubits keep their relative order.
    """
    qubits = _check_targets(s.n, qubits)
    if partner.n != len(qubits):
        raise ValueError("partner state does not match the contracted qubits")
    if len(qubits) == s.n:
        raise ValueError("cannot contract every qubit")
    return partner.amps.conj() @ _front(s.amps, s.n, qubits)


def factor_out(s: StateVector, qubits: Sequence[int], partner: StateVector, tol: float = PHASE_TOL) -> StateVector:
    """Return the state left on the other qubits when ``qubits`` hold ``partner``.

    Raises if ``s`` is not (up to ``tol``) a product of ``partner`` with
    something else.
    """
    rest = contract(s, qubits, partner)
    weight = float(np.linalg.norm(rest))
    if weight < 1.0 - tol:
        raise ValueError(f"qubits {list(qubits)} are not in the given partner state (overlap {weight:.3g})")
    return StateVector(rest)


def extract_qubit(s: StateVector, qubit: int, tol: float = 1e-9) -> StateVector:
    """Single-qubit state of ``qubit`` when it is unentangled with the rest.

    The global phase of the result is arbitrary.
    """
    (qubit,) = _check_targets(s.n, [qubit])
    mat = _front(s.amps, s.n, [qubit])
    u, sv, _ = np.linalg.svd(mat)
    if s.n > 1 and sv[1] > tol:
        raise ValueError(f"qubit {qubit} is entangled with the rest (Schmidt weight {sv[1]:.3g})")
    return StateVector(u[:, 0])


def reduced_purity(s: StateVector, qubits: Iterable[int]) -> float:
    """Tr(rho^2) of the reduced state on ``qubits``."""
    qubits = _check_targets(s.n, list(qubits))
    mat = _front(s.amps, s.n, qubits)
    rho = mat @ mat.conj().T
    return float(np.real(np.trace(rho @ rho)))
