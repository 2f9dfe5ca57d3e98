"""Projective measurements described by explicit projector families.

Every observable acts on an ordered tuple of qubits and lists its outcomes
in a fixed declaration order.  ``measure_branches`` enumerates all
outcomes exactly; ``measure_sample`` draws one of them with a single
uniform variate, by inverse CDF over that same order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Optional, Sequence

import numpy as np

from .qstate import (
    PAULIS,
    StateVector,
    _back,
    _check_targets,
    _front,
    bell_phi_plus,
    ket,
    singlet,
)

PROJECTOR_TOL = 1e-10
PRUNE_TOL = 1e-12


@dataclass(frozen=True)
class Outcome:
    label: str
    eigenvalue: float
    projector: np.ndarray = field(repr=False)

    @property
    def rank(self) -> int:
        return int(round(float(np.real(np.trace(self.projector)))))


@dataclass(frozen=True)
class ProjectiveObservable:
    label: str
    qubits: tuple[int, ...]
    outcomes: tuple[Outcome, ...]

    def __post_init__(self):
        k = len(self.qubits)
        if len(set(self.qubits)) != k or k == 0:
            raise ValueError(f"bad qubit list {self.qubits}")
        dim = 1 << k
        total = np.zeros((dim, dim), dtype=complex)
        for o in self.outcomes:
            p = o.projector
            if p.shape != (dim, dim):
                raise ValueError(f"projector for {o.label!r} has shape {p.shape}, expected {(dim, dim)}")
            if not np.allclose(p, p.conj().T, atol=PROJECTOR_TOL, rtol=0):
                raise ValueError(f"projector for {o.label!r} is not Hermitian")
            if not np.allclose(p @ p, p, atol=PROJECTOR_TOL, rtol=0):
                raise ValueError(f"projector for {o.label!r} is not idempotent")
            total = total + p
        for a in range(len(self.outcomes)):
            for b in range(a + 1, len(self.outcomes)):
                prod = self.outcomes[a].projector @ self.outcomes[b].projector
                if not np.allclose(prod, 0, atol=PROJECTOR_TOL):
                    raise ValueError(
                        f"projectors {self.outcomes[a].label!r} and {self.outcomes[b].label!r} overlap"
                    )
        if not np.allclose(total, np.eye(dim), atol=PROJECTOR_TOL, rtol=0):
            raise ValueError("projectors do not sum to the identity")
        labels = [o.label for o in self.outcomes]
        if len(set(labels)) != len(labels):
            raise ValueError("outcome labels must be unique")

    def outcome(self, label: str) -> Outcome:
        for o in self.outcomes:
            if o.label == label:
                return o
        raise KeyError(label)

    def on(self, *qubits: int) -> "ProjectiveObservable":
        """Same projectors, relocated onto other qubits."""
        return ProjectiveObservable(self.label, tuple(qubits), self.outcomes)


@dataclass(frozen=True)
class MeasurementRecord:
    observable: str
    outcome: str
    probability: float
    eigenvalue: float = 0.0

    def __post_init__(self):
        if not -1e-12 <= self.probability <= 1 + 1e-12:
            raise ValueError(f"probability {self.probability} outside [0, 1]")

    def as_dict(self) -> dict[str, Any]:
        return {
            "observable": self.observable,
            "outcome": self.outcome,
            "probability": self.probability,
        }


@dataclass
class BranchNode:
    """Node of an exact outcome tree.

    ``probability`` is the absolute probability of reaching this node from
    the root.  ``record`` is the measurement that led here (``None`` at the
    root or after a deterministic step).  Leaves carry a free-form ``tag``.
    """

    state: StateVector
    probability: float
    record: Optional[MeasurementRecord] = None
    children: list["BranchNode"] = field(default_factory=list)
    tag: dict[str, Any] = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> Iterator["BranchNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            if node.children:
                stack.extend(reversed(node.children))
            else:
                yield node

    def walk(self) -> Iterator["BranchNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaf_mass(self) -> float:
        return float(sum(leaf.probability for leaf in self.leaves()))

    def check_consistency(self, tol: float = PRUNE_TOL) -> None:
        """Children must carry exactly their parent's probability."""
        for node in self.walk():
            if node.children:
                total = sum(c.probability for c in node.children)
                if abs(total - node.probability) > tol:
                    raise AssertionError(
                        f"children sum to {total!r}, parent has {node.probability!r}"
                    )


def _projector(vectors: Sequence[np.ndarray]) -> np.ndarray:
    mat = np.array(vectors, dtype=complex).T
    return mat @ mat.conj().T


def _basis_observable(label: str, qubits: Sequence[int], states: Sequence[np.ndarray],
                      labels: Sequence[str], eigenvalues: Sequence[float]) -> ProjectiveObservable:
    outcomes = tuple(
        Outcome(lab, float(ev), _projector([vec])) for lab, ev, vec in zip(labels, eigenvalues, states)
    )
    return ProjectiveObservable(label, tuple(qubits), outcomes)


def pauli_z(j: int) -> ProjectiveObservable:
    return _basis_observable(f"Z{j}", [j], [ket("0").amps, ket("1").amps], ["0", "1"], [1, -1])


def pauli_x(j: int) -> ProjectiveObservable:
    return _basis_observable(f"X{j}", [j], [ket("+").amps, ket("-").amps], ["+", "-"], [1, -1])


def zz(i: int, j: int) -> ProjectiveObservable:
    """Z_i Z_j with eigenvalues +1 (even parity) and -1 (odd parity)."""
    even = _projector([ket("00").amps, ket("11").amps])
    odd = _projector([ket("01").amps, ket("10").amps])
    return ProjectiveObservable(
        f"Z{i}Z{j}", (i, j), (Outcome("+1", 1.0, even), Outcome("-1", -1.0, odd))
    )


def total_spin_sq(i: int, j: int) -> ProjectiveObservable:
    """Total spin squared of a pair: S=0 is the singlet, S=1 the triplet."""
    p0 = _projector([singlet().amps])
    return ProjectiveObservable(
        f"S^2({i},{j})",
        (i, j),
        (Outcome("S=0", 0.0, p0), Outcome("S=1", 2.0, np.eye(4, dtype=complex) - p0)),
    )


def sz_sq(i: int, j: int) -> ProjectiveObservable:
    """(S_z)^2 = (I + Z_i Z_j)/2: 0 on span{|01>,|10>}, 1 on span{|00>,|11>}."""
    zero = _projector([ket("01").amps, ket("10").amps])
    one = _projector([ket("00").amps, ket("11").amps])
    return ProjectiveObservable(
        f"Sz^2({i},{j})", (i, j), (Outcome("0", 0.0, zero), Outcome("1", 1.0, one))
    )


def sx_sq(i: int, j: int) -> ProjectiveObservable:
    """(S_x)^2 = (I + X_i X_j)/2: 0 on span{|+->,|-+>}, 1 on span{|++>,|-->}."""
    zero = _projector([ket("+-").amps, ket("-+").amps])
    one = _projector([ket("++").amps, ket("--").amps])
    return ProjectiveObservable(
        f"Sx^2({i},{j})", (i, j), (Outcome("0", 0.0, zero), Outcome("1", 1.0, one))
    )


BELL_LABELS = ("i", "x", "y", "z")
_BELL_STATES = tuple(np.kron(PAULIS[a], np.eye(2)) @ bell_phi_plus().amps for a in BELL_LABELS)


def bell_states() -> list[np.ndarray]:
    """(sigma^a (x) I)|Phi+> for a in I, X, Y, Z."""
    return [v.copy() for v in _BELL_STATES]


def bell_basis(i: int, j: int) -> ProjectiveObservable:
    return _basis_observable(f"Bell({i},{j})", [i, j], bell_states(), BELL_LABELS, range(4))


def custom_basis(qubits: Sequence[int], states: Sequence[Any], labels: Optional[Sequence[str]] = None,
                 label: str = "basis", tol: float = PROJECTOR_TOL) -> ProjectiveObservable:
    """Measurement in a user-supplied orthonormal basis of the listed qubits."""
    vecs = [np.asarray(getattr(s, "amps", s), dtype=complex).reshape(-1) for s in states]
    dim = 1 << len(qubits)
    if len(vecs) != dim or any(v.shape[0] != dim for v in vecs):
        raise ValueError(f"need {dim} basis vectors of length {dim}")
    gram = np.array(vecs) @ np.array(vecs).conj().T
    if not np.allclose(gram, np.eye(dim), atol=tol, rtol=0):
        raise ValueError("basis is not orthonormal")
    if labels is None:
        labels = [str(k) for k in range(dim)]
    return _basis_observable(label, qubits, vecs, labels, range(dim))


_KINDS = {
    "pauli_z": pauli_z,
    "pauli_x": pauli_x,
    "zz": zz,
    "total_spin_sq": total_spin_sq,
    "sz_sq": sz_sq,
    "sx_sq": sx_sq,
    "bell_basis": bell_basis,
    "custom_basis": custom_basis,
}


def make_observable(kind: str, *args, **kwargs) -> ProjectiveObservable:
    try:
        factory = _KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown observable kind {kind!r}") from None
    return factory(*args, **kwargs)


def _prepare(s: StateVector, obs: ProjectiveObservable) -> np.ndarray:
    if max(obs.qubits) > s.n:
        raise ValueError(f"observable {obs.label} acts outside a {s.n}-qubit state")
    _check_targets(s.n, obs.qubits)
    return _front(s.amps, s.n, obs.qubits)


def measure_branches(s: StateVector, obs: ProjectiveObservable) -> list[tuple[MeasurementRecord, StateVector]]:
    """All outcomes with their Born probabilities and renormalized collapses."""
    mat = _prepare(s, obs)
    out = []
    for o in obs.outcomes:
        proj = o.projector @ mat
        p = float(np.vdot(proj, proj).real)
        if p < PRUNE_TOL:
            continue
        vec = _back(proj / np.sqrt(p), s.n, obs.qubits)
        out.append((MeasurementRecord(obs.label, o.label, min(p, 1.0), o.eigenvalue), StateVector._trusted(vec)))
    return out


def outcome_probabilities(s: StateVector, obs: ProjectiveObservable) -> list[float]:
    """Born probabilities of every declared outcome, unpruned."""
    mat = _prepare(s, obs)
    probs = []
    for o in obs.outcomes:
        proj = o.projector @ mat
        probs.append(float(np.vdot(proj, proj).real))
    return probs


def choose_index(probs: Sequence[float], u: float) -> int:
    """Inverse CDF: first index whose cumulative probability exceeds ``u``.

    Zero-probability entries are never chosen.
    """
    acc = 0.0
    last = None
    for k, p in enumerate(probs):
        if p < PRUNE_TOL:
            continue
        acc += p
        last = k
        if u < acc:
            return k
    if last is None:
        raise ValueError("no outcome has positive probability")
    return last


def measure_sample(s: StateVector, obs: ProjectiveObservable,
                   rng: np.random.Generator) -> tuple[MeasurementRecord, StateVector]:
    """Draw one outcome with a single ``rng.random()`` call and collapse onto it."""
    probs = outcome_probabilities(s, obs)
    k = choose_index(probs, rng.random())
    o = obs.outcomes[k]
    proj = o.projector @ _front(s.amps, s.n, obs.qubits)
    vec = _back(proj / np.sqrt(probs[k]), s.n, obs.qubits)
    record = MeasurementRecord(obs.label, o.label, min(probs[k], 1.0), o.eigenvalue)
    return record, StateVector._trusted(vec)


def trial_rng(seed: int, trial: Optional[int] = None) -> np.random.Generator:
    """Independent PCG64 stream for ``(seed, trial)``.

    ``trial=None`` gives the experiment-level stream (used e.g. to draw the
    input state); trials use spawn keys ``(trial,)``.
    """
    if not 0 <= seed < 1 << 64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    key = () if trial is None else (int(trial),)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))

