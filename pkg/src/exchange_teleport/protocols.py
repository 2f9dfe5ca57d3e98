"""Measurement-driven gate protocols.

Registers use qubit 1 for the data spin and qubits 2, 3 for the ancilla
pair.  Global phases are never tracked: every success criterion compares
states with :func:`equal_up_to_global_phase`.

The R_z / R_x teleportation cycle is modelled as a lazily expanded outcome
tree (:class:`ProtocolNode`).  Sampling walks the tree with one uniform
variate per measurement (inverse CDF in outcome declaration order, the
same rule :func:`measure_sample` uses), and exact enumeration expands it
completely.  A root that is reused across trials therefore acts as a
cache of already visited branches without changing any sampled result.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, NamedTuple, Optional

import numpy as np

from .exchange import (
    ExchangeCouplings,
    cool_to_singlet,
    exchange_unitary,
    r_gate,
    x_subspace_pulse,
)
from .observables import (
    BELL_LABELS,
    BranchNode,
    MeasurementRecord,
    bell_basis,
    bell_states,
    choose_index,
    custom_basis,
    measure_branches,
    measure_sample,
    pauli_x,
    pauli_z,
    sx_sq,
    sz_sq,
    total_spin_sq,
)
from .qstate import (
    PAULIS,
    StateVector,
    apply_unitary,
    bell_phi_plus,
    check_unitary,
    extract_qubit,
    factor_out,
    ket,
    singlet,
    tensor,
)

# Phase constant r = exp(-i pi/4) appearing in the three-spin decomposition.
R_PHASE = cmath.exp(-1j * math.pi / 4)

MAX_TREE_CYCLES = 12
DEFAULT_COUPLINGS = ExchangeCouplings(1.0, 0.0)


class Applied(str, Enum):
    R = "R"
    R_DAGGER = "R_dagger"
    PENDING = "pending"


class CorrectionMode(str, Enum):
    REPEAT_FLIPPED = "repeat_flipped"
    ZZ_PULSE = "zz_pulse"


class ProtocolError(RuntimeError):
    pass


class TrialCapExceeded(ProtocolError):
    pass


@dataclass(frozen=True)
class LabelTable:
    """Which operation each terminal branch of a cycle leaves on the output qubit."""

    alice_s: Applied
    alice_t: Applied
    bob_s: Applied
    bob_t: Applied

    def __getitem__(self, kind: str) -> Applied:
        return getattr(self, kind)


# Seeded by |01> (or |+->), the default readout of the preparation step.
FIRST_CYCLE = LabelTable(Applied.R, Applied.R_DAGGER, Applied.R_DAGGER, Applied.R)
# Seeded by |10> (or |-+>): the extra relative sign swaps every label.
FIRST_CYCLE_FLIPPED = LabelTable(Applied.R_DAGGER, Applied.R, Applied.R, Applied.R_DAGGER)
# Erred data spin next to a fresh singlet: only Alice's two outcomes swap.
CORRECTION_CYCLE = LabelTable(Applied.R_DAGGER, Applied.R, Applied.R_DAGGER, Applied.R)

TERMINAL_KINDS = ("alice_s", "alice_t", "bob_s", "bob_t")
OUTPUT_QUBIT = {"alice_s": 3, "alice_t": 3, "bob_s": 1, "bob_t": 1}


@dataclass(frozen=True)
class DriverPolicy:
    max_cycles: int = 30
    correction_mode: CorrectionMode = CorrectionMode.REPEAT_FLIPPED
    axis: str = "z"
    couplings: ExchangeCouplings = DEFAULT_COUPLINGS

    def __post_init__(self):
        object.__setattr__(self, "correction_mode", CorrectionMode(self.correction_mode))
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be at least 1")
        if self.axis not in ("x", "z"):
            raise ValueError(f"axis must be 'x' or 'z', got {self.axis!r}")
        if self.correction_mode is CorrectionMode.ZZ_PULSE:
            if self.axis != "z":
                raise ValueError("the ZZ-pulse correction only fixes R_z errors")
            if not self.couplings.supports_pure_perp_pulse:
                raise ValueError(
                    f"ZZ-pulse correction needs an XY model or XXZ with tunable J_z, got {self.couplings.model.value}"
                )


@dataclass
class ProtocolTranscript:
    records: list[MeasurementRecord]
    annotations: list[str]
    final_state: StateVector
    output_qubit: int
    applied: Applied
    cycles: int = 1
    measurements: int = 0
    preparation: list[MeasurementRecord] = field(default_factory=list)
    terminals: list[str] = field(default_factory=list)
    axis: str = "z"

    def output_state(self) -> StateVector:
        return extract_qubit(self.final_state, self.output_qubit)

    @property
    def succeeded(self) -> bool:
        return self.applied is Applied.R

    def branch_key(self) -> str:
        return "|".join(f"c{k + 1}:{t}" for k, t in enumerate(self.terminals))

    def as_dict(self) -> dict[str, Any]:
        return {
            "records": [r.as_dict() for r in self.records],
            "preparation": [r.as_dict() for r in self.preparation],
            "annotations": list(self.annotations),
            "applied": self.applied.value,
            "output_qubit": self.output_qubit,
            "cycles": self.cycles,
            "measurements": self.measurements,
        }


# ---------------------------------------------------------------------------
# Cached observables and gates.


@lru_cache(maxsize=None)
def _spin_sq(i: int, j: int):
    return total_spin_sq(i, j)


@lru_cache(maxsize=None)
def _axis_sq(axis: str):
    return sz_sq(1, 2) if axis == "z" else sx_sq(1, 2)


@lru_cache(maxsize=None)
def _readout(axis: str):
    return pauli_z(2) if axis == "z" else pauli_x(2)


@lru_cache(maxsize=None)
def _bell():
    return bell_basis(1, 2)


def seed_pulse(axis: str, phi_z0: float) -> np.ndarray:
    """The entangling pulse applied right after the ancilla readout."""
    if axis == "z":
        return exchange_unitary(math.pi / 8, phi_z0)
    return x_subspace_pulse(phi_z0)


def _check_data(psi: StateVector) -> StateVector:
    if psi.n != 1:
        raise ValueError(f"data state must be a single qubit, got {psi.n}")
    return psi


def _check_axis(axis: str) -> str:
    if axis not in ("x", "z"):
        raise ValueError(f"axis must be 'x' or 'z', got {axis!r}")
    return axis


# ---------------------------------------------------------------------------
# dGB phase-qubit Z rotation.


@dataclass(frozen=True)
class DGBTranscript:
    record: MeasurementRecord
    corrected: bool
    correction_angle: Optional[float]


def dgb_correction_angle(phi: float) -> float:
    """ZZ-pulse angle that repairs the outcome-1 branch.

    With the ancilla in |1>, exp(-i a Z1 Z2) acts as exp(+i a Z1), so the
    erred exp(+i phi Z1/2) needs a = pi - phi, which leaves
    -exp(-i phi Z1/2)|psi>.
    """
    return math.pi - phi


def _dgb_entangled(psi: StateVector, phi: float) -> StateVector:
    state = tensor(_check_data(psi), ket("+"))
    return apply_unitary(state, [1, 2], exchange_unitary(0.0, phi / 2))


def _dgb_finish(record: MeasurementRecord, collapsed: StateVector, phi: float):
    if record.outcome == "0":
        out = collapsed
        transcript = DGBTranscript(record, False, None)
    else:
        angle = dgb_correction_angle(phi)
        out = apply_unitary(collapsed, [1, 2], exchange_unitary(0.0, angle))
        transcript = DGBTranscript(record, True, angle)
    return factor_out(out, [2], ket(record.outcome)), transcript


def dgb_z_rotation(psi: StateVector, phi: float, rng: np.random.Generator) -> tuple[StateVector, DGBTranscript]:
    """exp(-i phi Z/2)|psi> from a Josephson pulse, a Z readout and at most one fix-up pulse."""
    record, collapsed = measure_sample(_dgb_entangled(psi, phi), pauli_z(2), rng)
    return _dgb_finish(record, collapsed, phi)


def dgb_branches(psi: StateVector, phi: float) -> list[tuple[StateVector, DGBTranscript]]:
    """Both readout branches of the dGB rotation, with exact probabilities."""
    return [_dgb_finish(rec, st, phi) for rec, st in measure_branches(_dgb_entangled(psi, phi), pauli_z(2))]


# ---------------------------------------------------------------------------
# Fig. 1 style state and gate teleportation.


class TeleportResult(NamedTuple):
    state: StateVector
    record: MeasurementRecord


def _bell_correction(alpha: str) -> np.ndarray:
    return PAULIS[alpha]


def state_teleport(psi: StateVector, rng: np.random.Generator) -> TeleportResult:
    """Teleport qubit 1 onto qubit 3 through a Bell pair on qubits 2, 3."""
    state = tensor(_check_data(psi), bell_phi_plus())
    record, collapsed = measure_sample(state, _bell(), rng)
    return _teleport_finish(record, collapsed)


def _teleport_finish(record: MeasurementRecord, collapsed: StateVector) -> TeleportResult:
    corrected = apply_unitary(collapsed, [3], _bell_correction(record.outcome))
    return TeleportResult(factor_out(corrected, [1, 2], _ALPHA_STATES[record.outcome]), record)


def state_teleport_branches(psi: StateVector) -> list[TeleportResult]:
    state = tensor(_check_data(psi), bell_phi_plus())
    return [_teleport_finish(rec, st) for rec, st in measure_branches(state, _bell())]


def gate_resource_basis(u: np.ndarray) -> list[np.ndarray]:
    """|U_b> = (I (x) U sigma^b)|Phi+> for b in I, X, Y, Z."""
    phi = bell_phi_plus().amps
    return [np.kron(np.eye(2), u @ PAULIS[b]) @ phi for b in BELL_LABELS]


def gate_correction(u: np.ndarray, alpha: str, beta: str) -> np.ndarray:
    """M_ab = U sigma^b sigma^a U^dagger, snapped back onto the unitaries.

    Corrections are composed recursively, and any scale error would square
    at every level, so the nearest unitary (polar factor) is returned.
    """
    m = u @ PAULIS[beta] @ PAULIS[alpha] @ u.conj().T
    left, _, right = np.linalg.svd(m)
    return left @ right


class GateTeleportResult(NamedTuple):
    state: StateVector
    trials: int
    outcomes: list[tuple[str, str]]


@lru_cache(maxsize=4096)
def _resource_observable(key: bytes):
    g = np.frombuffer(key, dtype=complex).reshape(2, 2)
    return custom_basis([1, 2], gate_resource_basis(g), BELL_LABELS, label="U_b")


_ALPHA_STATES = {a: StateVector._trusted(v) for a, v in zip(BELL_LABELS, bell_states())}


def _resource_key(g: np.ndarray) -> bytes:
    # Corrections revisit the same gates up to phase and roundoff; fix the
    # phase and round so the cache actually hits.
    g = np.asarray(g, dtype=complex)
    flat = g.reshape(-1)
    k = int(np.argmax(np.abs(flat) > 1e-6))
    g = g * (abs(flat[k]) / flat[k])
    g = np.round(g, 12) + 0.0
    return np.ascontiguousarray(g).tobytes()


def gate_teleport_trial(phi: StateVector, g: np.ndarray, rng: np.random.Generator):
    """One teleportation attempt of ``g``; returns (alpha, beta, state on qubit 3)."""
    resource_obs = _resource_observable(_resource_key(g))
    rec_b, resource = measure_sample(ket("00"), resource_obs, rng)
    state = tensor(phi, resource)
    rec_a, collapsed = measure_sample(state, _bell(), rng)
    return rec_a.outcome, rec_b.outcome, factor_out(collapsed, [1, 2], _ALPHA_STATES[rec_a.outcome])


def gate_teleport_trial_tree(phi: StateVector, g: np.ndarray) -> BranchNode:
    """Exact outcome tree of one attempt: resource readout beta, then Bell outcome alpha.

    Leaves are tagged with ``alpha``, ``beta`` and ``success`` (alpha == beta).
    """
    root = BranchNode(tensor(_check_data(phi), ket("00")), 1.0)
    resource_obs = _resource_observable(_resource_key(g))
    for rec_b, resource in measure_branches(ket("00"), resource_obs):
        mid = BranchNode(tensor(phi, resource), rec_b.probability, rec_b)
        root.children.append(mid)
        for rec_a, collapsed in measure_branches(mid.state, _bell()):
            leaf = BranchNode(collapsed, mid.probability * rec_a.probability, rec_a)
            leaf.tag.update(alpha=rec_a.outcome, beta=rec_b.outcome, success=rec_a.outcome == rec_b.outcome)
            mid.children.append(leaf)
    return root


def gate_teleport_fig1(psi: StateVector, u: np.ndarray, rng: np.random.Generator,
                       max_trials: int = 100) -> GateTeleportResult:
    """Apply ``u`` by gate teleportation, re-teleporting the correction until alpha == beta."""
    u = check_unitary(u)
    if u.shape != (2, 2):
        raise ValueError("gate teleportation here handles single-qubit gates only")
    state = _check_data(psi)
    g = u
    outcomes = []
    for trial in range(1, max_trials + 1):
        alpha, beta, state = gate_teleport_trial(state, g, rng)
        outcomes.append((alpha, beta))
        if alpha == beta:
            return GateTeleportResult(state, trial, outcomes)
        g = gate_correction(g, alpha, beta)
    raise TrialCapExceeded(f"gate teleportation did not succeed in {max_trials} trials")


# ---------------------------------------------------------------------------
# R_z / R_x teleportation cycles.


def prepare_entangled_ancilla(axis: str, phi_z0: float, rng: Optional[np.random.Generator] = None,
                              couplings: ExchangeCouplings = DEFAULT_COUPLINGS,
                              outcome: Optional[str] = None) -> tuple[MeasurementRecord, StateVector]:
    """Cool the pair to |S>, read out one spin, then entangle with a pulse.

    Either ``rng`` samples the readout or ``outcome`` forces it ("0"/"1" for
    z, "+"/"-" for x).
    """
    _check_axis(axis)
    pair = cool_to_singlet(couplings)
    branches = measure_branches(pair, _readout(axis).on(1))
    if outcome is None:
        if rng is None:
            raise ValueError("need an rng or an explicit outcome")
        k = choose_index([rec.probability for rec, _ in branches], rng.random())
    else:
        labels = [rec.outcome for rec, _ in branches]
        if outcome not in labels:
            raise ValueError(f"readout outcome must be one of {labels}")
        k = labels.index(outcome)
    record, seeded = branches[k]
    return record, apply_unitary(seeded, [1, 2], seed_pulse(axis, phi_z0))


@dataclass
class ProtocolNode(BranchNode):
    """Lazily expanded node of the R-gate teleportation tree."""

    stage: str = "alice_s2"
    cycle: int = 1
    table: LabelTable = FIRST_CYCLE
    measurements: int = 0
    annotation: Optional[str] = None
    parent: Optional["ProtocolNode"] = field(default=None, repr=False)
    expanded: bool = False
    output: Optional[StateVector] = field(default=None, repr=False)

    @property
    def conditional(self) -> float:
        return 1.0 if self.record is None else self.record.probability


@dataclass(frozen=True)
class _TreeConfig:
    axis: str
    phi_z0: float
    max_cycles: int
    correction_mode: CorrectionMode
    couplings: ExchangeCouplings


class ProtocolTree:
    """Root plus expansion rules for one (input state, policy) pair."""

    def __init__(self, psi: StateVector, axis: str = "z", phi_z0: float = 0.0, max_cycles: int = 1,
                 correction_mode: CorrectionMode = CorrectionMode.REPEAT_FLIPPED,
                 couplings: ExchangeCouplings = DEFAULT_COUPLINGS, preparation: str = "sample",
                 first_table: Optional[LabelTable] = None):
        _check_axis(axis)
        self.psi = _check_data(psi)
        self.cfg = _TreeConfig(axis, phi_z0, max_cycles, CorrectionMode(correction_mode), couplings)
        if preparation == "sample":
            pair = cool_to_singlet(couplings)
            self.root = ProtocolNode(tensor(psi, pair), 1.0, stage="prepare")
        elif preparation == "none":
            # Correction-style cycle: the data spin sits next to a plain singlet.
            self.root = ProtocolNode(tensor(psi, singlet()), 1.0, stage="alice_s2",
                                     table=first_table or CORRECTION_CYCLE)
        else:
            record, pair = prepare_entangled_ancilla(axis, phi_z0, couplings=couplings, outcome=preparation)
            table = FIRST_CYCLE if preparation in ("0", "+") else FIRST_CYCLE_FLIPPED
            self.root = ProtocolNode(tensor(psi, pair), 1.0, stage="alice_s2", table=table)
            self.root.tag["preparation"] = record

    # -- expansion --------------------------------------------------------

    def _child(self, parent: ProtocolNode, record, state, **kw) -> ProtocolNode:
        prob = parent.probability * (1.0 if record is None else record.probability)
        base = dict(stage=parent.stage, cycle=parent.cycle, table=parent.table,
                    measurements=parent.measurements)
        base.update(kw)
        return ProtocolNode(state, prob, record, parent=parent, **base)

    def children(self, node: ProtocolNode) -> list[ProtocolNode]:
        if node.expanded:
            return node.children
        cfg = self.cfg
        stage = node.stage
        kids: list[ProtocolNode] = []
        if stage == "prepare":
            obs = _readout(cfg.axis).on(2)
            for rec, st in measure_branches(node.state, obs):
                table = FIRST_CYCLE if rec.outcome in ("0", "+") else FIRST_CYCLE_FLIPPED
                st = apply_unitary(st, [2, 3], seed_pulse(cfg.axis, cfg.phi_z0))
                kids.append(self._child(node, rec, st, stage="alice_s2", table=table,
                                        annotation=f"seed pulse on (2,3) after readout {rec.outcome}"))
                kids[-1].tag["readout"] = True
        elif stage == "alice_s2":
            for rec, st in measure_branches(node.state, _spin_sq(1, 2)):
                nxt = "term:alice_s" if rec.outcome == "S=0" else "alice_sb2"
                kids.append(self._child(node, rec, st, stage=nxt, measurements=node.measurements + 1))
        elif stage == "alice_sb2":
            for rec, st in measure_branches(node.state, _axis_sq(cfg.axis)):
                nxt = "term:alice_t" if rec.outcome == "0" else "bob_s2"
                kids.append(self._child(node, rec, st, stage=nxt, measurements=node.measurements + 1))
        elif stage == "bob_s2":
            for rec, st in measure_branches(node.state, _spin_sq(2, 3)):
                nxt = "term:bob_s" if rec.outcome == "S=0" else "term:bob_t"
                kids.append(self._child(node, rec, st, stage=nxt, measurements=node.measurements + 1))
        elif stage.startswith("term:"):
            kind = stage[5:]
            applied = node.table[kind]
            out_q = OUTPUT_QUBIT[kind]
            node.tag.setdefault("kind", kind)
            node.tag.setdefault("applied", applied)
            node.tag.setdefault("output_qubit", out_q)
            if applied is Applied.R_DAGGER:
                if cfg.correction_mode is CorrectionMode.ZZ_PULSE:
                    fixed = apply_unitary(node.state, [out_q, 2], exchange_unitary(math.pi / 2, 0.0))
                    kids.append(self._child(node, None, fixed, stage="done", annotation=f"ZZ pulse U_{out_q}2(pi/2,0)"))
                    kids[-1].tag.update(kind=kind, applied=Applied.R, output_qubit=out_q, zz_corrected=True)
                elif node.cycle < cfg.max_cycles:
                    data = extract_qubit(node.state, out_q)
                    fresh = tensor(data, cool_to_singlet(cfg.couplings))
                    kids.append(self._child(node, None, fresh, stage="alice_s2", cycle=node.cycle + 1,
                                            table=CORRECTION_CYCLE,
                                            annotation="move erred spin next to a fresh singlet"))
        elif stage == "done":
            pass
        else:
            raise AssertionError(f"unknown stage {stage!r}")
        node.children = kids
        node.expanded = True
        return kids

    def expand_all(self) -> ProtocolNode:
        stack = [self.root]
        while stack:
            node = stack.pop()
            stack.extend(self.children(node))
        return self.root

    # -- sampling ---------------------------------------------------------

    def sample_leaf(self, rng: np.random.Generator) -> ProtocolNode:
        node = self.root
        while True:
            kids = self.children(node)
            if not kids:
                return node
            if len(kids) == 1:
                node = kids[0]
            else:
                node = kids[choose_index([k.conditional for k in kids], rng.random())]

    def sample(self, rng: np.random.Generator) -> ProtocolTranscript:
        return transcript_from_leaf(self.sample_leaf(rng), self.cfg.axis)


def _path(node: ProtocolNode) -> list[ProtocolNode]:
    path = []
    while node is not None:
        path.append(node)
        node = node.parent
    return path[::-1]


def leaf_output(leaf: ProtocolNode) -> StateVector:
    """Output-qubit state of a leaf, cached on the node."""
    if leaf.output is None:
        leaf.output = extract_qubit(leaf.state, leaf.tag.get("output_qubit", 0))
    return leaf.output


def transcript_from_leaf(leaf: ProtocolNode, axis: str) -> ProtocolTranscript:
    path = _path(leaf)
    records, prep, notes, terminals = [], [], [], []
    for node in path:
        if "preparation" in node.tag:
            prep.append(node.tag["preparation"])
        if node.record is not None:
            (prep if node.tag.get("readout") else records).append(node.record)
        if node.annotation:
            notes.append(node.annotation)
        if node.stage.startswith("term:"):
            terminals.append(node.stage[5:])
    applied = leaf.tag.get("applied", Applied.PENDING)
    return ProtocolTranscript(
        records=records,
        annotations=notes,
        final_state=leaf.state,
        output_qubit=leaf.tag.get("output_qubit", 0),
        applied=applied,
        cycles=leaf.cycle,
        measurements=leaf.measurements,
        preparation=prep,
        terminals=terminals,
        axis=axis,
    )


def teleport_cycle(psi: StateVector, axis: str, phi_z0: float, rng: np.random.Generator,
                   couplings: ExchangeCouplings = DEFAULT_COUPLINGS) -> ProtocolTranscript:
    """One pass through the decision tree: R or R-dagger lands on qubit 1 or 3."""
    tree = ProtocolTree(psi, axis, phi_z0, max_cycles=1, couplings=couplings)
    return tree.sample(rng)


def correction_cycle(erred: ProtocolTranscript, axis: str, rng: np.random.Generator,
                     couplings: ExchangeCouplings = DEFAULT_COUPLINGS) -> ProtocolTranscript:
    """Re-run the measurements on an erred result with Alice's outcomes swapped.

    The erred spin is placed on qubit 1 next to a freshly cooled singlet.
    The returned transcript continues the cycle and measurement counts.
    """
    if erred.applied is not Applied.R_DAGGER:
        raise ValueError("correction_cycle expects a transcript that applied R_dagger")
    data = erred.output_state()
    tree = ProtocolTree(data, axis, max_cycles=1, couplings=couplings, preparation="none",
                        first_table=CORRECTION_CYCLE)
    t = tree.sample(rng)
    return ProtocolTranscript(
        records=erred.records + t.records,
        annotations=erred.annotations + ["move erred spin next to a fresh singlet"] + t.annotations,
        final_state=t.final_state,
        output_qubit=t.output_qubit,
        applied=t.applied,
        cycles=erred.cycles + 1,
        measurements=erred.measurements + t.measurements,
        preparation=list(erred.preparation),
        terminals=erred.terminals + t.terminals,
        axis=axis,
    )


def zz_correction(erred: StateVector, j: int, couplings: ExchangeCouplings = DEFAULT_COUPLINGS) -> StateVector:
    """Apply Z_j Z_2 = U_j2(pi/2, 0), turning R_z-dagger on qubit j into R_z."""
    if not couplings.supports_pure_perp_pulse:
        raise ValueError(
            f"a pure J_perp pulse is unavailable for the {couplings.model.value} model without tunable J_z"
        )
    if j == 2:
        raise ValueError("qubit 2 is the ancilla partner of the correction pulse")
    return apply_unitary(erred, [j, 2], exchange_unitary(math.pi / 2, 0.0))


class RotationResult(NamedTuple):
    state: StateVector
    cycles: int
    measurements: int
    success: bool
    transcript: ProtocolTranscript


def teleport_rotation(psi: StateVector, axis: str, policy: DriverPolicy, rng: np.random.Generator,
                      phi_z0: float = 0.0, tree: Optional[ProtocolTree] = None) -> RotationResult:
    """Drive cycles until R is applied or ``policy.max_cycles`` is used up.

    Passing a ``tree`` built for the same (psi, policy) reuses its cached
    branches; results are identical either way.
    """
    if axis != policy.axis:
        raise ValueError("axis and policy.axis disagree")
    if tree is None:
        tree = ProtocolTree(psi, axis, phi_z0, policy.max_cycles, policy.correction_mode, policy.couplings)
    leaf = tree.sample_leaf(rng)
    t = transcript_from_leaf(leaf, axis)
    return RotationResult(leaf_output(leaf), t.cycles, t.measurements, t.succeeded, t)


# ---------------------------------------------------------------------------
# Exact enumeration.


@dataclass(frozen=True)
class TreeSummary:
    success_mass: float
    erred_mass: float
    expected_cycles: float
    expected_measurements: float
    measurements_per_cycle: float
    leaf_count: int
    total_mass: float


def enumerate_protocol_tree(axis: str, phi_z0: float, cycles: int, psi: StateVector,
                            preparation: str = "0", correction_mode: CorrectionMode = CorrectionMode.REPEAT_FLIPPED,
                            couplings: ExchangeCouplings = DEFAULT_COUPLINGS) -> ProtocolNode:
    """Fully expanded outcome tree for up to ``cycles`` measurement cycles.

    ``preparation`` fixes the ancilla readout ("0"/"1" for z, "+"/"-" for x;
    "0" is mapped to "+" on the x axis) or, with "branch", includes it as
    the first level of the tree.
    """
    if not 1 <= cycles <= MAX_TREE_CYCLES:
        raise ValueError(f"cycles must be in 1..{MAX_TREE_CYCLES}, got {cycles}")
    if axis == "x":
        preparation = {"0": "+", "1": "-"}.get(preparation, preparation)
    prep = "sample" if preparation == "branch" else preparation
    tree = ProtocolTree(psi, axis, phi_z0, cycles, correction_mode, couplings, preparation=prep)
    return tree.expand_all()


def summarize_tree(root: BranchNode) -> TreeSummary:
    success = erred = cyc = meas = total = 0.0
    count = 0
    for leaf in root.leaves():
        p = leaf.probability
        count += 1
        total += p
        if leaf.tag.get("applied") is Applied.R:
            success += p
        else:
            erred += p
        cyc += p * leaf.cycle
        meas += p * leaf.measurements
    return TreeSummary(success, erred, cyc, meas, meas / cyc, count, total)


def leaf_branch_key(leaf: ProtocolNode) -> str:
    return "|".join(f"c{k + 1}:{n.stage[5:]}" for k, n in enumerate(
        n for n in _path(leaf) if n.stage.startswith("term:")))


def leaf_target(psi: StateVector, leaf: ProtocolNode, axis: str) -> StateVector:
    """R|psi> or R-dagger|psi>, whichever the leaf claims to hold."""
    dagger = leaf.tag["applied"] is Applied.R_DAGGER
    return StateVector(r_gate(axis, dagger) @ psi.amps)
