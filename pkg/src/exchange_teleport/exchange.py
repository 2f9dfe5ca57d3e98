"""Axially symmetric exchange coupling between two spins.

The two-spin Hamiltonian is ``J_perp (XX + YY) + J_z ZZ``.  All three terms
commute, so a pulse is fully described by the integrated angles
``phi_perp = \\int J_perp dt`` and ``phi_z = \\int J_z dt``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .qstate import I2, X, Y, Z, PAULIS, StateVector, ket, singlet, triplet0

XX = np.kron(X, X)
YY = np.kron(Y, Y)
ZZ = np.kron(Z, Z)


class ExchangeModel(str, Enum):
    XY = "XY"
    XXZ = "XXZ"
    HEISENBERG = "Heisenberg"


class NonSingletGroundStateError(ValueError):
    """Cooling would not land in the singlet: J_perp <= 0 or J_perp <= -J_z."""


@dataclass(frozen=True)
class ExchangeCouplings:
    j_perp: float
    j_z: float = 0.0
    model: ExchangeModel | None = None
    tunable_jz: bool = False

    def __post_init__(self):
        model = self.model
        if model is None:
            if self.j_z == 0:
                model = ExchangeModel.XY
            elif self.j_z == self.j_perp:
                model = ExchangeModel.HEISENBERG
            else:
                model = ExchangeModel.XXZ
        model = ExchangeModel(model)
        if model is ExchangeModel.XY and self.j_z != 0:
            raise ValueError(f"XY model requires j_z = 0, got {self.j_z}")
        if model is ExchangeModel.HEISENBERG and self.j_z != self.j_perp:
            raise ValueError("Heisenberg model requires j_z = j_perp")
        object.__setattr__(self, "model", model)

    def hamiltonian(self) -> np.ndarray:
        return self.j_perp * (XX + YY) + self.j_z * ZZ

    @property
    def supports_pure_perp_pulse(self) -> bool:
        """Whether a pulse with phi_z = 0 and phi_perp != 0 can be produced."""
        if self.model is ExchangeModel.XY:
            return True
        return self.model is ExchangeModel.XXZ and self.tunable_jz


@dataclass(frozen=True)
class ExchangePulse:
    i: int
    j: int
    phi_perp: float
    phi_z: float = 0.0

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("an exchange pulse needs two distinct qubits")

    @property
    def qubits(self) -> tuple[int, int]:
        return (self.i, self.j)

    def unitary(self) -> np.ndarray:
        return exchange_unitary(self.phi_perp, self.phi_z)


@dataclass(frozen=True)
class DGBParameters:
    """Grain-boundary phase qubits with the local bias switched off.

    ``josephson`` maps qubit pairs ``(i, j)`` to couplings J_ij.
    """

    delta: Sequence[float]
    josephson: Mapping[tuple[int, int], float] = field(default_factory=dict)
    bias: Sequence[float] | None = None

    def __post_init__(self):
        n = len(self.delta)
        bias = tuple(self.bias) if self.bias is not None else (0.0,) * n
        if len(bias) != n:
            raise ValueError("bias must list one value per qubit")
        if any(b != 0 for b in bias):
            raise ValueError("local bias is not available; all bias values must be 0")
        for (i, j) in self.josephson:
            if i == j or not (1 <= i <= n and 1 <= j <= n):
                raise ValueError(f"bad Josephson pair {(i, j)}")
        object.__setattr__(self, "bias", bias)

    @property
    def n(self) -> int:
        return len(self.delta)

    def hamiltonian(self) -> np.ndarray:
        """Tunneling plus Josephson terms on the full 2**n space."""
        from .qstate import full_operator

        n = self.n
        h = np.zeros((1 << n, 1 << n), dtype=complex)
        for q, d in enumerate(self.delta, start=1):
            h += d * full_operator(n, [q], X)
        for (i, j), coupling in self.josephson.items():
            h += coupling * full_operator(n, [i, j], ZZ)
        return h


def exchange_unitary(phi_perp: float, phi_z: float = 0.0) -> np.ndarray:
    """exp(-i [phi_perp (XX + YY) + phi_z ZZ]) written out in closed form."""
    ez = cmath.exp(-1j * phi_z)
    c = cmath.exp(1j * phi_z) * math.cos(2 * phi_perp)
    s = -1j * cmath.exp(1j * phi_z) * math.sin(2 * phi_perp)
    return np.array(
        [
            [ez, 0, 0, 0],
            [0, c, s, 0],
            [0, s, c, 0],
            [0, 0, 0, ez],
        ],
        dtype=complex,
    )


def josephson_gate(phi: float) -> np.ndarray:
    """exp(-i phi Z1 Z2 / 2), the pure ZZ pulse U(0, phi/2)."""
    return exchange_unitary(0.0, phi / 2)


def exchange_eigensystem(c: ExchangeCouplings) -> list[tuple[float, StateVector]]:
    """Eigenpairs of the two-spin exchange Hamiltonian, ascending.

    Ties keep the order |S>, |T0>, |00>, |11>.
    """
    pairs = [
        (-2 * c.j_perp - c.j_z, singlet()),
        (2 * c.j_perp - c.j_z, triplet0()),
        (c.j_z, ket("00")),
        (c.j_z, ket("11")),
    ]
    order = sorted(range(4), key=lambda k: (pairs[k][0], k))
    return [pairs[k] for k in order]


def cool_to_singlet(c: ExchangeCouplings) -> StateVector:
    """Ideal cooling of the pair into its ground state, which must be |S>."""
    if not (c.j_perp > 0 and c.j_perp > -c.j_z):
        raise NonSingletGroundStateError(
            f"ground state is not the singlet for j_perp={c.j_perp}, j_z={c.j_z}"
        )
    return singlet()


def x_subspace_pulse(phi_z0: float) -> np.ndarray:
    """Pulse U(pi/4 - phi_z0, phi_z0): swaps |+-> into (|+-> - i|-+>)/sqrt 2 up to phase.

    On span{|+->, |-+>} the Hamiltonian is -J_perp + (J_perp + J_z) Xtilde, so
    only the sum phi_perp + phi_z = pi/4 matters there.
    """
    return exchange_unitary(math.pi / 4 - phi_z0, phi_z0)


def r_gate(axis: str, dagger: bool = False) -> np.ndarray:
    """exp(+-i pi/4 sigma^axis) for axis in {"x", "z"}."""
    if axis not in ("x", "z"):
        raise ValueError(f"R gates exist for axes x and z, got {axis!r}")
    sign = -1.0 if dagger else 1.0
    theta = sign * math.pi / 4
    return math.cos(theta) * I2 + 1j * math.sin(theta) * PAULIS[axis]


def rotation(axis: str, phi: float) -> np.ndarray:
    """exp(-i phi sigma^axis)."""
    return math.cos(phi) * I2 - 1j * math.sin(phi) * PAULIS[axis]
