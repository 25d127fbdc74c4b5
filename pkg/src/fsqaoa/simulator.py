"""Dense statevector simulation of the small gate set used by the engines.

Conventions (fixed; the tests pin them against dense-matrix oracles):

* Qubit 0 is the least significant bit of the amplitude index: bit i of
  basis index k is (k >> i) & 1.
* Single-qubit rotations carry the half-angle convention,
  RX(theta) = exp(-i theta X / 2), likewise RY and RZ.
* PauliRotation(P, theta) = exp(-i theta P), no half-angle. Hence
  PauliRotation(Z_i, theta) == RZ(2 theta) up to no phase at all: with
  RZ(phi) = exp(-i phi Z / 2) exactly, the two agree including global phase.
* States are numpy complex128 vectors of length 2**n, n <= 20.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .problem import IsingHamiltonian
from .rng import Xoshiro256StarStar

MAX_QUBITS = 20

_PAULI_LETTERS = ("X", "Y", "Z")


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, e.g. X on 0 and Y on 3.

    `terms` holds (qubit, letter) pairs sorted by qubit; qubits are distinct
    and letters are X/Y/Z. Identity (empty terms) is not representable on
    purpose: every use site wants a nontrivial operator.
    """

    terms: tuple[tuple[int, str], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a Pauli string needs at least one letter")
        qubits = [q for q, _ in self.terms]
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"duplicate qubit in Pauli string: {self.terms}")
        for q, letter in self.terms:
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
            if letter not in _PAULI_LETTERS:
                raise ValueError(f"unknown Pauli letter {letter!r}")
        object.__setattr__(self, "terms", tuple(sorted(self.terms)))

    @classmethod
    def of(cls, assignment: Mapping[int, str]) -> "PauliString":
        return cls(tuple(assignment.items()))

    @property
    def weight(self) -> int:
        return len(self.terms)

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.terms)

    def label(self) -> str:
        """Compact text form, qubit-ascending: X on 0, Y on 3 -> "X0Y3"."""
        return "".join(f"{letter}{q}" for q, letter in self.terms)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        terms = []
        i = 0
        while i < len(label):
            letter = label[i]
            i += 1
            start = i
            while i < len(label) and label[i].isdigit():
                i += 1
            if letter not in _PAULI_LETTERS or start == i:
                raise ValueError(f"malformed Pauli label {label!r}")
            terms.append((int(label[start:i]), letter))
        return cls(tuple(terms))


@dataclass(frozen=True)
class Gate:
    """One gate: kind, target qubits, and an angle or Pauli payload."""

    kind: str  # H | RX | RY | RZ | CNOT | SWAP | PAULIROT
    qubits: tuple[int, ...]
    angle: float | None = None
    pauli: PauliString | None = None

    _ARITY = {"H": 1, "RX": 1, "RY": 1, "RZ": 1, "CNOT": 2, "SWAP": 2}
    _NEEDS_ANGLE = {"RX", "RY", "RZ", "PAULIROT"}

    def __post_init__(self):
        if self.kind == "PAULIROT":
            if self.pauli is None:
                raise ValueError("PAULIROT needs a Pauli string")
            expected = self.pauli.qubits
            if tuple(self.qubits) != expected:
                raise ValueError(
                    f"PAULIROT qubits {self.qubits} do not match pauli {expected}"
                )
        else:
            if self.kind not in self._ARITY:
                raise ValueError(f"unknown gate kind {self.kind!r}")
            if len(self.qubits) != self._ARITY[self.kind]:
                raise ValueError(f"{self.kind} takes {self._ARITY[self.kind]} qubit(s)")
            if self.pauli is not None:
                raise ValueError(f"{self.kind} does not take a Pauli string")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.kind} gate: {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"negative qubit index in {self.qubits}")
        if (self.kind in self._NEEDS_ANGLE) != (self.angle is not None):
            raise ValueError(f"{self.kind} angle mismatch (angle={self.angle!r})")
        if self.angle is not None and not math.isfinite(self.angle):
            raise ValueError(f"non-finite angle {self.angle!r}")

    # Constructors keep call sites short and keep qubit tuples canonical.
    @classmethod
    def h(cls, q: int) -> "Gate":
        return cls("H", (q,))

    @classmethod
    def rx(cls, q: int, theta: float) -> "Gate":
        return cls("RX", (q,), angle=theta)

    @classmethod
    def ry(cls, q: int, theta: float) -> "Gate":
        return cls("RY", (q,), angle=theta)

    @classmethod
    def rz(cls, q: int, theta: float) -> "Gate":
        return cls("RZ", (q,), angle=theta)

    @classmethod
    def cnot(cls, control: int, target: int) -> "Gate":
        return cls("CNOT", (control, target))

    @classmethod
    def swap(cls, a: int, b: int) -> "Gate":
        return cls("SWAP", (a, b))

    @classmethod
    def pauli_rotation(cls, pauli: PauliString, theta: float) -> "Gate":
        return cls("PAULIROT", pauli.qubits, angle=theta, pauli=pauli)


@dataclass(frozen=True)
class Circuit:
    """Gate list on n qubits, applied left to right."""

    n: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        if not (1 <= self.n <= MAX_QUBITS):
            raise ValueError(f"circuit width must be in [1, {MAX_QUBITS}], got {self.n}")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.n:
                raise ValueError(f"gate {g.kind} on {g.qubits} exceeds width {self.n}")

    def __len__(self) -> int:
        return len(self.gates)


@dataclass
class StateVector:
    """n-qubit state; amplitudes[k] is the coefficient of basis index k."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not (1 <= self.n <= MAX_QUBITS):
            raise ValueError(f"state width must be in [1, {MAX_QUBITS}], got {self.n}")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n,):
            raise ValueError(f"amplitude vector must have length {1 << self.n}")
        self.amplitudes = amps

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amplitudes.copy())


def init_plus_state(n: int) -> StateVector:
    """|+>^n, the uniform superposition all engines start from."""
    if not (1 <= n <= MAX_QUBITS):
        raise ValueError(f"n must be in [1, {MAX_QUBITS}], got {n}")
    amps = np.full(1 << n, 2.0 ** (-n / 2.0), dtype=complex)
    return StateVector(n, amps)


def zero_state(n: int) -> StateVector:
    """|0...0>."""
    if not (1 <= n <= MAX_QUBITS):
        raise ValueError(f"n must be in [1, {MAX_QUBITS}], got {n}")
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = 1.0
    return StateVector(n, amps)


# -- gate application ---------------------------------------------------------

_SQ2 = 1.0 / math.sqrt(2.0)
_H_MATRIX = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)


def _rx_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz_matrix(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * theta), 0.0], [0.0, np.exp(0.5j * theta)]], dtype=complex
    )


def _apply_1q(amps: np.ndarray, n: int, u: np.ndarray, q: int) -> np.ndarray:
    # Tensor layout: axis (n-1-i) of the reshaped state is qubit i.
    t = amps.reshape((2,) * n)
    t = np.moveaxis(t, n - 1 - q, 0)
    out = np.tensordot(u, t, axes=(1, 0))
    return np.moveaxis(out, 0, n - 1 - q).reshape(-1)


def _apply_2q(amps: np.ndarray, n: int, u4: np.ndarray, qa: int, qb: int) -> np.ndarray:
    # u4 is indexed by (bit of qa)*2 + (bit of qb) on both sides.
    t = amps.reshape((2,) * n)
    t = np.moveaxis(t, (n - 1 - qa, n - 1 - qb), (0, 1))
    u = u4.reshape(2, 2, 2, 2)
    out = np.tensordot(u, t, axes=([2, 3], [0, 1]))
    return np.moveaxis(out, (0, 1), (n - 1 - qa, n - 1 - qb)).reshape(-1)


_CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
_SWAP_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def pauli_action(amps: np.ndarray, n: int, pauli: PauliString) -> np.ndarray:
    """P|psi> for a Pauli string, via index arithmetic (no matrices)."""
    if max(pauli.qubits) >= n:
        raise ValueError(f"Pauli {pauli.label()} exceeds width {n}")
    idx = np.arange(amps.size)
    out = amps
    for q, letter in pauli.terms:
        mask = 1 << q
        bit = (idx & mask) != 0
        if letter == "X":
            out = out[idx ^ mask]
        elif letter == "Y":
            # Y|0> = i|1>, Y|1> = -i|0>: the amplitude landing on bit=1 came
            # from bit=0 times +i, and vice versa with -i.
            out = out[idx ^ mask] * np.where(bit, 1j, -1j)
        else:  # Z
            out = np.where(bit, -out, out)
    return np.ascontiguousarray(out)


def apply_pauli_rotation(state: StateVector, pauli: PauliString, theta: float) -> StateVector:
    """exp(-i theta P)|psi> = cos(theta)|psi> - i sin(theta) P|psi>."""
    amps = state.amplitudes
    rotated = math.cos(theta) * amps - 1j * math.sin(theta) * pauli_action(
        amps, state.n, pauli
    )
    return StateVector(state.n, rotated)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply one gate; returns a new state, input untouched."""
    n = state.n
    if max(gate.qubits) >= n:
        raise ValueError(f"gate {gate.kind} on {gate.qubits} exceeds width {n}")
    amps = state.amplitudes
    kind = gate.kind
    if kind == "H":
        return StateVector(n, _apply_1q(amps, n, _H_MATRIX, gate.qubits[0]))
    if kind == "RX":
        return StateVector(n, _apply_1q(amps, n, _rx_matrix(gate.angle), gate.qubits[0]))
    if kind == "RY":
        return StateVector(n, _apply_1q(amps, n, _ry_matrix(gate.angle), gate.qubits[0]))
    if kind == "RZ":
        return StateVector(n, _apply_1q(amps, n, _rz_matrix(gate.angle), gate.qubits[0]))
    if kind == "CNOT":
        return StateVector(n, _apply_2q(amps, n, _CNOT_MATRIX, *gate.qubits))
    if kind == "SWAP":
        return StateVector(n, _apply_2q(amps, n, _SWAP_MATRIX, *gate.qubits))
    if kind == "PAULIROT":
        return apply_pauli_rotation(state, gate.pauli, gate.angle)
    raise ValueError(f"unknown gate kind {kind!r}")


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    if circuit.n != state.n:
        raise ValueError(f"circuit width {circuit.n} != state width {state.n}")
    for gate in circuit.gates:
        state = apply_gate(state, gate)
    return state


def run_circuit(circuit: Circuit, initial: StateVector | None = None) -> StateVector:
    """Run from |0...0> (or `initial`) through the whole circuit."""
    state = zero_state(circuit.n) if initial is None else initial.copy()
    return apply_circuit(state, circuit)


# -- cost measurement ---------------------------------------------------------

def expectation_of_cost(state: StateVector, h: IsingHamiltonian) -> float:
    """<psi|H|psi> for the diagonal cost Hamiltonian (exact, no sampling)."""
    if h.n != state.n:
        raise ValueError(f"Hamiltonian width {h.n} != state width {state.n}")
    probs = np.abs(state.amplitudes) ** 2
    return float(probs @ h.basis_energies())


def sample_shots(state: StateVector, shots: int, gen: Xoshiro256StarStar) -> dict[int, int]:
    """Measure all qubits `shots` times; histogram keyed by basis index.

    Sampling inverts the cumulative distribution at uniform draws from `gen`,
    one draw per shot, so the stream advances by exactly `shots` values.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = np.abs(state.amplitudes) ** 2
    total = probs.sum()
    if not math.isfinite(total) or abs(total - 1.0) > 1e-9:
        raise ValueError(f"state is not normalized (sum of probabilities {total})")
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0  # guard the top edge against rounding
    draws = np.array([gen.random() for _ in range(shots)])
    outcomes = np.searchsorted(cdf, draws, side="right")
    hist: dict[int, int] = {}
    for k in outcomes:
        k = int(k)
        hist[k] = hist.get(k, 0) + 1
    return hist


def estimate_cost_from_samples(hist: Mapping[int, int], h: IsingHamiltonian) -> float:
    """Sample-mean cost: sum_k count_k * E_k / total shots."""
    if not hist:
        raise ValueError("empty histogram")
    energies = h.basis_energies()
    total = 0
    acc = 0.0
    for k, c in hist.items():
        if not (0 <= k < energies.size):
            raise ValueError(f"histogram key {k} out of range for n={h.n}")
        if c < 0:
            raise ValueError(f"negative count for key {k}")
        acc += c * energies[k]
        total += c
    if total == 0:
        raise ValueError("histogram has zero total count")
    return acc / total


def bitstring_of_index(k: int, n: int) -> tuple[int, ...]:
    """Basis index -> bit tuple (x_0, ..., x_{n-1}), qubit 0 = LSB."""
    return tuple((k >> i) & 1 for i in range(n))


def index_of_bitstring(x: Sequence[int]) -> int:
    k = 0
    for i, b in enumerate(x):
        if b not in (0, 1):
            raise ValueError(f"bits must be 0/1, got {b!r}")
        k |= b << i
    return k
