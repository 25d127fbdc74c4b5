"""Iterative layer-by-layer QAOA on the feature-selection Hamiltonian.

Protocol: start from |+>^n; grow the circuit one layer at a time. Layer k
applies exp(-i gamma_k H_C) then exp(-i beta_k M_k) for a mixer M_k chosen
by the engine (always sum_i X_i for the standard engine; gradient-selected
for the adaptive one). After appending a layer, all 2k angles are
re-optimized with Powell, warm-started from the previous optimum plus a
fresh random (gamma_k, beta_k) with gamma ~ U[0, 2pi), beta ~ U[0, pi).

Parameter vectors are ordered (gamma_1, beta_1, ..., gamma_k, beta_k).

Cost evaluation is either the exact expectation <psi|H_C|psi> ("exact" mode)
or a sample mean over a fresh batch of measurement shots ("shots" mode).
The offset term of H_C enters classically through the basis energies; no
gate ever implements it.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .exact import brute_force_min
from .optimizer import OptimizerConfig, powell_minimize
from .problem import FeatureSelectionInstance, IsingHamiltonian, to_ising
from .rng import STREAM_INIT, STREAM_SHOTS, Xoshiro256StarStar, spawn
from .simulator import (
    Circuit,
    Gate,
    PauliString,
    StateVector,
    estimate_cost_from_samples,
    init_plus_state,
    sample_shots,
)

RATIO_FLOOR = 1e-12  # |C_exact| below this makes the ratio meaningless


@dataclass(frozen=True)
class MixerOperator:
    """A QAOA mixer: the global transverse fields or one Pauli string.

    kind is "global_x" (sum_i X_i), "global_y" (sum_i Y_i) or "pauli"
    (a single weight-1 or weight-2 Pauli string).
    """

    kind: str
    pauli: PauliString | None = None

    def __post_init__(self):
        if self.kind in ("global_x", "global_y"):
            if self.pauli is not None:
                raise ValueError(f"{self.kind} mixer takes no Pauli string")
        elif self.kind == "pauli":
            if self.pauli is None:
                raise ValueError("pauli mixer needs a Pauli string")
            if self.pauli.weight not in (1, 2):
                raise ValueError("pauli mixers are weight 1 or 2")
        else:
            raise ValueError(f"unknown mixer kind {self.kind!r}")

    @classmethod
    def global_x(cls) -> "MixerOperator":
        return cls("global_x")

    @classmethod
    def global_y(cls) -> "MixerOperator":
        return cls("global_y")

    @classmethod
    def single(cls, q: int, letter: str) -> "MixerOperator":
        return cls("pauli", PauliString.of({q: letter}))

    @classmethod
    def two(cls, i: int, letter_i: str, j: int, letter_j: str) -> "MixerOperator":
        if i == j:
            raise ValueError("two-qubit mixer needs distinct qubits")
        return cls("pauli", PauliString.of({i: letter_i, j: letter_j}))

    def label(self) -> str:
        """"GlobalX", "GlobalY", or the Pauli label like "X0Y3"."""
        if self.kind == "global_x":
            return "GlobalX"
        if self.kind == "global_y":
            return "GlobalY"
        return self.pauli.label()

    @classmethod
    def from_label(cls, label: str) -> "MixerOperator":
        if label == "GlobalX":
            return cls.global_x()
        if label == "GlobalY":
            return cls.global_y()
        return cls("pauli", PauliString.from_label(label))


@dataclass(frozen=True)
class QaoaLayer:
    """One applied layer: its mixer and the (current) optimized angles."""

    gamma: float
    beta: float
    mixer: MixerOperator


@dataclass(frozen=True)
class RunConfig:
    """Engine-level knobs shared by the standard and adaptive runners."""

    mode: str = "exact"  # "exact" | "shots"
    shots: int = 10_000
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    gamma0: float = 0.01  # probe angle used by adaptive mixer selection

    def __post_init__(self):
        if self.mode not in ("exact", "shots"):
            raise ValueError(f"mode must be 'exact' or 'shots', got {self.mode!r}")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if not (math.isfinite(self.gamma0) and self.gamma0 > 0):
            raise ValueError("gamma0 must be a positive finite angle")


@dataclass(frozen=True)
class LayerRecord:
    """Per-layer outcome after re-optimizing the whole parameter vector."""

    layer: int
    mixer: str
    gamma: float
    beta: float
    parameters: tuple[float, ...]
    cost: float
    ratio: float
    seconds: float
    selection_seconds: float
    evaluations: int
    converged: bool


@dataclass(frozen=True)
class QaoaRunRecord:
    """Everything one engine run produced, JSON- and CSV-serializable."""

    n: int
    alpha: float
    instance_seed: int
    run_seed: int
    algorithm: str  # "standard" | "adapt"
    mode: str
    shots: int
    c_exact: float
    c0: float
    layers: tuple[LayerRecord, ...]
    final_circuit: Circuit

    @property
    def total_layers(self) -> int:
        return len(self.layers)

    def ratios(self) -> list[float]:
        return [rec.ratio for rec in self.layers]


def approximation_ratio(cost: float, c_exact: float) -> float:
    """r = C / C_exact; both are negative for solvable instances, so r <= 1
    with equality at the optimum. Undefined when C_exact is (numerically) 0."""
    if abs(c_exact) < RATIO_FLOOR:
        raise ValueError("approximation ratio undefined: exact optimum is zero")
    return cost / c_exact


# -- circuit construction ------------------------------------------------------

def coupling_schedule(n: int) -> list[tuple[int, int]]:
    """All qubit pairs (i, j), i < j, grouped into rounds of disjoint pairs.

    Uses the circle method for round-robin tournaments: one qubit stays
    fixed while the rest rotate, giving n-1 rounds for even n (n rounds
    with a bye for odd n) that each touch every qubit at most once. ZZ
    terms all commute, so emitting them round by round preserves the
    unitary while letting rotations within a round share depth slots.
    """
    seats: list[int | None] = list(range(n))
    if n % 2 == 1:
        seats.append(None)
    m = len(seats)
    pairs: list[tuple[int, int]] = []
    for _ in range(max(m - 1, 0)):
        rnd = []
        for i in range(m // 2):
            a, b = seats[i], seats[m - 1 - i]
            if a is not None and b is not None:
                rnd.append((min(a, b), max(a, b)))
        pairs.extend(sorted(rnd))
        seats = [seats[0], seats[-1], *seats[1:-1]]
    return pairs


def build_cost_circuit(h: IsingHamiltonian, gamma: float, native: bool = False) -> Circuit:
    """Circuit for exp(-i gamma (H_C - offset)).

    Default form uses Pauli rotations: Z_i by angle gamma*h_i and Z_i Z_j by
    gamma*J_ij. The native form lowers these to RZ(2 gamma h_i) and
    CNOT - RZ(2 gamma J_ij) - CNOT, which agree exactly (global phase
    included) because RZ(phi) = exp(-i phi Z / 2) with no extra phase.
    Zero coefficients emit no gate. The offset is always handled classically.
    """
    gates: list[Gate] = []
    for i, hi in enumerate(h.linear):
        if hi == 0.0:
            continue
        if native:
            gates.append(Gate.rz(i, 2.0 * gamma * hi))
        else:
            gates.append(Gate.pauli_rotation(PauliString.of({i: "Z"}), gamma * hi))
    for (i, j) in coupling_schedule(h.n):
        if (i, j) not in h.couplings:
            continue
        v = h.couplings[(i, j)]
        if v == 0.0:
            continue
        if native:
            gates.append(Gate.cnot(i, j))
            gates.append(Gate.rz(j, 2.0 * gamma * v))
            gates.append(Gate.cnot(i, j))
        else:
            gates.append(Gate.pauli_rotation(PauliString.of({i: "Z", j: "Z"}), gamma * v))
    return Circuit(h.n, tuple(gates))


def build_mixer_circuit(mixer: MixerOperator, beta: float, n: int) -> Circuit:
    """Circuit for exp(-i beta M). Global mixers factor per qubit into
    RX(2 beta) / RY(2 beta); Pauli mixers are one rotation gate."""
    if mixer.kind == "global_x":
        gates = tuple(Gate.rx(q, 2.0 * beta) for q in range(n))
    elif mixer.kind == "global_y":
        gates = tuple(Gate.ry(q, 2.0 * beta) for q in range(n))
    else:
        if max(mixer.pauli.qubits) >= n:
            raise ValueError(f"mixer {mixer.label()} exceeds width {n}")
        gates = (Gate.pauli_rotation(mixer.pauli, beta),)
    return Circuit(n, gates)


def assemble_circuit(
    h: IsingHamiltonian,
    mixers: Sequence[MixerOperator],
    parameters: Sequence[float],
    native: bool = False,
) -> Circuit:
    """Full run circuit: Hadamard wall, then alternating cost/mixer blocks."""
    if len(parameters) != 2 * len(mixers):
        raise ValueError("need exactly (gamma, beta) per mixer")
    gates: list[Gate] = [Gate.h(q) for q in range(h.n)]
    for k, mixer in enumerate(mixers):
        gamma, beta = parameters[2 * k], parameters[2 * k + 1]
        gates.extend(build_cost_circuit(h, gamma, native=native).gates)
        gates.extend(build_mixer_circuit(mixer, beta, h.n).gates)
    return Circuit(h.n, tuple(gates))


# -- fast dedicated propagation ------------------------------------------------

class Propagator:
    """Applies QAOA layers to raw amplitude vectors without building gates.

    The cost block is a diagonal phase exp(-i gamma E_k) on the basis
    energies; mixers act via cached flip/bit index tables. Agreement with
    the explicit gate path is a tested invariant of the engine.
    """

    def __init__(self, h: IsingHamiltonian):
        self.h = h
        self.n = h.n
        self.energies = h.basis_energies()
        self._flip: dict[int, np.ndarray] = {}
        self._bit: dict[int, np.ndarray] = {}

    def _flip_idx(self, q: int) -> np.ndarray:
        if q not in self._flip:
            self._flip[q] = np.arange(1 << self.n) ^ (1 << q)
        return self._flip[q]

    def _bit_mask(self, q: int) -> np.ndarray:
        if q not in self._bit:
            self._bit[q] = ((np.arange(1 << self.n) >> q) & 1).astype(bool)
        return self._bit[q]

    def pauli_apply(self, amps: np.ndarray, pauli: PauliString) -> np.ndarray:
        out = amps
        for q, letter in pauli.terms:
            if letter == "X":
                out = out[self._flip_idx(q)]
            elif letter == "Y":
                out = out[self._flip_idx(q)] * np.where(self._bit_mask(q), 1j, -1j)
            else:
                out = np.where(self._bit_mask(q), -out, out)
        return out

    def apply_mixer(self, amps: np.ndarray, mixer: MixerOperator, beta: float) -> np.ndarray:
        c, s = math.cos(beta), math.sin(beta)
        if mixer.kind == "global_x":
            for q in range(self.n):
                amps = c * amps - 1j * s * amps[self._flip_idx(q)]
            return amps
        if mixer.kind == "global_y":
            for q in range(self.n):
                ya = amps[self._flip_idx(q)] * np.where(self._bit_mask(q), 1j, -1j)
                amps = c * amps - 1j * s * ya
            return amps
        return c * amps - 1j * s * self.pauli_apply(amps, mixer.pauli)

    def evolve(
        self,
        psi0: np.ndarray,
        parameters: Sequence[float],
        mixers: Sequence[MixerOperator],
    ) -> np.ndarray:
        if len(parameters) != 2 * len(mixers):
            raise ValueError("need exactly (gamma, beta) per mixer")
        amps = psi0
        for k, mixer in enumerate(mixers):
            gamma, beta = parameters[2 * k], parameters[2 * k + 1]
            amps = amps * np.exp(-1j * gamma * self.energies)
            amps = self.apply_mixer(amps, mixer, beta)
        return amps

    def expectation(self, amps: np.ndarray) -> float:
        return float((np.abs(amps) ** 2) @ self.energies)


# A mixer selector maps (current state, Hamiltonian, layer index) to
# (mixer, selection gradient or None, selection seconds).
MixerSelector = Callable[
    [np.ndarray, IsingHamiltonian, int], tuple[MixerOperator, float | None, float]
]


def _standard_selector(state: np.ndarray, h: IsingHamiltonian, k: int):
    return MixerOperator.global_x(), None, 0.0


def run_iterative_qaoa(
    inst: FeatureSelectionInstance,
    max_layers: int,
    config: RunConfig | None = None,
    seed: int = 0,
    algorithm: str = "standard",
    selector: MixerSelector | None = None,
) -> QaoaRunRecord:
    """Shared engine: grows the circuit layer by layer, re-optimizing all
    angles after each appended layer. `selector` picks each layer's mixer;
    the default always returns the global X mixer.
    """
    cfg = config or RunConfig()
    if max_layers < 0:
        raise ValueError("max_layers must be >= 0")
    select = selector or _standard_selector
    h = to_ising(inst)
    prop = Propagator(h)
    c_exact = brute_force_min(inst).value
    if abs(c_exact) < RATIO_FLOOR:
        raise ValueError(
            "instance optimum is zero; approximation ratios are undefined"
        )
    init_gen = spawn(seed, STREAM_INIT)
    shot_gen = spawn(seed, STREAM_SHOTS)
    psi0 = init_plus_state(inst.n).amplitudes

    def estimate(amps: np.ndarray) -> float:
        if cfg.mode == "exact":
            return prop.expectation(amps)
        hist = sample_shots(StateVector(inst.n, amps), cfg.shots, shot_gen)
        return estimate_cost_from_samples(hist, h)

    c0 = estimate(psi0)
    mixers: list[MixerOperator] = []
    params = np.zeros(0)
    layer_records: list[LayerRecord] = []
    for k in range(1, max_layers + 1):
        t_start = time.perf_counter()
        state_now = prop.evolve(psi0, params, mixers)
        mixer, _grad, sel_seconds = select(state_now, h, k)
        mixers.append(mixer)
        gamma_k = init_gen.uniform(0.0, 2.0 * math.pi)
        beta_k = init_gen.uniform(0.0, math.pi)
        x0 = np.concatenate([params, [gamma_k, beta_k]])

        def objective(vec: np.ndarray) -> float:
            return estimate(prop.evolve(psi0, vec, mixers))

        # Line searches hit the fresh random coordinates first, then sweep
        # back from the most recent warm-started layer to the oldest.
        order: list[int] = []
        for j in range(k, 0, -1):
            order += [2 * j - 2, 2 * j - 1]
        result = powell_minimize(objective, x0, cfg.optimizer, direction_order=order)
        params = result.best_parameters
        cost_k = estimate(prop.evolve(psi0, params, mixers))
        seconds = time.perf_counter() - t_start
        layer_records.append(
            LayerRecord(
                layer=k,
                mixer=mixer.label(),
                gamma=float(params[2 * k - 2]),
                beta=float(params[2 * k - 1]),
                parameters=tuple(float(v) for v in params),
                cost=cost_k,
                ratio=approximation_ratio(cost_k, c_exact),
                seconds=seconds,
                selection_seconds=sel_seconds,
                evaluations=result.evaluations,
                converged=result.converged,
            )
        )
    return QaoaRunRecord(
        n=inst.n,
        alpha=inst.alpha,
        instance_seed=inst.seed,
        run_seed=seed,
        algorithm=algorithm,
        mode=cfg.mode,
        shots=cfg.shots,
        c_exact=c_exact,
        c0=c0,
        layers=tuple(layer_records),
        final_circuit=assemble_circuit(h, mixers, params),
    )


def run_standard_qaoa(
    inst: FeatureSelectionInstance,
    max_layers: int,
    config: RunConfig | None = None,
    seed: int = 0,
) -> QaoaRunRecord:
    """Standard QAOA: every layer mixes with sum_i X_i."""
    return run_iterative_qaoa(
        inst, max_layers, config=config, seed=seed, algorithm="standard"
    )


# -- serialization -------------------------------------------------------------

def _gate_to_json(gate: Gate) -> dict:
    doc: dict = {"kind": gate.kind, "qubits": list(gate.qubits)}
    if gate.angle is not None:
        doc["angle"] = gate.angle
    if gate.pauli is not None:
        doc["pauli"] = gate.pauli.label()
    return doc


def record_to_json_dict(record: QaoaRunRecord) -> dict:
    return {
        "n": record.n,
        "alpha": record.alpha,
        "instance_seed": record.instance_seed,
        "run_seed": record.run_seed,
        "algorithm": record.algorithm,
        "mode": record.mode,
        "shots": record.shots,
        "c_exact": record.c_exact,
        "c0": record.c0,
        "total_layers": record.total_layers,
        "layers": [
            {
                "layer": rec.layer,
                "mixer": rec.mixer,
                "gamma": rec.gamma,
                "beta": rec.beta,
                "parameters": list(rec.parameters),
                "cost": rec.cost,
                "ratio": rec.ratio,
                "seconds": rec.seconds,
                "selection_seconds": rec.selection_seconds,
                "evaluations": rec.evaluations,
                "converged": rec.converged,
            }
            for rec in record.layers
        ],
        "final_circuit": {
            "n": record.final_circuit.n,
            "gates": [_gate_to_json(g) for g in record.final_circuit.gates],
        },
    }


def save_record(record: QaoaRunRecord, path) -> None:
    with open(path, "w") as fh:
        json.dump(record_to_json_dict(record), fh, indent=2)
        fh.write("\n")


CSV_HEADER = "seed,n,alpha,algorithm,layer,cost,ratio,seconds"


def record_csv_rows(record: QaoaRunRecord) -> list[str]:
    """Per-layer CSV rows. Layer 0 carries C_0 with a blank seconds cell;
    all other cells are exact reprs so identical runs produce identical
    bytes (the seconds cell is the lone non-reproducible column)."""
    rows = [
        f"{record.run_seed},{record.n},{record.alpha!r},{record.algorithm},0,"
        f"{record.c0!r},{approximation_ratio(record.c0, record.c_exact)!r},"
    ]
    for rec in record.layers:
        rows.append(
            f"{record.run_seed},{record.n},{record.alpha!r},{record.algorithm},"
            f"{rec.layer},{rec.cost!r},{rec.ratio!r},{rec.seconds:.6f}"
        )
    return rows


def write_records_csv(records: Iterable[QaoaRunRecord], path) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for record in records:
            for row in record_csv_rows(record):
                fh.write(row + "\n")
