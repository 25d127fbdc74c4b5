"""Device topologies, SWAP routing, and run-time / error-probability estimates.

Timing model per circuit layer (a layer is a set of gates that can fire
simultaneously, at most one gate per qubit):

    T = (d1 * t1 + d2 * t2) * iterations * shots

where d1 counts layers containing only single-qubit gates, d2 counts layers
containing at least one two-qubit gate (mixed layers bill at the two-qubit
time), and t1/t2 are the calibrated gate durations. Z rotations are virtual
(frame updates): they cost no time, occupy no layer, and add no error, so
they are excluded everywhere. State preparation and measurement times are
excluded from T.

Error model per single execution of a circuit with n1 one-qubit gates,
n2 two-qubit gates and nm measured qubits:

    E_tot = 1 - (1 - e1)^n1 * (1 - e2)^n2 * (1 - em)^nm

Gate counts, not depths, enter E_tot. A SWAP inserted by routing counts as
3 two-qubit gates in n2 but occupies a single layer slot.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .problem import FeatureSelectionInstance, to_ising
from .qaoa import MixerOperator, build_cost_circuit, build_mixer_circuit
from .rng import STREAM_INIT, spawn
from .simulator import Circuit, Gate, PauliString, run_circuit


# -- topologies ----------------------------------------------------------------

@dataclass(frozen=True)
class Topology:
    """Undirected connected coupling graph on nodes 0..num_nodes-1."""

    kind: str
    num_nodes: int
    edges: frozenset[tuple[int, int]]
    _adj: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.num_nodes < 1:
            raise ValueError("topology needs at least one node")
        canon = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on node {a}")
            if not (0 <= a < self.num_nodes and 0 <= b < self.num_nodes):
                raise ValueError(f"edge ({a}, {b}) outside node range")
            canon.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(canon))
        if self.num_nodes > 1 and len(self._bfs_from(0)) != self.num_nodes:
            raise ValueError("topology graph is not connected")

    def adjacency(self) -> dict[int, list[int]]:
        if not self._adj:
            adj: dict[int, list[int]] = {v: [] for v in range(self.num_nodes)}
            for a, b in self.edges:
                adj[a].append(b)
                adj[b].append(a)
            for v in adj:
                adj[v].sort()
            self._adj["map"] = adj
        return self._adj["map"]

    def neighbors(self, v: int) -> list[int]:
        return self.adjacency()[v]

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def _bfs_from(self, start: int) -> list[int]:
        """BFS order with ascending-neighbor expansion (deterministic)."""
        seen = {start}
        order = [start]
        head = 0
        while head < len(order):
            for w in self.neighbors(order[head]):
                if w not in seen:
                    seen.add(w)
                    order.append(w)
            head += 1
        return order

    def bfs_nodes(self, count: int, start: int = 0) -> list[int]:
        """First `count` nodes of the breadth-first traversal from `start`."""
        if not (1 <= count <= self.num_nodes):
            raise ValueError(f"count must be in [1, {self.num_nodes}], got {count}")
        return self._bfs_from(start)[:count]

    def mean_degree(self) -> float:
        return 2.0 * len(self.edges) / self.num_nodes


def all_to_all(num_nodes: int) -> Topology:
    edges = frozenset(
        (i, j) for i in range(num_nodes) for j in range(i + 1, num_nodes)
    )
    return Topology(kind="all-to-all", num_nodes=num_nodes, edges=edges)


def square_lattice(rows: int, cols: int) -> Topology:
    """rows x cols grid; interior nodes have 4 neighbors."""
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be >= 1")
    edges = set()
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.add((v, v + 1))
            if r + 1 < rows:
                edges.add((v, v + cols))
    return Topology(kind="square-lattice", num_nodes=rows * cols, edges=frozenset(edges))


def heavy_hex(rows: int = 7, cols: int = 15) -> Topology:
    """Heavy-hexagon lattice: horizontal qubit rows joined by bridge qubits.

    Row 0 spans columns 0..cols-2 and the last row spans 1..cols-1 (the
    truncated corners of the production 127-qubit devices); middle rows span
    all columns. Between consecutive rows, bridge qubits sit every 4 columns
    at alternating offsets 0 and 2 and connect vertically to both rows.
    rows=7, cols=15 gives 127 nodes, 144 edges, mean degree ~ 2.27.
    """
    if rows < 2 or cols < 5:
        raise ValueError("heavy-hex needs rows >= 2 and cols >= 5")

    def row_cols(r: int) -> range:
        if r == 0:
            return range(0, cols - 1)
        if r == rows - 1:
            return range(1, cols)
        return range(0, cols)

    ids: dict[tuple[str, int, int], int] = {}
    next_id = 0
    edges = set()
    for r in range(rows):
        prev = None
        for c in row_cols(r):
            ids[("row", r, c)] = next_id
            if prev is not None:
                edges.add((prev, next_id))
            prev = next_id
            next_id += 1
        if r < rows - 1:
            offset = 0 if r % 2 == 0 else 2
            for c in range(offset, cols, 4):
                # Bridges only where both row endpoints exist (boundary rows
                # are truncated by one column).
                if c in row_cols(r) and c in row_cols(r + 1):
                    ids[("bridge", r, c)] = next_id
                    next_id += 1
    # Bridge-to-lower-row edges need the next row's ids, so wire afterwards.
    for (tag, r, c), v in ids.items():
        if tag != "bridge":
            continue
        edges.add((ids[("row", r, c)], v))
        edges.add((v, ids[("row", r + 1, c)]))
    return Topology(kind="heavy-hex", num_nodes=next_id, edges=frozenset(edges))


def build_topology(kind: str, **params) -> Topology:
    """Dispatcher: "all-to-all" (nodes=...), "square-lattice" (rows, cols),
    "heavy-hex" (rows, cols)."""
    if kind == "all-to-all":
        return all_to_all(int(params["nodes"]))
    if kind == "square-lattice":
        return square_lattice(int(params["rows"]), int(params["cols"]))
    if kind == "heavy-hex":
        return heavy_hex(int(params.get("rows", 7)), int(params.get("cols", 15)))
    raise ValueError(f"unknown topology kind {kind!r}")


# -- calibration and device profiles -------------------------------------------

@dataclass(frozen=True)
class CalibrationData:
    """Calibrated gate durations (microseconds) and error probabilities."""

    t1_us: float
    t2_us: float
    e1: float
    e2: float
    em: float

    def __post_init__(self):
        if not (self.t1_us > 0 and self.t2_us > 0):
            raise ValueError("gate durations must be positive")
        for name in ("e1", "e2", "em"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise ValueError(f"{name} must lie in [0, 1), got {v}")


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    topology: Topology
    calibration: CalibrationData


BRISBANE_CALIBRATION = CalibrationData(
    t1_us=0.06, t2_us=0.66, e1=3.3e-4, e2=1.2e-2, em=3.7e-2
)
H2_CALIBRATION = CalibrationData(
    t1_us=63.0, t2_us=308.0, e1=3.0e-5, e2=1.0e-3, em=1.0e-3
)


def builtin_device_profiles() -> dict[str, DeviceProfile]:
    """The four built-in device/topology combinations:

    * ibm_brisbane           127-node heavy-hex, superconducting calibration
    * ibm_brisbane_square    hypothetical 132-node square grid, same calibration
    * ibm_brisbane_alltoall  hypothetical all-to-all, same calibration
    * quantinuum_h2          56-node all-to-all, trapped-ion calibration
    """
    return {
        "ibm_brisbane": DeviceProfile("ibm_brisbane", heavy_hex(7, 15), BRISBANE_CALIBRATION),
        "ibm_brisbane_square": DeviceProfile(
            "ibm_brisbane_square", square_lattice(11, 12), BRISBANE_CALIBRATION
        ),
        "ibm_brisbane_alltoall": DeviceProfile(
            "ibm_brisbane_alltoall", all_to_all(127), BRISBANE_CALIBRATION
        ),
        "quantinuum_h2": DeviceProfile("quantinuum_h2", all_to_all(56), H2_CALIBRATION),
    }


def load_device_profiles(path) -> dict[str, DeviceProfile]:
    """JSON list of {name, t1_us, t2_us, e1, e2, em, topology:{kind, ...}}."""
    with open(path) as fh:
        docs = json.load(fh)
    if not isinstance(docs, list):
        raise ValueError("device profile file must hold a JSON list")
    out: dict[str, DeviceProfile] = {}
    for doc in docs:
        try:
            name = str(doc["name"])
            calib = CalibrationData(
                t1_us=float(doc["t1_us"]),
                t2_us=float(doc["t2_us"]),
                e1=float(doc["e1"]),
                e2=float(doc["e2"]),
                em=float(doc["em"]),
            )
            topo_doc = dict(doc["topology"])
            kind = topo_doc.pop("kind")
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed device profile entry: {exc}") from exc
        if name in out:
            raise ValueError(f"duplicate device profile name {name!r}")
        out[name] = DeviceProfile(name, build_topology(kind, **topo_doc), calib)
    return out


# -- routing -------------------------------------------------------------------

@dataclass(frozen=True)
class RoutedCircuit:
    """A circuit rewritten onto hardware slots.

    Slot s of `circuit` is physical node active_nodes[s]; initial_slots and
    final_slots map each logical qubit to its slot before/after execution
    (they differ when SWAPs moved data around).
    """

    circuit: Circuit
    topology: Topology
    active_nodes: tuple[int, ...]
    initial_slots: tuple[int, ...]
    final_slots: tuple[int, ...]
    swap_count: int

    def node_of_logical_final(self, logical: int) -> int:
        return self.active_nodes[self.final_slots[logical]]

    def final_nodes(self) -> list[int]:
        """logical i -> physical node after execution (for chaining)."""
        return [self.active_nodes[s] for s in self.final_slots]


def route_circuit(
    circuit: Circuit,
    topology: Topology,
    initial_nodes: Sequence[int] | None = None,
) -> RoutedCircuit:
    """Greedy shortest-path SWAP insertion.

    Default placement puts logical qubit i on the i-th node of the
    breadth-first traversal from node 0, which keeps the active set
    connected. Before each two-qubit gate, the first operand hops along a
    shortest path (within the active set) toward the second, one SWAP per
    hop; neighbor ties break to the lowest node id.
    """
    n = circuit.n
    if n > topology.num_nodes:
        raise ValueError(f"{n} logical qubits exceed {topology.num_nodes} nodes")
    if initial_nodes is None:
        placement = topology.bfs_nodes(n)
    else:
        placement = [int(v) for v in initial_nodes]
        if len(placement) != n or len(set(placement)) != n:
            raise ValueError("initial placement must list n distinct nodes")
        for v in placement:
            if not (0 <= v < topology.num_nodes):
                raise ValueError(f"placement node {v} outside topology")
    active = sorted(placement)
    slot_of = {v: s for s, v in enumerate(active)}
    active_set = set(active)

    # All-pairs BFS distances restricted to the active induced subgraph.
    sub_adj = {
        v: [w for w in topology.neighbors(v) if w in active_set] for v in active
    }
    dist: dict[int, dict[int, int]] = {}
    for src in active:
        d = {src: 0}
        queue = [src]
        head = 0
        while head < len(queue):
            v = queue[head]
            head += 1
            for w in sub_adj[v]:
                if w not in d:
                    d[w] = d[v] + 1
                    queue.append(w)
        dist[src] = d
    for src in active:
        if len(dist[src]) != n:
            raise ValueError(
                "initial placement induces a disconnected subgraph; routing "
                "would need nodes outside the active set"
            )

    pos = list(placement)  # logical -> node
    holder = {v: l for l, v in enumerate(pos)}  # node -> logical
    initial_slots = tuple(slot_of[v] for v in pos)
    out_gates: list[Gate] = []
    swap_count = 0

    def emit(gate: Gate, slots: tuple[int, ...]) -> None:
        if gate.kind == "PAULIROT":
            remapped = PauliString(
                tuple((slots[k], letter) for k, (q, letter) in enumerate(gate.pauli.terms))
            )
            out_gates.append(Gate.pauli_rotation(remapped, gate.angle))
        else:
            out_gates.append(Gate(gate.kind, slots, angle=gate.angle))

    for gate in circuit.gates:
        if len(gate.qubits) == 1:
            emit(gate, (slot_of[pos[gate.qubits[0]]],))
            continue
        a, b = gate.qubits
        while not topology.has_edge(pos[a], pos[b]):
            target = pos[b]
            here = pos[a]
            step = min(
                (w for w in sub_adj[here]),
                key=lambda w: (dist[w][target], w),
            )
            out_gates.append(Gate.swap(slot_of[here], slot_of[step]))
            swap_count += 1
            other = holder[step]
            pos[a], pos[other] = step, here
            holder[here], holder[step] = other, a
        emit(gate, (slot_of[pos[a]], slot_of[pos[b]]))

    return RoutedCircuit(
        circuit=Circuit(n, tuple(out_gates)),
        topology=topology,
        active_nodes=tuple(active),
        initial_slots=initial_slots,
        final_slots=tuple(slot_of[v] for v in pos),
        swap_count=swap_count,
    )


ROUTING_VERIFY_MAX_N = 10


def routing_fidelity(original: Circuit, routed: RoutedCircuit) -> tuple[float, int | None]:
    """Statevector agreement between the original circuit and the routed one.

    Runs both from |0...0>, permutes the original's amplitudes by the final
    logical->slot map, and returns (|<a|b>|^2, first index where amplitudes
    differ beyond 1e-9, or None).
    """
    n = original.n
    if n > ROUTING_VERIFY_MAX_N:
        raise ValueError(f"statevector verification capped at n={ROUTING_VERIFY_MAX_N}")
    if routed.circuit.n != n:
        raise ValueError("routed circuit width differs from the original")
    psi_orig = run_circuit(original).amplitudes
    psi_routed = run_circuit(routed.circuit).amplitudes
    xs = np.arange(1 << n)
    ys = np.zeros_like(xs)
    for logical, slot in enumerate(routed.final_slots):
        ys |= ((xs >> logical) & 1) << slot
    expected = np.empty_like(psi_orig)
    expected[ys] = psi_orig
    fidelity = float(abs(np.vdot(expected, psi_routed)) ** 2)
    bad = np.nonzero(np.abs(expected - psi_routed) > 1e-9)[0]
    return fidelity, (int(bad[0]) if bad.size else None)


def verify_routing(original: Circuit, routed: RoutedCircuit) -> bool:
    """True iff every routed two-qubit gate sits on a topology edge and the
    routed statevector matches the permuted original (fidelity >= 1-1e-9)."""
    for gate in routed.circuit.gates:
        if len(gate.qubits) == 2:
            na = routed.active_nodes[gate.qubits[0]]
            nb = routed.active_nodes[gate.qubits[1]]
            if not routed.topology.has_edge(na, nb):
                return False
    fidelity, _ = routing_fidelity(original, routed)
    return fidelity >= 1.0 - 1e-9


# -- native-gate normalization ---------------------------------------------------

_HALF_PI = math.pi / 2.0


def _native_h(q: int) -> list[Gate]:
    # H = RZ(pi/2) RX(pi/2) RZ(pi/2) up to global phase.
    return [Gate.rz(q, _HALF_PI), Gate.rx(q, _HALF_PI), Gate.rz(q, _HALF_PI)]


def _basis_change(q: int, letter: str) -> tuple[list[Gate], list[Gate]]:
    """Gates mapping the letter's eigenbasis to Z before/after a Z core."""
    if letter == "Z":
        return [], []
    if letter == "X":
        return _native_h(q), _native_h(q)
    # Y: W = H S^dagger maps Y to Z; S^dagger = RZ(-pi/2) up to phase.
    pre = [Gate.rz(q, -_HALF_PI)] + _native_h(q)
    post = _native_h(q) + [Gate.rz(q, _HALF_PI)]
    return pre, post


def to_native_circuit(circuit: Circuit) -> Circuit:
    """Rewrite onto the native alphabet {RX, RY, RZ, CNOT, SWAP}.

    Exact up to global phase: H becomes RZ-RX-RZ; weight-1 Pauli rotations
    become the matching axis rotation at twice the angle; weight-2 Pauli
    rotations become basis changes around a CNOT - RZ - CNOT core. SWAPs
    stay atomic (their 3-CNOT cost is applied by the counting stage).
    """
    out: list[Gate] = []
    for gate in circuit.gates:
        if gate.kind == "H":
            out.extend(_native_h(gate.qubits[0]))
        elif gate.kind in ("RX", "RY", "RZ", "CNOT", "SWAP"):
            out.append(gate)
        elif gate.kind == "PAULIROT":
            terms = gate.pauli.terms
            if len(terms) == 1:
                (q, letter), theta = terms[0], 2.0 * gate.angle
                out.append(
                    Gate.rx(q, theta) if letter == "X"
                    else Gate.ry(q, theta) if letter == "Y"
                    else Gate.rz(q, theta)
                )
            elif len(terms) == 2:
                (qa, la), (qb, lb) = terms
                pre_a, post_a = _basis_change(qa, la)
                pre_b, post_b = _basis_change(qb, lb)
                out.extend(pre_a)
                out.extend(pre_b)
                out.append(Gate.cnot(qa, qb))
                out.append(Gate.rz(qb, 2.0 * gate.angle))
                out.append(Gate.cnot(qa, qb))
                out.extend(post_a)
                out.extend(post_b)
            else:
                raise ValueError(
                    f"no native lowering for weight-{len(terms)} Pauli rotation"
                )
        else:
            raise ValueError(f"unknown gate kind {gate.kind!r}")
    return Circuit(circuit.n, tuple(out))


# -- depth profiling and estimates ----------------------------------------------

SWAP_TWO_QUBIT_COST = 3  # one SWAP = 3 native two-qubit gates, 1 layer slot


@dataclass(frozen=True)
class DepthProfile:
    """Layer and gate tallies of one circuit execution.

    d1/d2: counts of single-qubit-only and two-qubit-containing layers.
    n1/n2: one- and two-qubit gate counts; nm: measured qubits.
    """

    d1: int
    d2: int
    n1: int
    n2: int
    nm: int

    def __post_init__(self):
        for name in ("d1", "d2", "n1", "n2", "nm"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def depth(self) -> int:
        return self.d1 + self.d2


def combine_profiles(profiles: Sequence[DepthProfile]) -> DepthProfile:
    """Concatenation tally: every field sums."""
    if not profiles:
        raise ValueError("nothing to combine")
    return DepthProfile(
        d1=sum(p.d1 for p in profiles),
        d2=sum(p.d2 for p in profiles),
        n1=sum(p.n1 for p in profiles),
        n2=sum(p.n2 for p in profiles),
        nm=sum(p.nm for p in profiles),
    )


def _is_free(gate: Gate) -> bool:
    # Virtual-Z family: RZ and diagonal weight-1 rotations cost nothing.
    if gate.kind == "RZ":
        return True
    return (
        gate.kind == "PAULIROT"
        and gate.pauli.weight == 1
        and gate.pauli.terms[0][1] == "Z"
    )


def compute_depth_profile(circuit: Circuit, measured_qubits: int = 0) -> DepthProfile:
    """Greedy earliest-slot layering and gate tally.

    Gates pack into the earliest layer where all their qubits are free
    (scanning in circuit order). Virtual-Z gates are skipped entirely. A
    SWAP occupies one slot but adds 3 to n2. Layers holding any two-qubit
    gate count toward d2, the rest toward d1.
    """
    if measured_qubits < 0:
        raise ValueError("measured_qubits must be >= 0")
    frontier = [0] * circuit.n  # last occupied layer per qubit, 1-based
    layer_has_2q: dict[int, bool] = {}
    n1 = n2 = 0
    for gate in circuit.gates:
        if _is_free(gate):
            continue
        is_2q = len(gate.qubits) == 2
        slot = 1 + max(frontier[q] for q in gate.qubits)
        for q in gate.qubits:
            frontier[q] = slot
        layer_has_2q[slot] = layer_has_2q.get(slot, False) or is_2q
        if gate.kind == "SWAP":
            n2 += SWAP_TWO_QUBIT_COST
        elif is_2q:
            n2 += 1
        else:
            n1 += 1
    d2 = sum(1 for filled in layer_has_2q.values() if filled)
    d1 = len(layer_has_2q) - d2
    return DepthProfile(d1=d1, d2=d2, n1=n1, n2=n2, nm=measured_qubits)


def estimate_layer_time(
    profile: DepthProfile, calibration: CalibrationData, iterations: int, shots: int
) -> float:
    """Wall time in microseconds to execute this profile iterations*shots times."""
    if iterations < 1 or shots < 1:
        raise ValueError("iterations and shots must be >= 1")
    per_run = profile.d1 * calibration.t1_us + profile.d2 * calibration.t2_us
    return per_run * iterations * shots


def estimate_total_time(
    profiles: Sequence[DepthProfile],
    calibration: CalibrationData,
    iterations: int,
    shots: int,
) -> float:
    """Sum of per-layer times, microseconds."""
    if not profiles:
        raise ValueError("no layer profiles given")
    return sum(estimate_layer_time(p, calibration, iterations, shots) for p in profiles)


def estimate_error_probability(profile: DepthProfile, calibration: CalibrationData) -> float:
    """E_tot = 1 - (1-e1)^n1 (1-e2)^n2 (1-em)^nm for one execution."""
    c = calibration
    survival = (
        (1.0 - c.e1) ** profile.n1
        * (1.0 - c.e2) ** profile.n2
        * (1.0 - c.em) ** profile.nm
    )
    return 1.0 - survival


# -- end-to-end resource estimation ----------------------------------------------

@dataclass(frozen=True)
class ResourceEstimate:
    """Resource figures for running one instance on one device profile.

    Depth and gate tallies aggregate the full `layers`-deep circuit;
    total_time_s prices that circuit at iterations*shots executions per
    layer segment; error_probability is E_tot of a single execution of the
    1-layer circuit (first segment plus measurement).
    """

    device: str
    topology: str
    n: int
    alpha: float
    instance_seed: int
    layers: int
    swaps: int
    profile: DepthProfile
    layer_times_us: tuple[float, ...]
    total_time_s: float
    error_probability: float


def qaoa_layer_segments(
    inst: FeatureSelectionInstance, layers: int, seed: int = 0
) -> list[Circuit]:
    """Logical circuit segments of a standard run: segment 1 is the Hadamard
    wall plus the first cost/mixer block, segment k>1 one cost/mixer block.
    Angles come from the same init stream an engine run with `seed` would
    draw, so gate structure matches a real run."""
    if layers < 1:
        raise ValueError("layers must be >= 1")
    h = to_ising(inst)
    init_gen = spawn(seed, STREAM_INIT)
    mixer = MixerOperator.global_x()
    segments = []
    for k in range(1, layers + 1):
        gamma = init_gen.uniform(0.0, 2.0 * math.pi)
        beta = init_gen.uniform(0.0, math.pi)
        gates: list[Gate] = []
        if k == 1:
            gates.extend(Gate.h(q) for q in range(inst.n))
        gates.extend(build_cost_circuit(h, gamma, native=False).gates)
        gates.extend(build_mixer_circuit(mixer, beta, inst.n).gates)
        segments.append(Circuit(inst.n, tuple(gates)))
    return segments


def estimate_resources(
    inst: FeatureSelectionInstance,
    device: DeviceProfile,
    layers: int = 30,
    iterations: int = 1500,
    shots: int = 10_000,
    seed: int = 0,
) -> ResourceEstimate:
    """Route, normalize, and price a standard run on one device.

    Segments are routed sequentially, each starting from the previous
    segment's final placement, so inserted SWAPs accumulate exactly as they
    would in one long circuit.
    """
    segments = qaoa_layer_segments(inst, layers, seed=seed)
    placement = None
    profiles: list[DepthProfile] = []
    swaps = 0
    for k, segment in enumerate(segments, start=1):
        routed = route_circuit(segment, device.topology, initial_nodes=placement)
        placement = routed.final_nodes()
        swaps += routed.swap_count
        native = to_native_circuit(routed.circuit)
        measured = inst.n if k == layers else 0
        profiles.append(compute_depth_profile(native, measured_qubits=measured))
    total_us = estimate_total_time(profiles, device.calibration, iterations, shots)
    layer_times = tuple(
        estimate_layer_time(p, device.calibration, iterations, shots) for p in profiles
    )
    # Single-execution error of the 1-layer circuit: first segment, all
    # qubits measured once.
    first = profiles[0]
    one_layer = DepthProfile(d1=first.d1, d2=first.d2, n1=first.n1, n2=first.n2, nm=inst.n)
    e_tot = estimate_error_probability(one_layer, device.calibration)
    return ResourceEstimate(
        device=device.name,
        topology=device.topology.kind,
        n=inst.n,
        alpha=inst.alpha,
        instance_seed=inst.seed,
        layers=layers,
        swaps=swaps,
        profile=combine_profiles(profiles),
        layer_times_us=layer_times,
        total_time_s=total_us * 1e-6,
        error_probability=e_tot,
    )


ESTIMATE_CSV_HEADER = "device,topology,n,layers,swaps,d1,d2,n1,n2,nm,t_total_s,e_tot"


def estimate_csv_row(est: ResourceEstimate) -> str:
    p = est.profile
    return (
        f"{est.device},{est.topology},{est.n},{est.layers},{est.swaps},"
        f"{p.d1},{p.d2},{p.n1},{p.n2},{p.nm},{est.total_time_s!r},"
        f"{est.error_probability!r}"
    )


def write_estimates_csv(estimates: Iterable[ResourceEstimate], path) -> None:
    with open(path, "w") as fh:
        fh.write(ESTIMATE_CSV_HEADER + "\n")
        for est in estimates:
            fh.write(estimate_csv_row(est) + "\n")
