"""Topologies, routing, native lowering, depth profiles, and the
time/error estimators, pinned against hand-worked examples and statevector
re-simulation."""

import json
import math

import numpy as np
import pytest

from fsqaoa import (
    CalibrationData,
    Circuit,
    DepthProfile,
    Gate,
    MixerOperator,
    PauliString,
    all_to_all,
    build_topology,
    builtin_device_profiles,
    compute_depth_profile,
    estimate_error_probability,
    estimate_layer_time,
    estimate_resources,
    estimate_total_time,
    generate_instance,
    heavy_hex,
    route_circuit,
    routing_fidelity,
    run_circuit,
    square_lattice,
    to_ising,
    to_native_circuit,
    verify_routing,
)
from fsqaoa.hardware import (
    BRISBANE_CALIBRATION,
    ESTIMATE_CSV_HEADER,
    H2_CALIBRATION,
    estimate_csv_row,
    load_device_profiles,
    qaoa_layer_segments,
    write_estimates_csv,
)
from fsqaoa.qaoa import assemble_circuit


def qaoa_test_circuit(n, seed=1, layers=2, native=False):
    inst = generate_instance(n, seed, alpha=0.4)
    h = to_ising(inst)
    params = [0.9, 0.4, 0.2, 1.1, 1.7, 0.3][: 2 * layers]
    return assemble_circuit(h, [MixerOperator.global_x()] * layers, params, native=native)


# -- topologies -------------------------------------------------------------


def test_all_to_all_counts():
    t = all_to_all(6)
    assert t.num_nodes == 6 and len(t.edges) == 15
    assert t.has_edge(0, 5) and t.has_edge(5, 0)


def test_square_lattice_counts_and_structure():
    t = square_lattice(3, 3)
    assert t.num_nodes == 9 and len(t.edges) == 12
    assert t.has_edge(0, 1) and t.has_edge(0, 3) and not t.has_edge(0, 4)
    big = square_lattice(11, 12)
    assert big.num_nodes == 132
    assert len(big.edges) == 11 * 11 + 10 * 12
    with pytest.raises(ValueError):
        square_lattice(0, 3)


def test_heavy_hex_production_dimensions():
    t = heavy_hex(7, 15)
    assert t.num_nodes == 127
    assert len(t.edges) == 144
    assert t.mean_degree() == pytest.approx(2.3, abs=0.05)
    # degrees in a heavy-hex graph never exceed 3
    assert max(len(t.neighbors(v)) for v in range(t.num_nodes)) == 3


def test_build_topology_dispatch():
    assert build_topology("all-to-all", nodes=4).num_nodes == 4
    assert build_topology("square-lattice", rows=2, cols=2).num_nodes == 4
    assert build_topology("heavy-hex").num_nodes == 127
    with pytest.raises(ValueError):
        build_topology("torus")


def test_bfs_nodes_is_connected_prefix():
    t = heavy_hex(7, 15)
    order = t.bfs_nodes(6)
    assert order == [0, 1, 14, 2, 18, 3]
    for k in range(2, len(order) + 1):
        prefix = set(order[:k])
        # each added node attaches to the existing prefix
        assert any(t.has_edge(order[k - 1], v) for v in prefix - {order[k - 1]})
    with pytest.raises(ValueError):
        t.bfs_nodes(0)


# -- calibration ------------------------------------------------------------


def test_builtin_profiles_match_published_constants():
    profiles = builtin_device_profiles()
    assert set(profiles) == {
        "ibm_brisbane", "ibm_brisbane_square", "ibm_brisbane_alltoall", "quantinuum_h2",
    }
    b = profiles["ibm_brisbane"]
    assert b.topology.kind == "heavy-hex" and b.topology.num_nodes == 127
    assert b.calibration == CalibrationData(t1_us=0.06, t2_us=0.66, e1=3.3e-4, e2=1.2e-2, em=3.7e-2)
    assert profiles["ibm_brisbane_square"].topology.num_nodes == 132
    assert profiles["ibm_brisbane_alltoall"].topology.num_nodes == 127
    h2 = profiles["quantinuum_h2"]
    assert h2.topology.kind == "all-to-all" and h2.topology.num_nodes == 56
    assert h2.calibration == CalibrationData(t1_us=63.0, t2_us=308.0, e1=3.0e-5, e2=1.0e-3, em=1.0e-3)
    assert BRISBANE_CALIBRATION == b.calibration
    assert H2_CALIBRATION == h2.calibration


def test_calibration_validation():
    with pytest.raises(ValueError):
        CalibrationData(t1_us=0.0, t2_us=1.0, e1=0.0, e2=0.0, em=0.0)
    with pytest.raises(ValueError):
        CalibrationData(t1_us=1.0, t2_us=1.0, e1=-0.1, e2=0.0, em=0.0)


def test_load_device_profiles_round_trip(tmp_path):
    doc = [{
        "name": "toy", "t1_us": 1.0, "t2_us": 2.0, "e1": 0.01, "e2": 0.02, "em": 0.03,
        "topology": {"kind": "square-lattice", "rows": 2, "cols": 3},
    }]
    path = tmp_path / "devices.json"
    path.write_text(json.dumps(doc))
    out = load_device_profiles(path)
    assert out["toy"].topology.num_nodes == 6
    assert out["toy"].calibration.t2_us == 2.0
    path.write_text(json.dumps(doc + doc))
    with pytest.raises(ValueError):
        load_device_profiles(path)  # duplicate name
    path.write_text(json.dumps([{"name": "broken"}]))
    with pytest.raises(ValueError):
        load_device_profiles(path)


# -- depth profiles -----------------------------------------------------------


def test_depth_profile_hand_layered_example():
    # H0 H1 | CNOT | (RZ free) | CNOT | H0 -> two 1q layers, two 2q layers.
    circ = Circuit(2, (
        Gate.h(0), Gate.h(1), Gate.cnot(0, 1), Gate.rz(1, 0.3), Gate.cnot(0, 1), Gate.h(0),
    ))
    p = compute_depth_profile(circ)
    assert (p.d1, p.d2, p.n1, p.n2, p.nm) == (2, 2, 3, 2, 0)
    assert p.depth == 4


def test_mixed_layer_counts_as_two_qubit_layer():
    circ = Circuit(3, (Gate.cnot(0, 1), Gate.h(2)))
    p = compute_depth_profile(circ)
    assert (p.d1, p.d2) == (0, 1)
    assert (p.n1, p.n2) == (1, 1)


def test_swap_occupies_one_slot_but_costs_three_gates():
    p = compute_depth_profile(Circuit(2, (Gate.swap(0, 1),)))
    assert (p.d1, p.d2, p.n1, p.n2) == (0, 1, 0, 3)


def test_virtual_z_gates_are_free():
    circ = Circuit(2, (
        Gate.rz(0, 1.0),
        Gate.pauli_rotation(PauliString.of({1: "Z"}), 0.4),
    ))
    p = compute_depth_profile(circ)
    assert (p.d1, p.d2, p.n1, p.n2) == (0, 0, 0, 0)
    cal = CalibrationData(t1_us=1.0, t2_us=1.0, e1=0.5, e2=0.5, em=0.5)
    assert estimate_layer_time(p, cal, iterations=10, shots=10) == 0.0
    assert estimate_error_probability(p, cal) == 0.0


def test_measured_qubits_tracked():
    p = compute_depth_profile(Circuit(2, (Gate.h(0),)), measured_qubits=2)
    assert p.nm == 2
    with pytest.raises(ValueError):
        compute_depth_profile(Circuit(1, ()), measured_qubits=-1)


# -- estimator arithmetic -----------------------------------------------------


def test_layer_time_hand_values():
    p = DepthProfile(d1=2, d2=3, n1=0, n2=0, nm=0)
    assert estimate_layer_time(p, BRISBANE_CALIBRATION, 1, 1) == pytest.approx(2.1, rel=1e-12)
    assert estimate_layer_time(p, H2_CALIBRATION, 1, 1) == pytest.approx(1050.0, rel=1e-12)
    assert estimate_layer_time(p, BRISBANE_CALIBRATION, 1500, 10_000) == pytest.approx(
        2.1 * 1500 * 10_000, rel=1e-12
    )
    with pytest.raises(ValueError):
        estimate_layer_time(p, BRISBANE_CALIBRATION, 0, 1)


def test_total_time_sums_layer_times():
    a = DepthProfile(d1=1, d2=0, n1=1, n2=0, nm=0)
    b = DepthProfile(d1=0, d2=2, n1=0, n2=2, nm=0)
    cal = CalibrationData(t1_us=3.0, t2_us=5.0, e1=0.0, e2=0.0, em=0.0)
    total = estimate_total_time([a, b], cal, iterations=2, shots=4)
    assert total == pytest.approx((3.0 + 10.0) * 8, rel=1e-12)
    with pytest.raises(ValueError):
        estimate_total_time([], cal, 1, 1)


def test_error_probability_hand_values():
    assert estimate_error_probability(
        DepthProfile(0, 0, 1, 0, 0), H2_CALIBRATION
    ) == pytest.approx(3.0e-5, rel=1e-12)
    assert estimate_error_probability(
        DepthProfile(0, 0, 0, 2, 1), H2_CALIBRATION
    ) == pytest.approx(1.0 - 0.999**3, rel=1e-12)
    zero = CalibrationData(t1_us=1.0, t2_us=1.0, e1=0.0, e2=0.0, em=0.0)
    assert estimate_error_probability(DepthProfile(3, 4, 5, 6, 7), zero) == 0.0
    # generic triple against the closed form
    cal = CalibrationData(t1_us=1.0, t2_us=1.0, e1=0.01, e2=0.05, em=0.2)
    want = 1.0 - (0.99**3) * (0.95**2) * (0.8**1)
    assert estimate_error_probability(DepthProfile(0, 0, 3, 2, 1), cal) == pytest.approx(want, rel=1e-12)


def test_error_probability_monotone_in_counts():
    cal = CalibrationData(t1_us=1.0, t2_us=1.0, e1=0.001, e2=0.01, em=0.02)
    base = estimate_error_probability(DepthProfile(0, 0, 5, 5, 5), cal)
    for bump in (DepthProfile(0, 0, 6, 5, 5), DepthProfile(0, 0, 5, 6, 5), DepthProfile(0, 0, 5, 5, 6)):
        assert estimate_error_probability(bump, cal) > base


# -- routing ------------------------------------------------------------------


def test_routing_on_path_inserts_single_swap():
    path = square_lattice(1, 3)  # 0 - 1 - 2
    circ = Circuit(3, (Gate.cnot(0, 2),))
    routed = route_circuit(circ, path)
    assert routed.swap_count == 1
    assert routed.active_nodes == (0, 1, 2)
    assert routed.initial_slots == (0, 1, 2)
    # data of logical 0 moved one hop toward logical 2
    assert routed.final_slots == (1, 0, 2)
    kinds = [g.kind for g in routed.circuit.gates]
    assert kinds == ["SWAP", "CNOT"]
    assert verify_routing(circ, routed)


def test_all_to_all_routing_is_swap_free():
    circ = qaoa_test_circuit(5, native=True)
    routed = route_circuit(circ, all_to_all(8))
    assert routed.swap_count == 0
    assert verify_routing(circ, routed)


def test_routed_two_qubit_gates_sit_on_edges():
    topo = heavy_hex(7, 15)
    circ = qaoa_test_circuit(6, native=True)
    routed = route_circuit(circ, topo)
    assert routed.swap_count > 0
    for gate in routed.circuit.gates:
        if len(gate.qubits) == 2:
            a, b = (routed.active_nodes[s] for s in gate.qubits)
            assert topo.has_edge(a, b)


@pytest.mark.parametrize("maker", [lambda: heavy_hex(7, 15), lambda: square_lattice(11, 12), lambda: all_to_all(127)])
def test_routing_preserves_statevector_semantics(maker):
    circ = qaoa_test_circuit(5, seed=3, native=True)
    routed = route_circuit(circ, maker())
    fidelity, first_bad = routing_fidelity(circ, routed)
    assert fidelity >= 1.0 - 1e-9
    assert first_bad is None


def test_custom_initial_placement_and_validation():
    topo = square_lattice(2, 3)
    circ = Circuit(3, (Gate.cnot(0, 1), Gate.cnot(1, 2)))
    default = route_circuit(circ, topo)
    explicit = route_circuit(circ, topo, initial_nodes=topo.bfs_nodes(3))
    assert default.circuit.gates == explicit.circuit.gates
    assert default.final_slots == explicit.final_slots
    shifted = route_circuit(circ, topo, initial_nodes=[3, 4, 5])
    assert verify_routing(circ, shifted)
    with pytest.raises(ValueError):
        route_circuit(circ, topo, initial_nodes=[0, 0, 1])
    with pytest.raises(ValueError):
        route_circuit(circ, topo, initial_nodes=[0, 1])
    with pytest.raises(ValueError):
        route_circuit(circ, topo, initial_nodes=[0, 1, 99])
    with pytest.raises(ValueError):
        route_circuit(Circuit(7, ()), square_lattice(2, 3))


# -- native lowering ------------------------------------------------------------


def test_native_circuit_uses_only_native_kinds_and_preserves_state():
    circ = qaoa_test_circuit(4, seed=2, layers=2)
    native = to_native_circuit(circ)
    assert {g.kind for g in native.gates} <= {"RX", "RY", "RZ", "CNOT", "SWAP"}
    a = run_circuit(circ).amplitudes
    b = run_circuit(native).amplitudes
    # equal up to global phase
    assert abs(np.vdot(a, b)) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_native_lowering_of_each_rotation_basis():
    for letters in ({0: "X", 1: "X"}, {0: "X", 1: "Y"}, {0: "Y", 1: "Z"}, {0: "Z", 1: "Z"}):
        circ = Circuit(2, (Gate.pauli_rotation(PauliString.of(letters), 0.7),))
        native = to_native_circuit(circ)
        a = run_circuit(circ).amplitudes
        b = run_circuit(native).amplitudes
        assert abs(np.vdot(a, b)) ** 2 == pytest.approx(1.0, abs=1e-12), letters


# -- resource estimates ---------------------------------------------------------


def test_layer_segments_structure():
    inst = generate_instance(4, 2, alpha=0.5)
    segs = qaoa_layer_segments(inst, 3, seed=1)
    assert len(segs) == 3
    assert sum(1 for g in segs[0].gates if g.kind == "H") == 4
    assert not any(g.kind == "H" for g in segs[1].gates)
    with pytest.raises(ValueError):
        qaoa_layer_segments(inst, 0)


def test_estimate_resources_consistency():
    inst = generate_instance(5, 4, alpha=0.3)
    profiles = builtin_device_profiles()
    est = estimate_resources(inst, profiles["ibm_brisbane"], layers=4, iterations=7, shots=11, seed=2)
    assert est.layers == 4 and len(est.layer_times_us) == 4
    assert est.total_time_s == pytest.approx(sum(est.layer_times_us) * 1e-6, rel=1e-12)
    assert est.profile.nm == inst.n  # measured once, at the final layer
    assert 0.0 < est.error_probability < 1.0
    # error convention: single execution of the one-layer circuit, so the
    # requested layer count must not change it
    shallow = estimate_resources(inst, profiles["ibm_brisbane"], layers=1, iterations=7, shots=11, seed=2)
    assert est.error_probability == shallow.error_probability
    # doubled repetition doubles wall time exactly
    twice = estimate_resources(inst, profiles["ibm_brisbane"], layers=4, iterations=14, shots=11, seed=2)
    assert twice.total_time_s == pytest.approx(2 * est.total_time_s, rel=1e-12)


def test_h2_always_slower_than_alltoall_brisbane():
    profiles = builtin_device_profiles()
    for n in (3, 5):
        inst = generate_instance(n, 1, alpha=0.5)
        fast = estimate_resources(inst, profiles["ibm_brisbane_alltoall"], layers=3, iterations=5, shots=9)
        slow = estimate_resources(inst, profiles["quantinuum_h2"], layers=3, iterations=5, shots=9)
        assert slow.total_time_s > fast.total_time_s


def test_alltoall_depth_profile_independent_of_instance_seed():
    profiles = builtin_device_profiles()
    shapes = set()
    for seed in (1, 2, 3):
        inst = generate_instance(6, seed, alpha=0.4)
        est = estimate_resources(inst, profiles["ibm_brisbane_alltoall"], layers=3, iterations=1, shots=1, seed=9)
        shapes.add((est.profile.d1, est.profile.d2, est.profile.n1, est.profile.n2))
    assert len(shapes) == 1


def test_estimate_csv_schema(tmp_path):
    inst = generate_instance(4, 6, alpha=0.5)
    profiles = builtin_device_profiles()
    ests = [
        estimate_resources(inst, profiles[name], layers=2, iterations=3, shots=5)
        for name in ("ibm_brisbane_alltoall", "quantinuum_h2")
    ]
    row = estimate_csv_row(ests[0]).split(",")
    assert len(row) == len(ESTIMATE_CSV_HEADER.split(","))
    assert row[0] == "ibm_brisbane_alltoall" and row[2] == "4"
    p = ests[0].profile
    assert row[5:10] == [str(p.d1), str(p.d2), str(p.n1), str(p.n2), str(p.nm)]
    assert float(row[10]) == pytest.approx(ests[0].total_time_s)
    assert float(row[11]) == pytest.approx(ests[0].error_probability)
    path = tmp_path / "estimates.csv"
    write_estimates_csv(ests, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ESTIMATE_CSV_HEADER
    assert len(lines) == 3
