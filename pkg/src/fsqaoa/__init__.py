"""Variational feature selection on QUBO instances.

Layout: problem definitions and the spin encoding (problem), a dense
statevector simulator (simulator), a Powell parameter optimizer (optimizer),
the standard and adaptive engines (qaoa, adapt), exact classical solvers
(exact), device models with routing and resource estimates (hardware), and
the command-line front end (cli).
"""

from .adapt import (
    MixerPool,
    build_mixer_pool,
    mixer_gradient,
    pool_size,
    run_adapt_qaoa,
    select_mixer,
)
from .exact import (
    ExactSolution,
    branch_and_bound_min,
    brute_force_min,
    compute_gap,
)
from .hardware import (
    CalibrationData,
    DepthProfile,
    DeviceProfile,
    ResourceEstimate,
    RoutedCircuit,
    Topology,
    all_to_all,
    build_topology,
    builtin_device_profiles,
    compute_depth_profile,
    estimate_error_probability,
    estimate_layer_time,
    estimate_resources,
    estimate_total_time,
    heavy_hex,
    route_circuit,
    routing_fidelity,
    square_lattice,
    to_native_circuit,
    verify_routing,
)
from .optimizer import OptimizationResult, OptimizerConfig, powell_minimize
from .problem import (
    DecisionVector,
    FeatureSelectionInstance,
    IsingHamiltonian,
    QuboMatrix,
    basis_energy,
    evaluate_feature_selection,
    evaluate_qubo,
    generate_instance,
    instance_from_json_dict,
    instance_to_json_dict,
    load_instance,
    save_instance,
    to_ising,
)
from .qaoa import (
    LayerRecord,
    MixerOperator,
    QaoaLayer,
    QaoaRunRecord,
    RunConfig,
    approximation_ratio,
    assemble_circuit,
    build_cost_circuit,
    build_mixer_circuit,
    coupling_schedule,
    run_standard_qaoa,
)
from .rng import SplitMix64, Xoshiro256StarStar, spawn
from .simulator import (
    Circuit,
    Gate,
    PauliString,
    StateVector,
    apply_circuit,
    apply_gate,
    apply_pauli_rotation,
    estimate_cost_from_samples,
    expectation_of_cost,
    init_plus_state,
    run_circuit,
    sample_shots,
)

__version__ = "0.1.0"
