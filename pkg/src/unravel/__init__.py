"""Noisy 1D circuit simulation with entanglement-optimal trajectory unravelings."""

from .channels import (
    KrausChannel,
    average_unitarity,
    channel_from_spec,
    choi,
    named_kraus,
    rotate_kraus,
    unitarity,
    validate_tp,
)
from .circuits import (
    brickwork_circuit,
    haar_two_qubit,
    heisenberg_model,
    low_entangling_gate,
    low_entangling_with_local,
)
from .lindblad import LindbladModel, jump_channel_kraus, jump_generator, trotterize
from .mps import (
    MpsState,
    SchmidtCut,
    TruncationReport,
    apply_single_qubit_operator,
    apply_two_qubit_gate,
    entropy_at_cut,
    expectation_mpo,
    new_product_state,
    sample_bitstring,
    schmidt_at_cut,
    to_dense,
    truncate,
)
from .oracle import brute_force_eof, dense_evolve, trace_distance, tv_distance
from .trajectory import (
    CircuitDescription,
    ErrorEstimate,
    NoiseLayer,
    TrajectoryRecord,
    TruncateLayer,
    UnitaryLayer,
    concentration_weighted_error,
    enumerate_kraus_tree,
    estimate_error,
    estimate_observable,
    run_trajectories,
    run_trajectory,
    sample_outputs,
)
from .unraveler import (
    EffectiveTwoQubitState,
    Strategy,
    effective_two_qubit,
    least_unitary_kraus,
    locally_optimal_kraus,
    unravel_channel,
)
from .wootters import (
    OptimalDecomposition,
    concurrence,
    decomposition_to_eigen_unitary,
    entanglement_of_formation,
    optimal_decomposition,
    spin_flip,
    takagi_autonne,
)

__version__ = "0.1.0"
