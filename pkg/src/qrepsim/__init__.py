"""Density-matrix simulator for entanglement distribution, purification,
swapping and nested repeater protocols over configurable noise."""

from .states import (
    Branch,
    DensityMatrix,
    GateMatrix,
    KrausChannel,
    MeasurementRecord,
    PureState,
    apply_channel,
    apply_unitary,
    fidelity,
    ground_state,
    maximally_mixed,
    measure,
    measure_branches,
    partial_trace,
    project_and_reduce,
    pure_density,
    tensor,
)
from .gates import (
    CNOT,
    H,
    IDENTITY_1Q,
    SWAP,
    X,
    Y,
    Z,
    BellKind,
    bell_measure,
    bell_projector_weights,
    bell_state,
    bell_vector,
    phase_gate,
    rx_gate,
    standard_gate,
)
from .noise import (
    ChannelModel,
    NoiseParams,
    apply_noisy_gate,
    attach_fresh_qubits,
    attempt_generation,
    dephased_bell,
    dephasing_channel,
    depolarizing_channel,
    distribute_pair,
    identity_channel,
    prepare_bell_pair,
    transmit,
    werner,
)
from .protocols import (
    PurifyResult,
    RecurrenceResult,
    SwapResult,
    entanglement_swap,
    entanglement_swap_sampled,
    extract_key_bit,
    purify_bennett,
    purify_deutsch,
    purify_multi,
    purify_multi_sampled,
    purify_recurrence,
    superdense_decode,
    teleport,
)
from .repeater import (
    PaperCircuitResult,
    RepeaterConfig,
    RepeaterReport,
    RoundStats,
    run_paper_circuit,
    run_repeater,
)
from .harness import (
    CSV_HEADER,
    ExperimentSpec,
    ResultRow,
    emit,
    load_spec,
    parse_rows_csv,
    run_experiment,
)
from .rng import spawn_rng

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "DensityMatrix",
    "GateMatrix",
    "KrausChannel",
    "MeasurementRecord",
    "PureState",
    "apply_channel",
    "apply_unitary",
    "fidelity",
    "ground_state",
    "maximally_mixed",
    "measure",
    "measure_branches",
    "partial_trace",
    "project_and_reduce",
    "pure_density",
    "tensor",
    "CNOT",
    "H",
    "IDENTITY_1Q",
    "SWAP",
    "X",
    "Y",
    "Z",
    "BellKind",
    "bell_measure",
    "bell_projector_weights",
    "bell_state",
    "bell_vector",
    "phase_gate",
    "rx_gate",
    "standard_gate",
    "ChannelModel",
    "NoiseParams",
    "apply_noisy_gate",
    "attach_fresh_qubits",
    "attempt_generation",
    "dephased_bell",
    "dephasing_channel",
    "depolarizing_channel",
    "distribute_pair",
    "identity_channel",
    "prepare_bell_pair",
    "transmit",
    "werner",
    "PurifyResult",
    "RecurrenceResult",
    "SwapResult",
    "entanglement_swap",
    "entanglement_swap_sampled",
    "extract_key_bit",
    "purify_bennett",
    "purify_deutsch",
    "purify_multi",
    "purify_multi_sampled",
    "purify_recurrence",
    "superdense_decode",
    "teleport",
    "PaperCircuitResult",
    "RepeaterConfig",
    "RepeaterReport",
    "RoundStats",
    "run_paper_circuit",
    "run_repeater",
    "CSV_HEADER",
    "ExperimentSpec",
    "ResultRow",
    "emit",
    "load_spec",
    "parse_rows_csv",
    "run_experiment",
    "spawn_rng",
]
