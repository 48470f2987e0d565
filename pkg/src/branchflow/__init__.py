"""Reversible-network, ensemble, and Heisenberg-descriptor simulation.

Three mutually consistent pictures of one computation: a single reversible
classical network, an exact-rational ensemble of them with its projector-basis
vector algebra, and a quantum network evolved in the Heisenberg picture. The
analyzer verifies the structural relations between the pictures: per-step
classicality, ensemble correspondence, causal autonomy of descriptor
families, one-way information flow, and robustness under monitoring.
"""
from .classical import (
    BitWord,
    Gate,
    NetworkProgram,
    StepPermutation,
    apply_gate,
    canonicalize_under_subnetwork_permutation,
    cnot,
    compose_step,
    delay,
    info_cone,
    not_,
    program,
    run,
    swap,
    toffoli,
)
from .ensembles import (
    Branch,
    ENumber,
    Ensemble,
    basis_projector,
    branches,
    enumber_product,
    evolve_enumber,
    evolve_multiplicities,
    lift_function,
    mu_enumber,
    reconstruct_projectors_from_algebra,
    retime,
    scalar_product,
    state_enumber,
    tensor,
    unit_enumber,
    zero_enumber,
)
from .errors import (
    BranchflowError,
    ParseError,
    ResourceLimitError,
    TimeTagError,
    ValidationError,
)
from .heisenberg import (
    ConditionalOp,
    Descriptor,
    GateOp,
    HeisenbergHistory,
    HeisenbergNetwork,
    PhaseOp,
    QuantumCircuit,
    UnitaryOp,
    b_hat,
    branch_observable,
    circuit,
    cnot_closed_form,
    conditional_gate_unitary,
    expectation,
    haar_unitary,
    init_network,
    network_from_state,
    projector_word,
    relation_residuals,
    run_heisenberg,
    schrodinger_oracle,
    step,
    subset_projector,
    toffoli_closed_form,
)
from .analyzer import (
    AutonomyReport,
    BranchTrace,
    ClassicalityVerdict,
    CorrespondenceReport,
    InfoPresenceResult,
    branch_history,
    check_autonomy,
    check_correspondence,
    information_presence_test,
    measurement_robustness_check,
    monitored_circuit,
    verify_classical_step,
)
from .documents import CircuitDocument, parse, render
from .runner import RunResult, RunTrace, emit, orchestrate

__version__ = "0.1.0"
