"""Dynamical decoupling of open quantum systems by group averaging.

Build bang-bang control cycles from finite unitary groups, compute the
effective (average) Hamiltonians they generate, propagate system-plus-
bath dynamics exactly, and measure how decoherence is suppressed as the
control time step shrinks.
"""

from .operators import (
    DIM_CAP,
    NUMERIC_TOL,
    STRUCT_TOL,
    Operator,
    commutator,
    distance,
    expm_hermitian,
    identity,
    partial_trace_bath,
    tensor,
    tensor_all,
    zero,
)
from .model import (
    BathSpec,
    InteractionSpace,
    SystemBathModel,
    bath_ground_state,
    build_boson_dephasing_model,
    build_spin_bath_model,
    interaction_space,
    interaction_space_of,
    total_hamiltonian,
)
from .groups import (
    CommutantBasis,
    DecouplingGroup,
    DecouplingReport,
    check_decoupling,
    commutant_basis,
    group_from_words,
    minimal_group_search,
    pauli_group,
    pauli_word_operator,
    project_commutant,
    trivial_group,
)
from .sequence import (
    CycleSchedule,
    Segment,
    boundary_pulses,
    schedule_from_group,
    schedule_from_record,
    schedule_to_record,
    symmetrize,
)
from .magnus import (
    AverageHamiltonianSeries,
    average_h0,
    average_h1,
    average_hamiltonian_series,
    toggled_hamiltonian,
    truncation_error,
)
from .evolve import (
    RateEstimate,
    ScalingFit,
    SimulationRun,
    TrajectoryResult,
    coherence_l1,
    cycle_propagator,
    estimate_rates,
    evolve,
    fit_scaling_exponent,
    observable_drift,
    state_fidelity,
)
from .scenarios import (
    PRESETS,
    SCENARIO_NAMES,
    ConfigError,
    ScenarioConfig,
    build_model,
    build_schedule,
    load_config,
    parse_config,
    run_scenario,
    run_sweep,
)

__version__ = "0.1.0"
