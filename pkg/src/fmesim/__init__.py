"""Simulator for driven-dissipative dynamics engineered through interferometric
measurement and local feedback: builds the feedback master equation from a
declarative setup, solves steady states and dynamics, computes entanglement
diagnostics, and cross-validates against a direct Monte-Carlo simulation of
the coarse-grained measurement-and-feedback cycle."""

__version__ = "0.1.0"

from .fme import (
    FmeModel,
    FmeSetup,
    LoccReport,
    SiteOperator,
    build_model,
    combine_models,
    feedback_table_from_entries,
    locc_check,
    mix_jumps,
    transformed_system_ops,
)
from .liouvillian import (
    Liouvillian,
    SolverError,
    SteadyStateResult,
    build_liouvillian,
    evolve,
    master_equation_rhs,
    spectral_gap,
    steady_state,
)
from .measures import (
    Bipartition,
    concurrence,
    fidelity_to_pure,
    log_negativity,
    odd_even_bipartition,
    purity,
    spin_up_density,
    trace_distance,
)
from .oracle import (
    CoarseStepParams,
    FieldConfig,
    TruncationLeakError,
    ValidationReport,
    coarse_step,
    hermite_amplitudes,
    validate_against_fme,
)
from .protocols import (
    IsingDerived,
    IsingParams,
    TwoQubitParams,
    ising_interferometer,
    ising_model,
    ring_model,
    target_pair_state,
    two_qubit_model,
)
from .qops import (
    DensityMatrix,
    HilbertSpec,
    Operator,
    basis_state,
    embed_local,
    matrix_exp,
    maximally_mixed,
    operator_support,
    partial_trace,
    partial_transpose,
    pure_state,
    qubits,
)

__all__ = [name for name in dir() if not name.startswith("_")]
