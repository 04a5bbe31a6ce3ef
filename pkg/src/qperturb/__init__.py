"""Constraint-preserving random perturbation ensembles of two-qubit states.

Generates randomly perturbed density operators whose chosen expectation
values (trace, energy, entropy) match a baseline state, evaluates distance
and entanglement measures per sample, and provides ensemble statistics with
deterministic, diff-able file outputs.
"""
from .exceptions import (
    InvalidBellCoefficients,
    NonPhysicalResult,
    NotHermitianInput,
    NotPositiveSemidefinite,
    ParseError,
    QPerturbError,
    SolverDiverged,
    SolverFailureRateExceeded,
    ValidationError,
)
from .linalg import (
    EigenDecomposition,
    anticommutator,
    eig_hermitian,
    kron,
    matrix_log_ranged,
    matrix_sqrt_psd,
    partial_trace,
)
from .pauli import (
    BellDiagonalSpec,
    TwoQubitHamiltonian,
    bell_diagonal_sqrt,
    bell_diagonal_state,
    build_hamiltonian,
    pauli_project,
    pauli_reconstruct,
    pure_bell_state,
    random_bell_diagonal,
)
from .perturb import (
    ConstraintSet,
    Energy,
    Entropy,
    Fixed,
    PerturbationConfig,
    PerturbedSample,
    SampledNormal,
    UnitTrace,
    scalar_residual_system,
    apply_constraints,
    constraint_gradient,
    constraint_value,
    generate_samples,
    make_sample_rng,
    recover_eta,
    sample_gamma_epsilon,
    sample_targets,
)
from .measures import (
    MeasureReport,
    chsh_max,
    concurrence,
    energy_expectation,
    entropy,
    fidelity,
    measure_report,
    mutual_information,
    state_distance,
)
from .stats import (
    CorrelationMatrix,
    Histogram,
    analytic_unit_trace_correlation,
    chi_reference,
    histogram_density,
    jacobian_covariance,
    pearson_matrix,
)
from .io import ExperimentEnsemble, load_ensemble, save_ensemble
from .pipeline import (
    BellDiagBaseline,
    PureBellBaseline,
    RunConfig,
    StateFileBaseline,
    compare_to_experiment,
    fit_targets,
    run_cases,
)
from .estimators import PerturbedStateSampler, StateMeasureTransform

__version__ = "0.1.0"

__all__ = [
    "QPerturbError",
    "ValidationError",
    "ParseError",
    "NotHermitianInput",
    "NotPositiveSemidefinite",
    "InvalidBellCoefficients",
    "SolverDiverged",
    "SolverFailureRateExceeded",
    "NonPhysicalResult",
    "EigenDecomposition",
    "eig_hermitian",
    "matrix_sqrt_psd",
    "matrix_log_ranged",
    "anticommutator",
    "kron",
    "partial_trace",
    "BellDiagonalSpec",
    "TwoQubitHamiltonian",
    "pauli_project",
    "pauli_reconstruct",
    "bell_diagonal_state",
    "bell_diagonal_sqrt",
    "random_bell_diagonal",
    "build_hamiltonian",
    "pure_bell_state",
    "PerturbationConfig",
    "ConstraintSet",
    "UnitTrace",
    "Energy",
    "Entropy",
    "Fixed",
    "SampledNormal",
    "PerturbedSample",
    "make_sample_rng",
    "sample_gamma_epsilon",
    "sample_targets",
    "constraint_value",
    "constraint_gradient",
    "apply_constraints",
    "recover_eta",
    "scalar_residual_system",
    "generate_samples",
    "MeasureReport",
    "measure_report",
    "fidelity",
    "state_distance",
    "entropy",
    "mutual_information",
    "concurrence",
    "chsh_max",
    "energy_expectation",
    "Histogram",
    "CorrelationMatrix",
    "histogram_density",
    "pearson_matrix",
    "chi_reference",
    "analytic_unit_trace_correlation",
    "jacobian_covariance",
    "ExperimentEnsemble",
    "load_ensemble",
    "save_ensemble",
    "RunConfig",
    "BellDiagBaseline",
    "PureBellBaseline",
    "StateFileBaseline",
    "run_cases",
    "compare_to_experiment",
    "fit_targets",
    "PerturbedStateSampler",
    "StateMeasureTransform",
]
