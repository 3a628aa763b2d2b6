"""Quantum illumination of an absorbing target.

Gaussian phase-space models, Chernoff bounds, a brute-force Fock-space
oracle and the perturbative probe optimisers, split by concern.  Run the
command-line front end with ``python -m illumination``.
"""

from .constants import (
    FIGURE_DEFAULTS,
    FIGURE_LOG10_M,
    PROBES,
)
from .errors import (
    IlluminationError,
    ParameterError,
    NonPhysicalStateError,
    TruncationError,
    OracleBudgetError,
    ConvergenceError,
    ChernoffEvaluationError,
)
from .io_utils import load_json, save_text, table_frame, write_table, write_metadata
from .gaussian_core import (
    GaussianState,
    SymplecticOp,
    symplectic_form,
    is_symplectic,
    symplectic_inverse,
    compose,
    vacuum_state,
    thermal_state,
    coherent_state,
    tmsv_state,
    tensor_product,
    beamsplitter_symplectic,
    apply_symplectic,
    partial_trace,
    mean_photon_number,
    validate_physical,
    symplectic_eigenvalues,
    williamson,
)
from .target_model import (
    TargetParams,
    ProbeKind,
    ProbeSpec,
    HypothesisPair,
    rho_pair_coherent_closed,
    rho_pair_tmsv_closed,
    probe_gaussian_state,
    auxiliary_stage,
    rho1_pipeline,
    rho_pair_pipeline,
    transmission_absorption_matrices,
)
from .chernoff_engine import (
    ChernoffResult,
    AdvantageResult,
    g_func,
    lambda_func,
    q_s_coherent,
    tmsv_normal_modes,
    q_s_tmsv,
    q_s_general,
    minimize_s,
    chernoff_bound,
    m_copy_error_bound,
    m_copy_curve,
    quantum_advantage,
    limit_low_loss_cs,
    limit_low_loss_tmsv,
    limit_full_absorption,
)
from .fock_oracle import (
    FockDensityMatrix,
    OracleReport,
    choose_cutoff,
    thermal_populations,
    thermal_dm,
    coherent_amplitudes,
    tmsv_amplitudes,
    coherent_dm,
    tmsv_vector,
    probe_dm,
    null_hypothesis_dm,
    bs_unitary,
    channel_rho1,
    quadrature_moments,
    s_overlap,
    chernoff_oracle,
    oracle_chernoff_bound,
)
from .probe_optimizer import (
    PerturbativeBound,
    ProbeOptimum,
    PerturbationCertificate,
    zeta,
    objective_two,
    xi_single,
    xi_two,
    lagrange_residual,
    random_constrained_coeffs,
    optimize_single,
    optimize_two,
    perturbation_operators,
    certify_perturbations,
)
from .sweeps import SweepConfig, FigureSpec, parse_grid, run_sweep, figure_rows

__all__ = [
    # constants
    "FIGURE_DEFAULTS", "FIGURE_LOG10_M", "PROBES",
    # errors
    "IlluminationError", "ParameterError", "NonPhysicalStateError", "TruncationError",
    "OracleBudgetError", "ConvergenceError", "ChernoffEvaluationError",
    # io
    "load_json", "save_text", "table_frame", "write_table", "write_metadata",
    # gaussian core
    "GaussianState", "SymplecticOp", "symplectic_form", "is_symplectic",
    "symplectic_inverse", "compose", "vacuum_state", "thermal_state",
    "coherent_state", "tmsv_state", "tensor_product", "beamsplitter_symplectic",
    "apply_symplectic", "partial_trace", "mean_photon_number", "validate_physical",
    "symplectic_eigenvalues", "williamson",
    # target model
    "TargetParams", "ProbeKind", "ProbeSpec", "HypothesisPair",
    "rho_pair_coherent_closed", "rho_pair_tmsv_closed", "probe_gaussian_state",
    "auxiliary_stage", "rho1_pipeline", "rho_pair_pipeline",
    "transmission_absorption_matrices",
    # chernoff engine
    "ChernoffResult", "AdvantageResult", "g_func", "lambda_func", "q_s_coherent",
    "tmsv_normal_modes", "q_s_tmsv", "q_s_general", "minimize_s", "chernoff_bound",
    "m_copy_error_bound", "m_copy_curve", "quantum_advantage",
    "limit_low_loss_cs", "limit_low_loss_tmsv", "limit_full_absorption",
    # fock oracle
    "FockDensityMatrix", "OracleReport", "choose_cutoff", "thermal_populations",
    "thermal_dm", "coherent_amplitudes", "tmsv_amplitudes", "coherent_dm",
    "tmsv_vector", "probe_dm", "null_hypothesis_dm", "bs_unitary", "channel_rho1",
    "quadrature_moments", "s_overlap", "chernoff_oracle", "oracle_chernoff_bound",
    # probe optimizer
    "PerturbativeBound", "ProbeOptimum", "PerturbationCertificate", "zeta",
    "objective_two", "xi_single", "xi_two", "lagrange_residual",
    "random_constrained_coeffs", "optimize_single", "optimize_two",
    "perturbation_operators", "certify_perturbations",
    # sweeps
    "SweepConfig", "FigureSpec", "parse_grid", "run_sweep", "figure_rows",
]
