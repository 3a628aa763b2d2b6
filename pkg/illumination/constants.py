"""Shared constants for the illumination toolkit."""

# --- Phase-space tolerances ---

# Symmetry of covariance matrices and S·Ω·Sᵀ = Ω checks.
STRUCTURAL_TOL = 1e-12
# sigma + iΩ may dip this far below zero before a state counts as unphysical.
PHYSICAL_TOL = 1e-9
# Symplectic eigenvalues further than this below 1 are a modelling error, not noise.
NONPHYSICAL_TOL = 1e-6
# Occupation n = (ν − 1)/2 below this is treated as a pure mode.
PURE_MODE_TOL = 1e-10

# --- Chernoff minimisation ---

S_GRID_POINTS = 201
S_TOL = 1e-8
BOUNDARY_TOL = 1e-6
# Closed forms and the general normal-mode path must agree to this.
CROSS_CHECK_TOL = 1e-6

# --- Fock oracle ---

TRUNCATION_TOL = 1e-10
CUTOFF_HEADROOM = 5
CUTOFF_STEP = 5
# Cutoff accepted when one escalation step changes q by less than this.
CUTOFF_CONVERGENCE_TOL = 1e-8
# Largest Hilbert-space dimension (d ** n_modes) the oracle will build.
ORACLE_MAX_DIMENSION = 4500
# Population entering a beam splitter with n_a + n_b >= cutoff.
LEAKAGE_TOL = 1e-8
# Eigenvalues at or below this are outside the support when ρ is raised to the power 0.
SUPPORT_FLOOR = 1e-14
# Negative eigenvalue mass that may be clamped to zero.
CLAMP_LIMIT = 1e-8
ORACLE_AGREEMENT_TOL = 1e-6
# Desk-scale guard for the oracle-check subcommand.
ORACLE_MAX_NBAR = 2.0
ORACLE_MAX_NS = 1.0

# --- Perturbative framework ---

SERIES_TOL = 1e-14
SERIES_MAX_TERMS = 200_000
NORMALISATION_TOL = 1e-10
OPTIMIZER_RESTARTS = 20
OPTIMIZER_MAX_ITER = 500
OPTIMIZER_DECREMENT_TOL = 1e-22
STATIONARITY_TOL = 1e-8
DEFAULT_SEED = 20240229
# Largest coefficient deviation optimal-probe accepts.
PROBE_MATCH_TOL = 1e-6

# --- Figure defaults ---

FIGURE_DEFAULTS = {
    "fig2": {"ns": 0.5, "kappa": 0.01, "nbar": (2.0, 200.0),
             "r": tuple(round(0.1 * k, 10) for k in range(10))},
    "fig3a": {"ns": 1.0, "kappa": 0.01, "nbar": (1.0, 5.0), "m": 10,
              "r": tuple(round(0.05 * k, 10) for k in range(21))},
    "fig3b": {"ns": 1.0, "kappa": 0.01, "nbar": (1.0, 5.0), "r": 0.001},
    "fig3c": {"ns": 1.0, "kappa": 0.01, "nbar": (1.0, 5.0), "r": 0.3},
}
# log10 M grid for the copy-count figures.
FIGURE_LOG10_M = (0.0, 4.0, 41)

PROBES = ("coherent", "tmsv")
