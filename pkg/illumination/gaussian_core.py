"""Gaussian states in phase space and the symplectic maps acting on them.

Conventions used throughout the package:

* quadratures are interleaved, ``(x1, p1, x2, p2, ...)``;
* ``a = (x + i p) / 2``, so the vacuum covariance is the identity and a
  coherent state of mean photon number ``Ns`` sits at ``d = (2 sqrt(Ns), 0)``;
* ``Ω = ⊕_k [[0, 1], [-1, 0]]``.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag, eigh, schur

from .constants import (
    NONPHYSICAL_TOL,
    PHYSICAL_TOL,
    PURE_MODE_TOL,
    STRUCTURAL_TOL,
)
from .errors import NonPhysicalStateError, ParameterError

logger = logging.getLogger(__name__)

_J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
_Z2 = np.diag([1.0, -1.0])


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class GaussianState:
    """Displacement vector and covariance matrix of an n-mode Gaussian state."""

    d: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float).reshape(-1)
        sigma = np.asarray(self.sigma, dtype=float)
        if d.size == 0 or d.size % 2:
            raise ParameterError(f"Displacement length must be a positive even number, got {d.size}.")
        if sigma.shape != (d.size, d.size):
            raise ParameterError(
                f"Covariance shape must be {(d.size, d.size)}, got {sigma.shape}."
            )
        scale = max(1.0, float(np.max(np.abs(sigma))))
        if np.max(np.abs(sigma - sigma.T)) > STRUCTURAL_TOL * scale:
            raise ParameterError("Covariance matrix must be symmetric.")
        object.__setattr__(self, "d", _frozen(d))
        object.__setattr__(self, "sigma", _frozen(0.5 * (sigma + sigma.T)))

    @property
    def n_modes(self):
        return self.d.size // 2


@dataclass(frozen=True)
class SymplecticOp:
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] % 2:
            raise ParameterError(f"Symplectic matrix must be square of even size, got {matrix.shape}.")
        if not is_symplectic(matrix):
            raise ParameterError("Matrix does not preserve the symplectic form.")
        object.__setattr__(self, "matrix", _frozen(matrix))

    @property
    def n_modes(self):
        return self.matrix.shape[0] // 2


# --- Symplectic structure ---

def symplectic_form(n_modes):
    if n_modes < 1:
        raise ParameterError(f"n_modes must be at least 1, got {n_modes}.")
    return np.kron(np.eye(n_modes), _J2)


def is_symplectic(matrix, atol=STRUCTURAL_TOL):
    matrix = np.asarray(matrix, dtype=float)
    omega = symplectic_form(matrix.shape[0] // 2)
    return bool(np.max(np.abs(matrix @ omega @ matrix.T - omega)) < atol)


def symplectic_inverse(matrix):
    """Inverse of a symplectic matrix, ``Ω Sᵀ Ωᵀ``."""
    matrix = np.asarray(matrix, dtype=float)
    omega = symplectic_form(matrix.shape[0] // 2)
    return omega @ matrix.T @ omega.T


def compose(*ops):
    """Product of symplectic operations; the rightmost acts first."""
    if not ops:
        raise ParameterError("compose needs at least one operation.")
    matrix = ops[0].matrix
    for op in ops[1:]:
        if op.n_modes != ops[0].n_modes:
            raise ParameterError("Composed operations must act on the same number of modes.")
        matrix = matrix @ op.matrix
    return SymplecticOp(matrix)


# --- State constructors ---

def vacuum_state(n_modes):
    if not isinstance(n_modes, (int, np.integer)) or n_modes < 1:
        raise ParameterError(f"n_modes must be a positive integer, got {n_modes!r}.")
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes))


def thermal_state(nbar):
    if nbar < 0:
        raise ParameterError(f"nbar must be non-negative, got {nbar}.")
    return GaussianState(np.zeros(2), (2.0 * nbar + 1.0) * np.eye(2))


def coherent_state(ns):
    """Coherent state with real amplitude sqrt(ns)."""
    if ns < 0:
        raise ParameterError(f"Ns must be non-negative, got {ns}.")
    return GaussianState(np.array([2.0 * np.sqrt(ns), 0.0]), np.eye(2))


def tmsv_state(ns):
    """Two-mode squeezed vacuum with ns mean photons per mode, ordered (signal, idler)."""
    if ns < 0:
        raise ParameterError(f"Ns must be non-negative, got {ns}.")
    diagonal = (2.0 * ns + 1.0) * np.eye(2)
    correlation = 2.0 * np.sqrt(ns * (1.0 + ns)) * _Z2
    sigma = np.block([[diagonal, correlation], [correlation, diagonal]])
    return GaussianState(np.zeros(4), sigma)


def tensor_product(*states):
    if not states:
        raise ParameterError("tensor_product needs at least one state.")
    return GaussianState(
        np.concatenate([state.d for state in states]),
        block_diag(*[state.sigma for state in states]),
    )


# --- Operations ---

def beamsplitter_symplectic(transmissivity, mode_pair, n_modes):
    """Beam splitter on ``mode_pair = (i, j)`` with ``i' = √T i + √(1−T) j``.

    The block on the pair is ``[[√T I, √(1−T) I], [−√(1−T) I, √T I]]``; every
    other mode is left alone.
    """
    if not 0.0 <= transmissivity <= 1.0:
        raise ParameterError(f"Transmissivity must lie in [0, 1], got {transmissivity}.")
    i, j = mode_pair
    if i == j:
        raise ParameterError(f"Beam splitter needs two distinct modes, got {mode_pair}.")
    if not (0 <= i < n_modes and 0 <= j < n_modes):
        raise ParameterError(f"Modes {mode_pair} out of range for {n_modes} modes.")

    c = np.sqrt(transmissivity)
    s = np.sqrt(1.0 - transmissivity)
    matrix = np.eye(2 * n_modes)
    rows_i = slice(2 * i, 2 * i + 2)
    rows_j = slice(2 * j, 2 * j + 2)
    matrix[rows_i, rows_i] = c * np.eye(2)
    matrix[rows_i, rows_j] = s * np.eye(2)
    matrix[rows_j, rows_i] = -s * np.eye(2)
    matrix[rows_j, rows_j] = c * np.eye(2)
    return SymplecticOp(matrix)


def apply_symplectic(state, op):
    if op.n_modes != state.n_modes:
        raise ParameterError(
            f"Operation acts on {op.n_modes} modes but the state has {state.n_modes}."
        )
    matrix = op.matrix
    return GaussianState(matrix @ state.d, matrix @ state.sigma @ matrix.T)


def _quadrature_indices(modes):
    return np.array([[2 * m, 2 * m + 1] for m in modes]).reshape(-1)


def partial_trace(state, keep):
    """Marginal on the modes in ``keep``, in the order given."""
    keep = list(keep)
    if not keep:
        raise ParameterError("keep must name at least one mode.")
    if len(set(keep)) != len(keep):
        raise ParameterError(f"keep must not repeat modes, got {keep}.")
    if any(not 0 <= m < state.n_modes for m in keep):
        raise ParameterError(f"keep {keep} out of range for {state.n_modes} modes.")
    idx = _quadrature_indices(keep)
    return GaussianState(state.d[idx], state.sigma[np.ix_(idx, idx)])


def mean_photon_number(state, mode):
    idx = _quadrature_indices([mode])
    block = state.sigma[np.ix_(idx, idx)]
    return float((np.trace(block) + state.d[idx] @ state.d[idx]) / 4.0 - 0.5)


# --- Physicality and normal modes ---

def validate_physical(state):
    omega = symplectic_form(state.n_modes)
    lowest = np.linalg.eigvalsh(state.sigma + 1j * omega)[0]
    if lowest < -PHYSICAL_TOL:
        raise NonPhysicalStateError(
            f"sigma + iΩ must be positive semidefinite, got eigenvalue {lowest:.3e}."
        )
    return state


def _settle_eigenvalues(values):
    lowest = float(np.min(values))
    if lowest < 1.0 - NONPHYSICAL_TOL:
        raise NonPhysicalStateError(
            f"Symplectic eigenvalues must be at least 1, got {lowest:.12g}."
        )
    if lowest < 1.0 - PHYSICAL_TOL:
        logger.debug("Raising symplectic eigenvalue %.12g to 1 (numerical noise).", lowest)
    return np.maximum(values, 1.0)


def symplectic_eigenvalues(sigma):
    """Sorted symplectic eigenvalues, from the spectrum of ``iΩσ``."""
    sigma = np.asarray(sigma, dtype=float)
    omega = symplectic_form(sigma.shape[0] // 2)
    spectrum = np.sort(np.abs(np.linalg.eigvals(1j * omega @ sigma)))
    return _settle_eigenvalues(spectrum[::2])


def williamson(sigma):
    """Williamson normal form ``sigma = S diag(ν1, ν1, ..., νn, νn) Sᵀ``.

    Returns the symplectic eigenvalues ``ν`` (in the order of the normal
    modes, not sorted) and the symplectic matrix ``S``.  Eigenvalues within
    ``PURE_MODE_TOL`` of 1 are set to exactly 1 so that support projectors
    of pure modes come out exact.
    """
    sigma = np.asarray(sigma, dtype=float)
    n_modes = sigma.shape[0] // 2
    omega = symplectic_form(n_modes)

    vals, vecs = eigh(sigma)
    if vals[0] <= 0.0:
        raise NonPhysicalStateError(
            f"Covariance must be positive definite, got eigenvalue {vals[0]:.3e}."
        )
    root = (vecs * np.sqrt(vals)) @ vecs.T
    inv_root = (vecs / np.sqrt(vals)) @ vecs.T

    form, basis = schur(inv_root @ omega @ inv_root, output="real")
    freqs = np.empty(n_modes)
    for k in range(n_modes):
        if form[2 * k, 2 * k + 1] < 0.0:
            basis[:, [2 * k, 2 * k + 1]] = basis[:, [2 * k + 1, 2 * k]]
            form[[2 * k, 2 * k + 1], :] = form[[2 * k + 1, 2 * k], :]
            form[:, [2 * k, 2 * k + 1]] = form[:, [2 * k + 1, 2 * k]]
        freqs[k] = 0.5 * (form[2 * k, 2 * k + 1] - form[2 * k + 1, 2 * k])

    nu = 1.0 / freqs
    transform = root @ basis @ np.diag(np.repeat(1.0 / np.sqrt(nu), 2))
    nu = _settle_eigenvalues(nu)
    nu[nu - 1.0 < 2.0 * PURE_MODE_TOL] = 1.0
    return nu, transform
