"""Hypothesis states for an absorbing target hidden in thermal background.

The target is a primary beam splitter (reflectivity ``kappa``) sitting behind
two auxiliary beam splitters of reflectivity ``r`` that leak light into
vacuum device modes.  Under H0 the detector sees bare thermal light; under H1
it sees the reflected share of the probe mixed with the attenuated background.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .constants import NORMALISATION_TOL
from .errors import ParameterError
from .gaussian_core import (
    GaussianState,
    apply_symplectic,
    beamsplitter_symplectic,
    coherent_state,
    compose,
    partial_trace,
    tensor_product,
    thermal_state,
    tmsv_state,
    vacuum_state,
)

logger = logging.getLogger(__name__)

_Z2 = np.diag([1.0, -1.0])

# Mode layout of the full pipeline: thermal, two device modes, then the probe modes.
THERMAL_MODE = 0
DEVICE_MODES = (1, 2)
PROBE_OFFSET = 3


def _check_unit_interval(name, value):
    if not np.isfinite(value) or not 0.0 <= value <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {value}.")


@dataclass(frozen=True)
class TargetParams:
    """Absorption ``r``, primary reflectivity ``kappa`` and background ``nbar``."""

    r: float
    kappa: float
    nbar: float

    def __post_init__(self):
        _check_unit_interval("r", self.r)
        _check_unit_interval("kappa", self.kappa)
        if not np.isfinite(self.nbar) or self.nbar < 0.0:
            raise ParameterError(f"nbar must be non-negative, got {self.nbar}.")
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "kappa", float(self.kappa))
        object.__setattr__(self, "nbar", float(self.nbar))

    @property
    def t(self):
        return 1.0 - self.r

    @property
    def tau(self):
        return 1.0 - self.kappa

    @property
    def effective_reflectivity(self):
        return self.t * self.kappa

    @property
    def effective_transmissivity(self):
        return self.t * self.tau


class ProbeKind(str, Enum):
    COHERENT = "coherent"
    TMSV = "tmsv"
    FOCK_SINGLE = "fock_single"
    FOCK_TWO = "fock_two"


def _normalised_coeffs(coeffs):
    coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
    if coeffs.size == 0 or not np.all(np.isfinite(coeffs)):
        raise ParameterError("coeffs must be a non-empty list of finite numbers.")
    norm = float(np.sum(coeffs ** 2))
    if abs(norm - 1.0) > NORMALISATION_TOL:
        raise ParameterError(f"coeffs must satisfy sum |C_n|^2 = 1, got {norm:.12g}.")
    return tuple(float(c) for c in coeffs)


@dataclass(frozen=True)
class ProbeSpec:
    """Probe choice: coherent, TMSV, or a Fock superposition with real coefficients.

    ``fock_two`` coefficients describe ``Σ C_n |n, n>`` on (signal, idler).
    """

    kind: ProbeKind
    ns: float
    coeffs: tuple = field(default=None)

    @classmethod
    def coherent(cls, ns):
        return cls(ProbeKind.COHERENT, ns)

    @classmethod
    def tmsv(cls, ns):
        return cls(ProbeKind.TMSV, ns)

    @classmethod
    def fock_single(cls, coeffs):
        coeffs = _normalised_coeffs(coeffs)
        return cls(ProbeKind.FOCK_SINGLE, _energy(coeffs), coeffs)

    @classmethod
    def fock_two(cls, coeffs):
        coeffs = _normalised_coeffs(coeffs)
        return cls(ProbeKind.FOCK_TWO, _energy(coeffs), coeffs)

    @classmethod
    def from_name(cls, name, ns):
        kind = ProbeKind(name)
        if kind not in (ProbeKind.COHERENT, ProbeKind.TMSV):
            raise ParameterError(f"probe must be 'coherent' or 'tmsv', got {name!r}.")
        return cls(kind, ns)

    def __post_init__(self):
        object.__setattr__(self, "kind", ProbeKind(self.kind))
        if not np.isfinite(self.ns) or self.ns < 0.0:
            raise ParameterError(f"Ns must be non-negative, got {self.ns}.")
        object.__setattr__(self, "ns", float(self.ns))
        if self.is_gaussian and self.coeffs is not None:
            raise ParameterError(f"{self.kind.value} probes take no coefficients.")
        if not self.is_gaussian:
            coeffs = _normalised_coeffs(self.coeffs)
            if abs(_energy(coeffs) - self.ns) > NORMALISATION_TOL * max(1.0, self.ns):
                raise ParameterError(
                    f"Ns must equal sum n |C_n|^2 = {_energy(coeffs):.12g}, got {self.ns}."
                )
            object.__setattr__(self, "coeffs", coeffs)

    @property
    def is_gaussian(self):
        return self.kind in (ProbeKind.COHERENT, ProbeKind.TMSV)

    @property
    def n_modes(self):
        return 1 if self.kind in (ProbeKind.COHERENT, ProbeKind.FOCK_SINGLE) else 2

    @property
    def mean_photon_number(self):
        return self.ns


def _energy(coeffs):
    coeffs = np.asarray(coeffs)
    return float(np.sum(np.arange(coeffs.size) * coeffs ** 2))


@dataclass(frozen=True)
class HypothesisPair:
    rho0: GaussianState
    rho1: GaussianState
    probe: ProbeSpec
    params: TargetParams
    mode_labels: tuple

    def __post_init__(self):
        if self.rho0.n_modes != self.rho1.n_modes:
            raise ParameterError(
                f"rho0 and rho1 must have equal n_modes, got {self.rho0.n_modes} and {self.rho1.n_modes}."
            )
        if len(self.mode_labels) != self.rho0.n_modes:
            raise ParameterError("mode_labels must name every surviving mode.")


def _labels(n_modes):
    return ("return",) if n_modes == 1 else ("return", "idler")


# --- Closed-form moments ---

def rho_pair_coherent_closed(params, ns):
    probe = ProbeSpec.coherent(ns)
    rho0 = thermal_state(params.nbar)
    d1 = np.array([2.0 * np.sqrt(ns * params.kappa * params.t), 0.0])
    sigma1 = (2.0 * params.nbar * params.tau * params.t + 1.0) * np.eye(2)
    return HypothesisPair(rho0, GaussianState(d1, sigma1), probe, params, _labels(1))


def rho_pair_tmsv_closed(params, ns):
    probe = ProbeSpec.tmsv(ns)
    t = params.t
    s = 2.0 * ns + 1.0
    b0 = 2.0 * params.nbar + 1.0
    b = 2.0 * params.nbar * t * params.tau + 1.0
    a = 2.0 * params.kappa * ns * t + b
    c_q = 2.0 * np.sqrt(t * ns * (ns + 1.0))

    sigma0 = np.diag([b0, b0, s, s])
    correlation = np.sqrt(params.kappa) * c_q * _Z2
    sigma1 = np.block([[a * np.eye(2), correlation], [correlation, s * np.eye(2)]])
    return HypothesisPair(
        GaussianState(np.zeros(4), sigma0),
        GaussianState(np.zeros(4), sigma1),
        probe,
        params,
        _labels(2),
    )


# --- Symplectic pipeline ---

def probe_gaussian_state(probe):
    if probe.kind is ProbeKind.COHERENT:
        return coherent_state(probe.ns)
    if probe.kind is ProbeKind.TMSV:
        return tmsv_state(probe.ns)
    raise ParameterError(f"probe must be Gaussian, got {probe.kind.value}.")


def _check_signal_mode(probe_state, signal_mode):
    if not 0 <= signal_mode < probe_state.n_modes:
        raise ParameterError(
            f"signal_mode must index one of the {probe_state.n_modes} probe modes, got {signal_mode}."
        )


def auxiliary_stage(probe_state, signal_mode, params):
    """Thermal, device and probe modes after both auxiliary beam splitters.

    Nothing is traced out, so total photon number is conserved.
    """
    _check_signal_mode(probe_state, signal_mode)
    joint = tensor_product(thermal_state(params.nbar), vacuum_state(2), probe_state)
    signal = PROBE_OFFSET + signal_mode
    s_a = compose(
        beamsplitter_symplectic(params.t, (THERMAL_MODE, DEVICE_MODES[0]), joint.n_modes),
        beamsplitter_symplectic(params.t, (signal, DEVICE_MODES[1]), joint.n_modes),
    )
    return apply_symplectic(joint, s_a)


def rho1_pipeline(probe_state, signal_mode, params):
    """Detector-side state under H1, propagated mode by mode.

    Returns the return mode followed by the untouched probe modes (idlers)
    in their original order.
    """
    mixed = auxiliary_stage(probe_state, signal_mode, params)
    optical = [THERMAL_MODE] + [PROBE_OFFSET + k for k in range(probe_state.n_modes)]
    reduced = partial_trace(mixed, optical)

    # thermal'' = √τ thermal' + √κ signal' reaches the detector
    signal = 1 + signal_mode
    s_p = beamsplitter_symplectic(params.tau, (0, signal), reduced.n_modes)
    reflected = apply_symplectic(reduced, s_p)
    idlers = [1 + k for k in range(probe_state.n_modes) if k != signal_mode]
    return partial_trace(reflected, [0] + idlers)


def rho_pair_pipeline(probe, params, signal_mode=0):
    probe_state = probe_gaussian_state(probe)
    rho1 = rho1_pipeline(probe_state, signal_mode, params)
    idlers = [k for k in range(probe_state.n_modes) if k != signal_mode]
    rho0 = thermal_state(params.nbar)
    if idlers:
        rho0 = tensor_product(rho0, partial_trace(probe_state, idlers))
    logger.debug("Pipeline pair built for %s probe, %s", probe.kind.value, params)
    return HypothesisPair(rho0, rho1, probe, params, _labels(rho1.n_modes))


def transmission_absorption_matrices(params):
    """Mode-transformation matrices ``T = √t U`` and ``A = √r U``."""
    kappa, tau = params.kappa, params.tau
    unitary = np.array([[np.sqrt(kappa), np.sqrt(tau)], [np.sqrt(tau), -np.sqrt(kappa)]])
    return np.sqrt(params.t) * unitary, np.sqrt(params.r) * unitary
