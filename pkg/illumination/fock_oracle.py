"""Brute-force Fock-space model of the illumination experiment.

Every state is a dense density matrix on ``cutoff`` levels per mode and every
beam splitter is the exponential of its truncated generator, so nothing here
shares code with the phase-space path.  Matrices are ordered return mode
first, idler second (index ``i * cutoff + a``).

Beam splitters conserve total photon number, so the unitary is built block
by block over that number and channels are applied one photon-number shift
at a time instead of through the full two-mode unitary.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh, expm
from scipy.sparse import csr_matrix, diags, identity, kron
from scipy.sparse.csgraph import connected_components
from scipy.special import gammaln

from .chernoff_engine import minimize_s
from .constants import (
    CLAMP_LIMIT,
    CUTOFF_CONVERGENCE_TOL,
    CUTOFF_HEADROOM,
    CUTOFF_STEP,
    LEAKAGE_TOL,
    ORACLE_MAX_DIMENSION,
    STRUCTURAL_TOL,
    SUPPORT_FLOOR,
    TRUNCATION_TOL,
)
from .errors import (
    NonPhysicalStateError,
    OracleBudgetError,
    ParameterError,
    TruncationError,
)
from .target_model import ProbeKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FockDensityMatrix:
    """Truncated density matrix on ``n_modes`` modes of ``cutoff`` levels each.

    ``leakage`` is the population that entered a beam splitter with more
    photons than the truncation can hold; it is zero for prepared states.
    """

    cutoff: int
    n_modes: int
    matrix: np.ndarray
    trace_deficit: float
    leakage: float = 0.0

    def __post_init__(self):
        if self.cutoff < 1 or self.n_modes < 1:
            raise ParameterError(
                f"cutoff and n_modes must be positive, got {self.cutoff} and {self.n_modes}."
            )
        dim = self.cutoff ** self.n_modes
        matrix = np.array(self.matrix)
        if matrix.shape != (dim, dim):
            raise ParameterError(f"matrix must be {dim}x{dim}, got {matrix.shape}.")
        if np.max(np.abs(matrix - matrix.conj().T)) > STRUCTURAL_TOL:
            raise NonPhysicalStateError("Density matrix must be Hermitian.")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def trace(self):
        return float(np.real(np.trace(self.matrix)))

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def as_tensor(self):
        """``(return, rest, return, rest)`` view; ``rest`` is 1 for single-mode states."""
        rest = self.cutoff ** (self.n_modes - 1)
        return self.matrix.reshape(self.cutoff, rest, self.cutoff, rest)


def _from_tensor(tensor, cutoff, n_modes, leakage=0.0):
    dim = cutoff ** n_modes
    matrix = tensor.reshape(dim, dim)
    matrix = 0.5 * (matrix + matrix.conj().T)
    deficit = 1.0 - float(np.real(np.trace(matrix)))
    return FockDensityMatrix(cutoff, n_modes, matrix, deficit, leakage)


def _check_cutoff(cutoff):
    if isinstance(cutoff, bool) or not isinstance(cutoff, (int, np.integer)) or cutoff < 1:
        raise ParameterError(f"cutoff must be a positive integer, got {cutoff!r}.")
    return int(cutoff)


def _check_deficit(name, deficit, tolerance):
    if tolerance is not None and deficit > tolerance:
        raise TruncationError(
            f"{name} truncation deficit must be at most {tolerance:g}, got {deficit:.3e}."
        )


# --- Cutoff rule ---

def _geometric_length(mean, tolerance):
    if mean <= 0.0:
        return 1
    ratio = mean / (1.0 + mean)
    return int(math.floor(math.log(tolerance) / math.log(ratio))) + 1


def choose_cutoff(nbar, ns, tolerance=TRUNCATION_TOL, headroom=CUTOFF_HEADROOM):
    """Smallest d with both geometric tails ``(x/(1+x))^d`` below ``tolerance``, plus headroom."""
    if nbar < 0.0 or ns < 0.0:
        raise ParameterError(f"nbar and Ns must be non-negative, got {nbar} and {ns}.")
    return max(_geometric_length(nbar, tolerance), _geometric_length(ns, tolerance)) + headroom


# --- States ---

def thermal_populations(nbar, count):
    """``λ_m = n̄^m / (1+n̄)^(m+1)`` for m < count."""
    if nbar < 0.0:
        raise ParameterError(f"nbar must be non-negative, got {nbar}.")
    m = np.arange(count, dtype=float)
    if nbar == 0.0:
        return (m == 0).astype(float)
    return np.exp(m * math.log(nbar / (1.0 + nbar)) - math.log1p(nbar))


def thermal_dm(nbar, cutoff, tolerance=None):
    cutoff = _check_cutoff(cutoff)
    pops = thermal_populations(nbar, cutoff)
    deficit = (nbar / (1.0 + nbar)) ** cutoff
    _check_deficit("thermal", deficit, tolerance)
    return FockDensityMatrix(cutoff, 1, np.diag(pops), deficit)


def coherent_amplitudes(ns, cutoff):
    """Poisson amplitudes ``e^(−Ns/2) Ns^(n/2) / √(n!)``."""
    if ns < 0.0:
        raise ParameterError(f"Ns must be non-negative, got {ns}.")
    n = np.arange(_check_cutoff(cutoff), dtype=float)
    if ns == 0.0:
        return (n == 0).astype(float)
    return np.exp(-0.5 * ns + 0.5 * n * math.log(ns) - 0.5 * gammaln(n + 1.0))


def tmsv_amplitudes(ns, cutoff):
    """Schmidt coefficients ``√(Ns^n / (1+Ns)^(n+1))``."""
    if ns < 0.0:
        raise ParameterError(f"Ns must be non-negative, got {ns}.")
    n = np.arange(_check_cutoff(cutoff), dtype=float)
    if ns == 0.0:
        return (n == 0).astype(float)
    return np.exp(0.5 * n * math.log(ns / (1.0 + ns)) - 0.5 * math.log1p(ns))


def _pure_dm(vector, cutoff, n_modes, tolerance=None):
    deficit = 1.0 - float(np.sum(np.abs(vector) ** 2))
    _check_deficit("probe", deficit, tolerance)
    return FockDensityMatrix(cutoff, n_modes, np.outer(vector, vector.conj()), deficit)


def coherent_dm(ns, cutoff, tolerance=None):
    return _pure_dm(coherent_amplitudes(ns, cutoff), cutoff, 1, tolerance)


def _diagonal_pair_vector(coeffs, cutoff):
    vector = np.zeros(cutoff * cutoff, dtype=np.asarray(coeffs).dtype)
    n = np.arange(len(coeffs))
    vector[n * cutoff + n] = coeffs
    return vector


def tmsv_vector(ns, cutoff):
    """TMSV state vector ``Σ C_n |n, n>`` on (signal, idler)."""
    return _diagonal_pair_vector(tmsv_amplitudes(ns, cutoff), cutoff)


def _padded(coeffs, cutoff):
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size > cutoff and np.any(coeffs[cutoff:] != 0.0):
        raise TruncationError(
            f"cutoff must cover every nonzero coefficient, got {cutoff} for {coeffs.size} coefficients."
        )
    out = np.zeros(cutoff)
    out[: min(cutoff, coeffs.size)] = coeffs[:cutoff]
    return out


def probe_dm(probe, cutoff, tolerance=None):
    cutoff = _check_cutoff(cutoff)
    if probe.kind is ProbeKind.COHERENT:
        return coherent_dm(probe.ns, cutoff, tolerance)
    if probe.kind is ProbeKind.TMSV:
        return _pure_dm(tmsv_vector(probe.ns, cutoff), cutoff, 2, tolerance)
    if probe.kind is ProbeKind.FOCK_SINGLE:
        return _pure_dm(_padded(probe.coeffs, cutoff), cutoff, 1, tolerance)
    return _pure_dm(_diagonal_pair_vector(_padded(probe.coeffs, cutoff), cutoff), cutoff, 2, tolerance)


def null_hypothesis_dm(probe_state, nbar):
    """H0 state: thermal background on the return mode, idler marginal kept."""
    cutoff = probe_state.cutoff
    thermal = thermal_dm(nbar, cutoff)
    if probe_state.n_modes == 1:
        return thermal
    idler = np.einsum("iaib->ab", probe_state.as_tensor())
    matrix = np.kron(thermal.matrix, idler)
    deficit = 1.0 - float(np.real(np.trace(matrix)))
    return FockDensityMatrix(cutoff, 2, matrix, deficit)


# --- Beam splitter ---

@lru_cache(maxsize=64)
def _bs_blocks(theta, cutoff):
    """``exp(θ(a†b − ab†))`` restricted to each total photon number N.

    Block N acts on ``|j, N−j>`` for the j that fit in the truncation; the
    local index is ``j − lo``.
    """
    blocks = []
    for total in range(2 * cutoff - 1):
        lo, hi = max(0, total - cutoff + 1), min(total, cutoff - 1)
        js = np.arange(lo, hi + 1, dtype=float)
        vals = np.sqrt((js[:-1] + 1.0) * (total - js[:-1]))
        generator = np.diag(vals, -1) - np.diag(vals, 1)
        block = expm(theta * generator)
        block.setflags(write=False)
        blocks.append((lo, block))
    return tuple(blocks)


def bs_unitary(theta, mode_pair, cutoff):
    """Dense two-mode beam splitter ``exp(θ(a†b − ab†))`` with transmissivity cos²θ.

    ``mode_pair = (0, 1)`` takes mode 0 as ``a``; ``(1, 0)`` swaps the roles.
    """
    cutoff = _check_cutoff(cutoff)
    if tuple(mode_pair) not in ((0, 1), (1, 0)):
        raise ParameterError(f"mode_pair must be (0, 1) or (1, 0), got {mode_pair}.")
    if tuple(mode_pair) == (1, 0):
        theta = -theta
    unitary = np.zeros((cutoff * cutoff, cutoff * cutoff))
    for total, (lo, block) in enumerate(_bs_blocks(float(theta), cutoff)):
        js = np.arange(lo, lo + block.shape[0])
        idx = js * cutoff + (total - js)
        unitary[np.ix_(idx, idx)] = block
    return unitary


@lru_cache(maxsize=64)
def _port_amplitudes(theta, cutoff, system_port):
    """``amp[x, k, e] = <x, k| U |input>`` for a system photon count ``x + k − e``.

    ``x`` counts photons leaving port a (kept), ``k`` port b (traced out) and
    ``e`` the environment photons entering the port not used by the system.
    """
    amp = np.zeros((cutoff, cutoff, cutoff))
    for total, (lo, block) in enumerate(_bs_blocks(theta, cutoff)):
        xs = np.arange(lo, lo + block.shape[0])
        ks = total - xs
        for e in range(max(0, total - cutoff + 1), min(total, cutoff - 1) + 1):
            n_a = total - e if system_port == 0 else e
            amp[xs, ks, e] = block[xs - lo, n_a - lo]
    amp.setflags(write=False)
    return amp


def _apply_port_channel(tensor, amp, env_pops):
    """Feed the system (first tensor index) and a diagonal environment through a BS.

    Returns the output tensor on the kept port and the population that
    entered with more photons than the truncation holds.
    """
    cutoff = amp.shape[0]
    out = np.zeros(tensor.shape, dtype=np.result_type(tensor, amp))
    present = np.flatnonzero(env_pops > 0.0)
    ks, es = np.meshgrid(np.arange(cutoff), present, indexing="ij")
    ks, es = ks.ravel(), es.ravel()
    weights = np.sqrt(env_pops[es])

    for shift in range(-(cutoff - 1), cutoff):
        mask = ks - es == shift
        if not np.any(mask):
            continue
        coeff = amp[:, ks[mask], es[mask]] * weights[mask]
        kernel = coeff @ coeff.conj().T
        lo, hi = max(0, -shift), min(cutoff, cutoff - shift)
        if lo >= hi:
            continue
        out[lo:hi, :, lo:hi, :] += (
            kernel[lo:hi, None, lo:hi, None]
            * tensor[lo + shift:hi + shift, :, lo + shift:hi + shift, :]
        )

    pops = np.real(np.einsum("iaia->i", tensor))
    tails = np.concatenate([np.cumsum(pops[::-1])[::-1], [0.0]])
    leakage = float(np.sum(env_pops[present] * tails[cutoff - present]))
    return out, leakage


def _loss_angle(reflectivity):
    return math.asin(math.sqrt(reflectivity))


def channel_rho1(probe_state, params, cutoff=None, leakage_tol=LEAKAGE_TOL):
    """Detector-side state under H1 from a Fock-space probe.

    Thermal light and the signal each pass an auxiliary beam splitter
    (sin²θ′ = r) into a vacuum device port; the surviving thermal light and
    signal then meet on the target (sin²θ = κ) and the reflected port is kept.
    """
    if cutoff is not None and cutoff != probe_state.cutoff:
        raise ParameterError(
            f"cutoff must match the probe cutoff {probe_state.cutoff}, got {cutoff}."
        )
    cutoff = probe_state.cutoff
    vacuum = np.zeros(cutoff)
    vacuum[0] = 1.0

    loss = _port_amplitudes(_loss_angle(params.r), cutoff, 0)
    thermal = thermal_dm(params.nbar, cutoff).as_tensor()
    thermal_out, leak_thermal = _apply_port_channel(thermal, loss, vacuum)
    env_pops = np.real(np.einsum("iaia->i", thermal_out))

    signal_out, leak_signal = _apply_port_channel(probe_state.as_tensor(), loss, vacuum)
    target = _port_amplitudes(_loss_angle(params.kappa), cutoff, 1)
    reflected, leak_target = _apply_port_channel(signal_out, target, env_pops)

    leakage = leak_thermal + leak_signal + leak_target
    if leakage > leakage_tol:
        raise TruncationError(
            f"Photon leakage past the cutoff must be at most {leakage_tol:g}, got {leakage:.3e} "
            f"at cutoff {cutoff}."
        )
    if not np.iscomplexobj(probe_state.matrix):
        reflected = np.real(reflected)
    return _from_tensor(reflected, cutoff, probe_state.n_modes, leakage)


def quadrature_moments(state):
    """Displacement and covariance (vacuum = I) of a truncated state."""
    cutoff, n_modes = state.cutoff, state.n_modes
    lower = diags(np.sqrt(np.arange(1, cutoff, dtype=float)), 1)
    single = [lower + lower.T, -1j * (lower - lower.T)]
    ops = []
    for mode in range(n_modes):
        left = identity(cutoff ** mode)
        right = identity(cutoff ** (n_modes - mode - 1))
        ops.extend(kron(kron(left, op), right, format="csr") for op in single)

    rho_t = state.matrix.T

    def expect(op):
        return complex(op.multiply(rho_t).sum())

    d = np.array([expect(op).real for op in ops])
    size = len(ops)
    sigma = np.empty((size, size))
    for i in range(size):
        for j in range(i, size):
            sym = ops[i] @ ops[j] + ops[j] @ ops[i]
            sigma[i, j] = sigma[j, i] = 0.5 * expect(sym).real - d[i] * d[j]
    return d, sigma


# --- Chernoff overlap ---

@dataclass(frozen=True)
class SpectralPair:
    """Eigen-data of ``ρ0`` and ``ρ1`` per coupled block with squared eigenvector overlaps."""

    blocks: tuple

    def q(self, s):
        if not 0.0 <= s <= 1.0:
            raise ParameterError(f"s must lie in [0, 1], got {s}.")
        total = 0.0
        for w0, w1, overlap in self.blocks:
            left = _spectral_power(w0, s)
            right = _spectral_power(w1, 1.0 - s)
            total += float(left @ overlap @ right)
        return total


def _spectral_power(values, exponent):
    if exponent == 0.0:
        # support projector
        return (values > SUPPORT_FLOOR).astype(float)
    return np.power(values, exponent, out=np.zeros_like(values), where=values > 0.0)


def _settled_spectrum(values):
    clamped = float(-np.sum(values[values < 0.0]))
    return np.clip(values, 0.0, None), clamped


def spectral_pair(rho0, rho1, clamp_limit=CLAMP_LIMIT):
    if rho0.matrix.shape != rho1.matrix.shape:
        raise ParameterError(
            f"States must have equal dimensions, got {rho0.matrix.shape} and {rho1.matrix.shape}."
        )
    m0, m1 = rho0.matrix, rho1.matrix
    dim = m0.shape[0]
    n_blocks, labels = connected_components(csr_matrix((m0 != 0) | (m1 != 0)), directed=False)

    blocks = []
    clamped = 0.0
    for label in range(n_blocks):
        idx = np.flatnonzero(labels == label)
        w0, v0 = eigh(m0[np.ix_(idx, idx)])
        w1, v1 = eigh(m1[np.ix_(idx, idx)])
        w0, c0 = _settled_spectrum(w0)
        w1, c1 = _settled_spectrum(w1)
        clamped += c0 + c1
        blocks.append((w0, w1, np.abs(v0.conj().T @ v1) ** 2))

    if clamped > clamp_limit:
        raise NonPhysicalStateError(
            f"Negative eigenvalue mass must be at most {clamp_limit:g}, got {clamped:.3e}."
        )
    if clamped > 0.0:
        logger.debug("Clamped negative eigenvalue mass %.3e to zero", clamped)
    logger.debug("Spectral pair over %d coupled blocks (dim %d)", n_blocks, dim)
    return SpectralPair(tuple(blocks))


def s_overlap(rho0, rho1, s):
    """``tr(ρ0^s ρ1^(1−s))`` with ``ρ^0`` the support projector."""
    return spectral_pair(rho0, rho1).q(s)


def chernoff_oracle(rho0, rho1):
    return minimize_s(spectral_pair(rho0, rho1).q)


# --- End-to-end oracle ---

@dataclass(frozen=True)
class OracleReport:
    result: object
    cutoff: int
    delta_q: float
    leakage: float
    trace_deficit: float

    @property
    def q(self):
        return self.result.q


def _oracle_at(probe, params, cutoff):
    state = probe_dm(probe, cutoff)
    rho1 = channel_rho1(state, params)
    rho0 = null_hypothesis_dm(state, params.nbar)
    return chernoff_oracle(rho0, rho1), rho1


def oracle_chernoff_bound(probe, params, cutoff=None, max_dimension=ORACLE_MAX_DIMENSION):
    """Oracle Chernoff bound with cutoff escalation.

    Starting from ``cutoff`` (or the geometric-tail rule), the cutoff grows
    by ``CUTOFF_STEP`` until one step moves q by less than
    ``CUTOFF_CONVERGENCE_TOL``.  Cutoffs that leak photons are skipped.
    """
    if cutoff is None:
        cutoff = choose_cutoff(params.nbar, probe.ns)
        if probe.coeffs is not None:
            cutoff = max(cutoff, len(probe.coeffs) + CUTOFF_HEADROOM)
    cutoff = _check_cutoff(cutoff)

    previous = None
    while True:
        if cutoff ** probe.n_modes > max_dimension:
            raise OracleBudgetError(
                f"Oracle dimension must stay within {max_dimension}, got {cutoff ** probe.n_modes} "
                f"at cutoff {cutoff}."
            )
        try:
            result, rho1 = _oracle_at(probe, params, cutoff)
        except TruncationError as exc:
            logger.debug("Cutoff %d rejected: %s", cutoff, exc)
            previous = None
            cutoff += CUTOFF_STEP
            continue

        if previous is not None:
            delta = abs(result.q - previous.q)
            logger.debug("Cutoff %d: q=%.12g, change %.3e", cutoff, result.q, delta)
            if delta < CUTOFF_CONVERGENCE_TOL:
                logger.info("Oracle accepted cutoff %d (q=%.12g)", cutoff, result.q)
                return OracleReport(result, cutoff, delta, rho1.leakage, rho1.trace_deficit)
        previous = result
        cutoff += CUTOFF_STEP
