"""Perturbative Chernoff bound for weak reflection and weak absorption.

For small ``κ`` and ``r`` the bound reads ``Q ≈ 1 − Ξ`` with a reflection
term that depends on the probe and an absorption term that does not.  The
optimisers below maximise the probe-dependent part over Fock coefficients
with fixed energy, which recovers the coherent state (single mode) and the
TMSV (signal plus idler).

Coefficients are real throughout.  Both objectives are concave in the
populations ``p_n = C_n²``, so the search runs over ``p`` on the simplex
cut by the energy hyperplane.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, lstsq, solve
from scipy.optimize import brentq
from scipy.special import logsumexp

from .constants import (
    DEFAULT_SEED,
    NORMALISATION_TOL,
    OPTIMIZER_DECREMENT_TOL,
    OPTIMIZER_MAX_ITER,
    OPTIMIZER_RESTARTS,
    SERIES_MAX_TERMS,
    SERIES_TOL,
    STATIONARITY_TOL,
)
from .errors import ConvergenceError, ParameterError
from .fock_oracle import channel_rho1, probe_dm, thermal_populations
from .target_model import ProbeSpec, TargetParams

logger = logging.getLogger(__name__)

_SERIES_CHUNK = 4096
_TILT_BRACKET = 60.0
_FLOOR_WEIGHT = 1e-6
_BOUNDARY_FRACTION = 0.99
_ARMIJO = 1e-4
_QUADRATIC_REGION = 1e-12


@dataclass(frozen=True)
class PerturbativeBound:
    term_reflect: float
    term_absorb: float
    series_tail: float
    epsilon: float = 1.0

    @property
    def xi(self):
        return self.term_reflect + self.term_absorb

    @property
    def q_perturbative(self):
        return 1.0 - self.term_reflect - self.term_absorb


@dataclass(frozen=True)
class ProbeOptimum:
    """Optimised coefficients with the multipliers of ``∂ζ/∂C_n + 2C_n(μ1 + nμ2) = 0``."""

    coeffs: np.ndarray
    objective: float
    multipliers: tuple
    residual: float
    restart_spread: float
    iterations: int


@dataclass(frozen=True)
class PerturbationCertificate:
    delta_a: np.ndarray
    delta_b_prime: np.ndarray
    delta_b: np.ndarray
    delta_c: np.ndarray
    error_a: float
    error_b: float
    step: float

    @property
    def max_b_prime(self):
        return float(np.max(np.abs(self.delta_b_prime)))

    @property
    def max_c(self):
        return float(np.max(np.abs(self.delta_c)))


def _coefficients(coeffs):
    coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
    norm = float(np.sum(coeffs ** 2))
    if coeffs.size == 0 or abs(norm - 1.0) > NORMALISATION_TOL:
        raise ParameterError(f"coeffs must satisfy sum C_n^2 = 1, got {norm:.12g}.")
    return coeffs


def zeta(coeffs):
    """``ζ = Σ C_n C_{n+1} √(n+1)``, the signal-mode amplitude ``<a>``."""
    c = _coefficients(coeffs)
    n = np.arange(1, c.size, dtype=float)
    return float(np.sum(c[:-1] * c[1:] * np.sqrt(n)))


def _harmonic_square(x, y):
    """``ℳ(x, y) = 4xy / (√x + √y)²``, zero when either argument is."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    denom = (np.sqrt(x) + np.sqrt(y)) ** 2
    return np.divide(4.0 * x * y, denom, out=np.zeros_like(denom), where=denom > 0.0)


def objective_two(coeffs, nbar):
    """``Σ (n+1) ℳ(C_n², n̄/(1+n̄) C_{n+1}²)``."""
    if nbar <= 0.0:
        raise ParameterError(f"nbar must be positive for the two-mode bound, got {nbar}.")
    p = _coefficients(coeffs) ** 2
    ratio = nbar / (1.0 + nbar)
    n = np.arange(1, p.size, dtype=float)
    return float(np.sum(n * _harmonic_square(p[:-1], ratio * p[1:])))


# --- Thermal series ---

def _thermal_series(nbar, term_fn):
    """Sum ``term_fn(m, λ_m, λ_{m+1})`` until both λ_m and the term are negligible."""
    total = 0.0
    last = 0.0
    start = 0
    while start < SERIES_MAX_TERMS:
        m = np.arange(start, start + _SERIES_CHUNK, dtype=float)
        lam = thermal_populations(nbar, start + _SERIES_CHUNK + 1)[start:]
        terms = term_fn(m, lam[:-1], lam[1:])
        partial = total + np.cumsum(terms)
        done = np.flatnonzero((lam[:-1] < SERIES_TOL) & (terms <= SERIES_TOL * np.abs(partial)))
        if done.size:
            stop = int(done[0])
            return float(partial[stop]), float(terms[stop])
        total, last = float(partial[-1]), float(terms[-1])
        start += _SERIES_CHUNK
    raise ConvergenceError(
        f"Thermal series must converge within {SERIES_MAX_TERMS} terms, last term {last:.3e}."
    )


def _reflect_series(nbar):
    # (m+1)(λm − λm+1)² / (√λm + √λm+1)² written without the 0/0 at n̄ = 0
    return _thermal_series(nbar, lambda m, lo, hi: (m + 1.0) * (np.sqrt(lo) - np.sqrt(hi)) ** 2)


def _absorb_series(nbar):
    def term(m, lo, hi):
        delta = (m + 1.0) * hi - m * lo
        return np.divide(delta ** 2, lo, out=np.zeros_like(lo), where=lo > 0.0)

    return _thermal_series(nbar, term)


def _check_small_params(params):
    if not isinstance(params, TargetParams):
        raise ParameterError(f"params must be TargetParams, got {type(params).__name__}.")


def xi_single(coeffs, params, epsilon=1.0):
    """Perturbative bound for a single-mode probe ``Σ C_n |n>``."""
    _check_small_params(params)
    z = zeta(coeffs)
    reflect_sum, tail_r = _reflect_series(params.nbar)
    absorb_sum, tail_a = _absorb_series(params.nbar)
    return PerturbativeBound(
        term_reflect=epsilon ** 2 * params.kappa * z ** 2 * reflect_sum,
        term_absorb=epsilon ** 2 * params.r ** 2 / 8.0 * absorb_sum,
        series_tail=max(tail_r, tail_a),
        epsilon=epsilon,
    )


def xi_two(coeffs, params, epsilon=1.0):
    """Perturbative bound for a two-mode probe ``Σ C_n |n, n>``; needs n̄ > 0."""
    _check_small_params(params)
    if params.nbar <= 0.0:
        raise ParameterError(f"nbar must be positive for the two-mode bound, got {params.nbar}.")
    absorb_sum, tail = _absorb_series(params.nbar)
    return PerturbativeBound(
        term_reflect=epsilon ** 2 * params.kappa / (4.0 * params.nbar) * objective_two(coeffs, params.nbar),
        term_absorb=epsilon ** 2 * params.r ** 2 / 8.0 * absorb_sum,
        series_tail=tail,
        epsilon=epsilon,
    )


def lagrange_residual(coeffs, mu1, mu2):
    """``max |C_{n+1}√(n+1) + C_{n−1}√n + 2C_n(μ1 + nμ2)|`` over the truncation."""
    c = np.asarray(coeffs, dtype=float)
    return float(np.max(np.abs(_zeta_gradient(c) + 2.0 * c * (mu1 + np.arange(c.size) * mu2))))


def _zeta_gradient(c):
    n = np.arange(c.size, dtype=float)
    grad = np.zeros_like(c)
    grad[:-1] += c[1:] * np.sqrt(n[1:])
    grad[1:] += c[:-1] * np.sqrt(n[1:])
    return grad


# --- Concave chain objectives over populations ---

class _PairObjective:
    """``f(p) = Σ_n w_n φ(p_n, p_{n+1})`` with a tridiagonal Hessian."""

    def __init__(self, weights, phi):
        self.weights = weights
        self.phi = phi

    def value(self, p):
        return float(np.sum(self.weights * self.phi(p[:-1], p[1:])[0]))

    def derivatives(self, p):
        val, fx, fy, fxx, fxy, fyy = self.phi(p[:-1], p[1:])
        w = self.weights
        grad = np.zeros_like(p)
        grad[:-1] += w * fx
        grad[1:] += w * fy
        hess = np.zeros((p.size, p.size))
        idx = np.arange(p.size - 1)
        hess[idx, idx] += w * fxx
        hess[idx + 1, idx + 1] += w * fyy
        hess[idx, idx + 1] += w * fxy
        hess[idx + 1, idx] += w * fxy
        return float(np.sum(w * val)), grad, hess


def _geometric_pair(x, y):
    root = np.sqrt(x * y)
    return (
        root,
        0.5 * np.sqrt(y / x),
        0.5 * np.sqrt(x / y),
        -0.25 * np.sqrt(y) * x ** -1.5,
        0.25 / root,
        -0.25 * np.sqrt(x) * y ** -1.5,
    )


def _harmonic_pair(ratio):
    def phi(x, y):
        u, v = np.sqrt(x), np.sqrt(ratio * y)
        total = u + v
        return (
            4.0 * (u * v / total) ** 2,
            4.0 * (v / total) ** 3,
            ratio * 4.0 * (u / total) ** 3,
            -6.0 * v ** 3 / (u * total ** 4),
            ratio * 6.0 * u * v / total ** 4,
            -(ratio ** 2) * 6.0 * u ** 3 / (v * total ** 4),
        )

    return phi


def _single_objective(cutoff):
    return _PairObjective(np.sqrt(np.arange(1, cutoff, dtype=float)), _geometric_pair)


def _two_objective(cutoff, nbar):
    return _PairObjective(np.arange(1, cutoff, dtype=float), _harmonic_pair(nbar / (1.0 + nbar)))


# --- Feasible points ---

def _tilted(weights, ns):
    """``p ∝ w e^{βn}`` with β chosen so that ``Σ n p_n = Ns``."""
    n = np.arange(weights.size, dtype=float)
    log_w = np.log(weights)

    def populations(beta):
        logits = log_w + beta * n
        return np.exp(logits - logsumexp(logits))

    beta = brentq(lambda b: populations(b) @ n - ns, -_TILT_BRACKET, _TILT_BRACKET, xtol=1e-14)
    return populations(beta)


def _check_energy(ns, cutoff):
    if ns <= 0.0:
        raise ParameterError(f"Ns must be positive, got {ns}.")
    if not isinstance(cutoff, (int, np.integer)) or cutoff < 3 or ns >= (cutoff - 1) / 2.0:
        raise ParameterError(f"cutoff must be an integer above 2 Ns + 1, got {cutoff!r}.")


def _uniform_start(ns, cutoff):
    weights = np.full(cutoff, _FLOOR_WEIGHT)
    weights[: min(cutoff, math.ceil(4.0 * ns) + 4)] = 1.0
    return _tilted(weights, ns)


def random_constrained_coeffs(ns, cutoff, rng, count):
    """``count`` random real coefficient vectors with unit norm and energy ``ns``."""
    _check_energy(ns, cutoff)
    out = np.empty((count, cutoff))
    for i in range(count):
        weights = np.maximum(rng.dirichlet(np.ones(cutoff)), 1e-12)
        out[i] = np.sqrt(_tilted(weights, ns))
    return out


# --- Newton ascent on the constraint surface ---

def _newton_ascent(objective, p, max_iter=OPTIMIZER_MAX_ITER):
    """Affine-scaled Newton ascent keeping ``Σp`` and ``Σnp`` fixed and ``p > 0``."""
    n = np.arange(p.size, dtype=float)
    constraints = np.vstack([np.ones_like(n), n])
    zeros = np.zeros((2, 2))
    for iteration in range(1, max_iter + 1):
        value, grad, hess = objective.derivatives(p)
        scale = np.sqrt(p)
        g_s = scale * grad
        h_s = scale[:, None] * hess * scale[None, :]
        a_s = constraints * scale[None, :]
        kkt = np.block([[h_s, a_s.T], [a_s, zeros]])
        rhs = np.concatenate([-g_s, np.zeros(2)])
        try:
            step = solve(kkt, rhs, assume_a="sym")
        except LinAlgError:
            step = lstsq(kkt, rhs)[0]
        direction = scale * step[: p.size]
        decrement = float(grad @ direction)
        logger.debug("Newton iteration %d: f=%.15g decrement=%.3e", iteration, value, decrement)
        if decrement < OPTIMIZER_DECREMENT_TOL:
            return p, iteration

        shrinking = direction < 0.0
        alpha = 1.0
        if np.any(shrinking):
            alpha = min(1.0, _BOUNDARY_FRACTION * float(np.min(-p[shrinking] / direction[shrinking])))
        # below this the Armijo test is at the mercy of rounding in f
        if decrement > _QUADRATIC_REGION:
            for _ in range(50):
                if objective.value(p + alpha * direction) >= value + _ARMIJO * alpha * decrement:
                    break
                alpha *= 0.5
            else:
                logger.debug("Line search stalled at iteration %d", iteration)
                return p, iteration
        p = p + alpha * direction
    raise ConvergenceError(f"Newton ascent must converge within {max_iter} iterations.")


def _multipliers(p, grad):
    """Least-squares ``(λ, ν)`` in ``∂f/∂p_n = λ + νn``."""
    n = np.arange(p.size, dtype=float)
    weights = 2.0 * np.sqrt(p)
    basis = np.column_stack([weights, weights * n])
    (lam, nu), *_ = np.linalg.lstsq(basis, weights * grad, rcond=None)
    residual = float(np.max(np.abs(weights * (grad - lam - nu * n))))
    return lam, nu, residual


def _optimize(objective, ns, cutoff, restarts, seed):
    rng = np.random.default_rng(seed)
    starts = [_uniform_start(ns, cutoff)]
    starts += [_tilted(np.maximum(rng.dirichlet(np.ones(cutoff)), 1e-12), ns) for _ in range(restarts - 1)]

    best, values, total_iterations = None, [], 0
    for start in starts:
        p, iterations = _newton_ascent(objective, start)
        total_iterations += iterations
        value = objective.value(p)
        values.append(value)
        if best is None or value > best[1]:
            best = (p, value)

    p, value = best
    _, grad, _ = objective.derivatives(p)
    lam, nu, residual = _multipliers(p, grad)
    if residual > STATIONARITY_TOL:
        raise ConvergenceError(
            f"Stationarity residual must be below {STATIONARITY_TOL:g}, got {residual:.3e}."
        )
    spread = max(values) - min(values)
    logger.info("Probe optimum %.15g after %d restarts (spread %.3e)", value, len(starts), spread)
    return ProbeOptimum(np.sqrt(p), value, (-lam, -nu), residual, spread, total_iterations)


def optimize_single(ns, cutoff, restarts=OPTIMIZER_RESTARTS, seed=DEFAULT_SEED):
    """Maximise ``ζ`` at fixed energy; the optimum is the coherent state."""
    _check_energy(ns, cutoff)
    return _optimize(_single_objective(cutoff), ns, cutoff, restarts, seed)


def optimize_two(ns, nbar, cutoff, restarts=OPTIMIZER_RESTARTS, seed=DEFAULT_SEED):
    """Maximise the two-mode reflection term; the optimum is the TMSV."""
    _check_energy(ns, cutoff)
    if nbar <= 0.0:
        raise ParameterError(f"nbar must be positive, got {nbar}.")
    return _optimize(_two_objective(cutoff, nbar), ns, cutoff, restarts, seed)


# --- Perturbation operators ---

def perturbation_operators(coeffs, nbar, cutoff):
    """First-order operators in ``√κ`` and ``r`` around the thermal state.

    ``δρ_a`` is ``ζ √(m+1)(λ_m − λ_{m+1})`` on both off-diagonals and ``δρ_b``
    is the diagonal ``(m+1)λ_{m+1} − mλ_m``.
    """
    z = zeta(coeffs)
    lam = thermal_populations(nbar, cutoff + 1)
    m = np.arange(cutoff, dtype=float)
    off = z * np.sqrt(m[1:]) * (lam[:-2] - lam[1:-1])
    delta_a = np.diag(off, -1) + np.diag(off, 1)
    delta_b = np.diag((m + 1.0) * lam[1:] - m * lam[:-1])
    return delta_a, delta_b


def certify_perturbations(coeffs, nbar, cutoff, step=1e-3):
    """Finite-difference estimates of the perturbation operators from the Fock channel.

    With ``h = step``, ``κ`` and ``r`` are set to ``h²`` so that ``√κ = h``.
    ``δρ′_b`` and ``δρ_c`` should come out of order ``h``.
    """
    state = probe_dm(ProbeSpec.fock_single(coeffs), cutoff)

    def channel(kappa, r):
        return np.real(channel_rho1(state, TargetParams(r, kappa, nbar)).matrix)

    h, h2 = step, step ** 2
    base = channel(0.0, 0.0)
    reflect = channel(h2, 0.0)
    absorb = channel(0.0, h2)
    both = channel(h2, h2)

    delta_a = (reflect - base) / h
    delta_b_prime = (absorb - base) / h
    delta_b = (absorb - base) / h2
    delta_c = (both - reflect - absorb + base) / h2

    analytic_a, analytic_b = perturbation_operators(coeffs, nbar, cutoff)
    return PerturbationCertificate(
        delta_a=delta_a,
        delta_b_prime=delta_b_prime,
        delta_b=delta_b,
        delta_c=delta_c,
        error_a=float(np.max(np.abs(delta_a - analytic_a))),
        error_b=float(np.max(np.abs(delta_b - analytic_b))),
        step=step,
    )
