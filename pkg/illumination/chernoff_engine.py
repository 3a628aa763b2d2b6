"""Quantum Chernoff bounds for the illumination hypothesis pair.

``Q_s = tr(ρ0^s ρ1^(1−s))`` is available three ways: the coherent-probe and
TMSV closed forms, and a general normal-mode formula for any pair of Gaussian
states.  ``ρ^0`` is the projector onto the support of ``ρ``, so pure modes
give finite endpoint values instead of 1.
"""

import logging
import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .constants import (
    BOUNDARY_TOL,
    CROSS_CHECK_TOL,
    PHYSICAL_TOL,
    PURE_MODE_TOL,
    S_GRID_POINTS,
    S_TOL,
)
from .errors import ChernoffEvaluationError, NonPhysicalStateError, ParameterError
from .gaussian_core import symplectic_inverse, validate_physical, williamson
from .target_model import ProbeKind, ProbeSpec, rho_pair_coherent_closed, rho_pair_tmsv_closed

logger = logging.getLogger(__name__)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ChernoffResult:
    s_opt: float
    q: float
    at_boundary: bool
    s_samples: tuple = None

    @property
    def half_q(self):
        return self.q / 2.0

    def as_record(self):
        return {"s_opt": self.s_opt, "q": self.q, "half_q": self.half_q, "at_boundary": self.at_boundary}


@dataclass(frozen=True)
class AdvantageResult:
    delta_m: float
    m: int
    q_cs: float
    q_tmsv: float

    @property
    def half_delta(self):
        return self.delta_m / 2.0


# --- Mode weights ---

def _spow(x, p):
    """``x ** p`` with ``0 ** p = 0`` for every p, including p = 0."""
    x = np.asarray(x, dtype=float)
    return np.power(x, p, out=np.zeros_like(x), where=x > 0.0)


def _occupation(nu):
    n = (np.asarray(nu, dtype=float) - 1.0) / 2.0
    return np.where(n < PURE_MODE_TOL, 0.0, n)


def _gamma(p, n):
    return 1.0 / ((n + 1.0) ** p + _spow(n, p))


def _iota(p, n):
    upper, lower = (n + 1.0) ** p, _spow(n, p)
    return (upper - lower) / (upper + lower)


def _check_order(p, x):
    if p <= 0.0:
        raise ParameterError(f"p must be positive, got {p}.")
    x = np.asarray(x, dtype=float)
    if np.any(x < 1.0 - PHYSICAL_TOL):
        raise ParameterError(f"x must be at least 1, got {x.min()}.")
    return np.maximum(x, 1.0)


def g_func(p, x):
    """``G_p(x) = 2^p / ((x+1)^p − (x−1)^p)``; equals 1 at x = 1."""
    x = _check_order(p, x)
    value = 2.0 ** p / ((x + 1.0) ** p - _spow(x - 1.0, p))
    return float(value) if value.ndim == 0 else value


def lambda_func(p, x):
    """``Λ_p(x) = ((x+1)^p + (x−1)^p) / ((x+1)^p − (x−1)^p)``; equals 1 at x = 1."""
    x = _check_order(p, x)
    upper, lower = (x + 1.0) ** p, _spow(x - 1.0, p)
    value = (upper + lower) / (upper - lower)
    return float(value) if value.ndim == 0 else value


def _check_s(s):
    if not 0.0 <= s <= 1.0:
        raise ParameterError(f"s must lie in [0, 1], got {s}.")


# --- Closed forms ---

def q_s_coherent(s, params, ns):
    _check_s(s)
    nbar = params.nbar
    n1 = nbar * params.t * params.tau
    big_p, small_p = (1.0 + nbar) ** s, float(_spow(nbar, s))
    big_q, small_q = (1.0 + n1) ** (1.0 - s), float(_spow(n1, 1.0 - s))
    denom = big_p * big_q - small_p * small_q
    exponent = params.kappa * params.t * ns * (big_p - small_p) * (big_q - small_q) / denom
    return math.exp(-exponent) / denom


def tmsv_normal_modes(params, ns):
    """Symplectic eigenvalues ``ν1, ν2`` of the H1 covariance and the ``x±`` mixing weights."""
    t = params.t
    s = 2.0 * ns + 1.0
    b = 2.0 * params.nbar * t * params.tau + 1.0
    a = 2.0 * params.kappa * ns * t + b
    c_q2 = 4.0 * t * ns * (ns + 1.0)
    disc = (a + s) ** 2 - 4.0 * params.kappa * c_q2
    if disc < 1e-14:
        raise NonPhysicalStateError(
            f"(A + S)^2 - 4 kappa C_q^2 must be positive, got {disc:.3e}."
        )
    d = math.sqrt(disc)
    nu1 = 0.5 * (a - s + d)
    nu2 = 0.5 * (s - a + d)
    x_plus = math.sqrt((a + s + d) / (2.0 * d))
    x_minus = math.sqrt(max((a + s - d) / (2.0 * d), 0.0))
    return nu1, nu2, x_plus, x_minus


def q_s_tmsv(s, params, ns):
    _check_s(s)
    nu1, nu2, x_plus, x_minus = tmsv_normal_modes(params, ns)
    u, v = x_plus ** 2, x_minus ** 2

    # H0 modes (return, idler) carry order s, H1 normal modes order 1 − s
    n_a = _occupation([2.0 * params.nbar + 1.0, 2.0 * ns + 1.0])
    n_b = _occupation([nu1, nu2])
    ga, ia = _gamma(s, n_a), _iota(s, n_a)
    gb, ib = _gamma(1.0 - s, n_b), _iota(1.0 - s, n_b)

    denom = (
        ia[0] * ia[1]
        + ib[0] * ib[1]
        + u * (ia[0] * ib[1] + ia[1] * ib[0])
        + v * (ia[0] * ib[0] + ia[1] * ib[1])
    )
    return float(4.0 * np.prod(ga) * np.prod(gb) / denom)


# --- General Gaussian path ---

def q_s_general(s, rho0, rho1):
    """``tr(ρ0^s ρ1^(1−s))`` for two Gaussian states of equal size.

    Works in the normal-mode frame of ``ρ0`` with ``ι_s = 1/Λ_s`` weights so
    that pure modes and the endpoints s = 0, 1 stay finite.  For s > 1/2
    the arguments are swapped, which keeps every power applied to ``ρ1``
    at order 1 − s ≥ 1/2.
    """
    _check_s(s)
    if rho0.n_modes != rho1.n_modes:
        raise ParameterError(
            f"States must have equal n_modes, got {rho0.n_modes} and {rho1.n_modes}."
        )
    if s > 0.5:
        return q_s_general(1.0 - s, rho1, rho0)
    validate_physical(rho0)
    validate_physical(rho1)

    alpha, s_a = williamson(rho0.sigma)
    beta, s_b = williamson(rho1.sigma)
    n_alpha = _occupation(alpha)

    weights = np.repeat(_iota(s, n_alpha), 2)
    spread = np.repeat(lambda_func(1.0 - s, beta), 2)
    s_a_inv = symplectic_inverse(s_a)
    relative = s_a_inv @ s_b
    root = np.sqrt(weights)
    kernel = root[:, None] * ((relative * spread) @ relative.T) * root[None, :]
    shift = root * (s_a_inv @ (rho0.d - rho1.d))

    system = np.eye(kernel.shape[0]) + kernel
    sign, logdet = np.linalg.slogdet(system)
    if sign <= 0.0:
        raise ChernoffEvaluationError(f"I + K must be positive definite at s={s}.")
    quad = float(shift @ np.linalg.solve(system, shift))

    log_prefactor = (
        rho0.n_modes * math.log(2.0)
        + float(np.sum(np.log(_gamma(s, n_alpha))))
        + float(np.sum(np.log(g_func(1.0 - s, beta))))
    )
    return math.exp(log_prefactor - 0.5 * logdet - 0.5 * quad)


# --- Minimisation over s ---

def _evaluate(q_fn, s):
    value = float(q_fn(s))
    if not math.isfinite(value):
        raise ChernoffEvaluationError(f"Q_s must be finite, got {value} at s={s}.")
    return value


def _golden_section(q_fn, a, b, tol):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = _evaluate(q_fn, c), _evaluate(q_fn, d)
    for _ in range(200):
        if abs(b - a) < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = _evaluate(q_fn, c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = _evaluate(q_fn, d)
    return (c, fc) if fc < fd else (d, fd)


def minimize_s(q_fn, *, grid_points=S_GRID_POINTS, tol=S_TOL, keep_samples=False):
    """Minimise ``q_fn`` over [0, 1]: uniform grid, then golden-section refinement.

    The refinement brackets the best grid point by its neighbours; the grid
    minimum itself is kept when it beats the refined point, so boundary
    minima land exactly on 0 or 1.
    """
    grid = np.linspace(0.0, 1.0, grid_points)
    values = np.array([_evaluate(q_fn, s) for s in grid])
    best = int(np.argmin(values))
    lo, hi = grid[max(best - 1, 0)], grid[min(best + 1, grid_points - 1)]
    s_ref, q_ref = _golden_section(q_fn, lo, hi, tol)

    s_opt, q = (float(grid[best]), float(values[best]))
    if q_ref < q:
        s_opt, q = float(s_ref), float(q_ref)
    at_boundary = s_opt < BOUNDARY_TOL or s_opt > 1.0 - BOUNDARY_TOL
    samples = tuple(zip(grid.tolist(), values.tolist())) if keep_samples else None
    logger.debug("Chernoff minimum q=%.12g at s=%.9f (boundary=%s)", q, s_opt, at_boundary)
    return ChernoffResult(s_opt, q, at_boundary, samples)


def _closed_form(probe, params):
    if probe.kind is ProbeKind.COHERENT:
        return partial(q_s_coherent, params=params, ns=probe.ns), rho_pair_coherent_closed(params, probe.ns)
    if probe.kind is ProbeKind.TMSV:
        return partial(q_s_tmsv, params=params, ns=probe.ns), rho_pair_tmsv_closed(params, probe.ns)
    raise ParameterError(f"probe must be coherent or tmsv, got {probe.kind.value}.")


def chernoff_bound(probe, params, *, cross_check=True, keep_samples=False):
    """Chernoff bound for a Gaussian probe from its closed form.

    With ``cross_check`` the closed form is compared with the general
    normal-mode path at the optimum; on disagreement the general path is
    minimised instead and its result returned.
    """
    q_fn, pair = _closed_form(probe, params)
    result = minimize_s(q_fn, keep_samples=keep_samples)
    if not cross_check:
        return result

    general = q_s_general(result.s_opt, pair.rho0, pair.rho1)
    if abs(general - result.q) > CROSS_CHECK_TOL:
        logger.warning(
            "Closed form and normal-mode Q_s disagree for %s probe at %s: %.12g vs %.12g; "
            "using the normal-mode value.",
            probe.kind.value, params, result.q, general,
        )
        result = minimize_s(
            partial(q_s_general, rho0=pair.rho0, rho1=pair.rho1), keep_samples=keep_samples
        )
    return result


# --- Copies and advantage ---

def _check_copies(m):
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 1:
        raise ParameterError(f"M must be a positive integer, got {m!r}.")


def m_copy_error_bound(q, m):
    _check_copies(m)
    if not 0.0 < q <= 1.0:
        raise ParameterError(f"q must lie in (0, 1], got {q}.")
    return 0.5 * q ** m


def m_copy_curve(q, ms):
    """``log10(½ q^M)`` for each copy count in ``ms`` (real counts allowed)."""
    if not 0.0 < q <= 1.0:
        raise ParameterError(f"q must lie in (0, 1], got {q}.")
    ms = np.asarray(ms, dtype=float)
    if np.any(ms < 1.0):
        raise ParameterError(f"M must be at least 1, got {ms.min()}.")
    return math.log10(0.5) + ms * math.log10(q)


def quantum_advantage(params, ns, m):
    _check_copies(m)
    q_cs = chernoff_bound(ProbeSpec.coherent(ns), params).q
    q_tmsv = chernoff_bound(ProbeSpec.tmsv(ns), params).q
    return AdvantageResult(q_cs ** m - q_tmsv ** m, int(m), q_cs, q_tmsv)


# --- Limiting forms ---

def limit_low_loss_cs(params, ns):
    """Coherent-probe bound for ``κ r → 0`` and ``n̄ ≫ 1``."""
    if params.nbar <= 0.0:
        raise ParameterError(f"nbar must be positive for the low-loss form, got {params.nbar}.")
    return math.exp(-params.kappa * ns / (2.0 * params.nbar * (2.0 - params.r - params.kappa)))


def limit_low_loss_tmsv(params, ns):
    """TMSV ansatz for weak signals, low loss and bright background."""
    if params.nbar <= 0.0:
        raise ParameterError(f"nbar must be positive for the low-loss form, got {params.nbar}.")
    margin = 1.0 - params.r - params.kappa
    if margin <= 0.0:
        raise ParameterError(f"r + kappa must be below 1 for the low-loss form, got {1.0 - margin}.")
    return math.exp(-params.kappa * ns / (params.nbar * margin))


def limit_full_absorption(nbar):
    if nbar < 0.0:
        raise ParameterError(f"nbar must be non-negative, got {nbar}.")
    return 1.0 / (1.0 + nbar)
