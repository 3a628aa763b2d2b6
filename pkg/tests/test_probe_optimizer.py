import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from illumination.chernoff_engine import chernoff_bound
from illumination.errors import ConvergenceError, ParameterError
from illumination.fock_oracle import coherent_amplitudes, tmsv_amplitudes
from illumination.probe_optimizer import (
    certify_perturbations,
    lagrange_residual,
    objective_two,
    optimize_single,
    optimize_two,
    perturbation_operators,
    random_constrained_coeffs,
    xi_single,
    xi_two,
    zeta,
)
from illumination.target_model import ProbeSpec, TargetParams


# --- Objectives ---

def test_zeta_examples():
    assert zeta([1.0, 0.0, 0.0]) == 0.0
    assert zeta([math.sqrt(0.5), math.sqrt(0.5)]) == pytest.approx(0.5)
    assert zeta(coherent_amplitudes(0.5, 40)) == pytest.approx(math.sqrt(0.5), abs=1e-10)


def test_zeta_rejects_unnormalised():
    with pytest.raises(ParameterError):
        zeta([1.0, 1.0])


def test_zeta_bounded_by_coherent_value(rng):
    candidates = random_constrained_coeffs(0.5, 40, rng, 1000)
    values = [zeta(c) for c in candidates]
    assert max(values) <= math.sqrt(0.5) + 1e-12


def test_random_candidates_satisfy_constraints(rng):
    candidates = random_constrained_coeffs(1.0, 30, rng, 50)
    n = np.arange(30)
    assert_allclose(np.sum(candidates ** 2, axis=1), 1.0, atol=1e-12)
    assert_allclose(candidates ** 2 @ n, 1.0, atol=1e-10)


def test_two_mode_objective_prefers_tmsv():
    tmsv = tmsv_amplitudes(1.0, 60)
    coherent = coherent_amplitudes(1.0, 60)
    assert objective_two(tmsv, 2.0) > objective_two(coherent, 2.0)
    assert objective_two([1.0, 0.0, 0.0], 2.0) == 0.0
    with pytest.raises(ParameterError):
        objective_two(tmsv, 0.0)


# --- Perturbative bounds ---

def test_vacuum_probe_has_no_reflection_term():
    params = TargetParams(0.01, 0.01, 1.0)
    assert xi_single([1.0, 0.0, 0.0], params).term_reflect == 0.0
    assert xi_two([1.0, 0.0, 0.0], params).term_reflect == 0.0


def test_absorption_term_independent_of_probe(rng):
    params = TargetParams(0.01, 0.005, 2.0)
    reference = xi_single(coherent_amplitudes(0.5, 40), params).term_absorb
    for coeffs in random_constrained_coeffs(0.5, 40, rng, 20):
        assert xi_single(coeffs, params).term_absorb == reference
        assert xi_two(coeffs, params).term_absorb == reference


def test_bound_fields():
    bound = xi_single(coherent_amplitudes(0.5, 40), TargetParams(0.01, 0.01, 1.0), epsilon=0.5)
    assert bound.xi == pytest.approx(bound.term_reflect + bound.term_absorb)
    assert bound.q_perturbative == pytest.approx(1.0 - bound.xi)
    assert bound.epsilon == 0.5
    assert bound.series_tail <= 1e-12


def test_single_mode_reflection_term_closed_form():
    # coherent probe: κ Ns (√(1+n̄) − √n̄)²
    nbar, ns, kappa = 1.5, 0.5, 0.01
    bound = xi_single(coherent_amplitudes(ns, 40), TargetParams(0.0, kappa, nbar))
    expected = kappa * ns * (math.sqrt(1.0 + nbar) - math.sqrt(nbar)) ** 2
    assert bound.term_reflect == pytest.approx(expected, rel=1e-10)


def test_absorption_term_matches_exact_bound():
    params = TargetParams(1e-3, 0.0, 1.0)
    bound = xi_single(coherent_amplitudes(0.5, 40), params)
    exact = chernoff_bound(ProbeSpec.coherent(0.5), params).q
    assert 1.0 - exact == pytest.approx(bound.term_absorb, rel=1e-2)


def test_two_mode_bound_needs_background():
    with pytest.raises(ParameterError):
        xi_two(tmsv_amplitudes(1.0, 40), TargetParams(0.0, 0.01, 0.0))


def test_series_divergence_reported():
    with pytest.raises(ConvergenceError):
        xi_single(coherent_amplitudes(0.5, 40), TargetParams(0.0, 0.01, 1e6))


def test_perturbative_bound_converges_quadratically():
    coeffs = coherent_amplitudes(0.5, 40)
    gaps = []
    for step in (1e-2, 1e-3, 1e-4):
        params = TargetParams(step, step, 1.0)
        exact = chernoff_bound(ProbeSpec.coherent(0.5), params).q
        gaps.append(abs(xi_single(coeffs, params).q_perturbative - exact))
    slope = math.log(gaps[0] / gaps[-1]) / math.log(1e-2 / 1e-4)
    assert slope >= 1.9


@pytest.mark.parametrize("nbar", [0.5, 2.0])
def test_two_mode_bound_tracks_exact_tmsv_bound(nbar):
    params = TargetParams(0.0, 1e-4, nbar)
    bound = xi_two(tmsv_amplitudes(0.5, 60), params)
    exact = chernoff_bound(ProbeSpec.tmsv(0.5), params).q
    assert bound.term_absorb == 0.0
    assert 1.0 - exact == pytest.approx(bound.xi, rel=1e-3)


# --- Stationarity ---

def test_poisson_satisfies_stationarity():
    ns = 0.5
    coeffs = coherent_amplitudes(ns, 40)
    residual = lagrange_residual(coeffs, -math.sqrt(ns) / 2.0, -1.0 / (2.0 * math.sqrt(ns)))
    assert residual < 1e-10


def test_optimize_single_recovers_coherent_state():
    ns = 0.5
    optimum = optimize_single(ns, 40)
    assert_allclose(optimum.coeffs, coherent_amplitudes(ns, 40), atol=1e-6)
    assert optimum.residual < 1e-8
    assert optimum.objective == pytest.approx(math.sqrt(ns), abs=1e-9)
    mu1, mu2 = optimum.multipliers
    assert mu1 == pytest.approx(-math.sqrt(ns) / 2.0, abs=1e-6)
    assert mu2 == pytest.approx(-1.0 / (2.0 * math.sqrt(ns)), abs=1e-6)
    assert lagrange_residual(optimum.coeffs, mu1, mu2) < 1e-6


def test_optimize_single_is_seeded():
    first = optimize_single(0.8, 30, restarts=5, seed=7)
    second = optimize_single(0.8, 30, restarts=5, seed=7)
    assert_allclose(first.coeffs, second.coeffs)
    assert first.iterations == second.iterations


@pytest.mark.parametrize("ns, cutoff", [(0.0, 40), (-1.0, 40), (5.0, 8), (0.5, 2)])
def test_optimizers_reject_degenerate_inputs(ns, cutoff):
    with pytest.raises(ParameterError):
        optimize_single(ns, cutoff)


def test_optimize_two_recovers_tmsv(rng):
    optimum = optimize_two(1.0, 2.0, 60)
    assert_allclose(optimum.coeffs, tmsv_amplitudes(1.0, 60), atol=1e-6)
    assert optimum.residual < 1e-8

    competitors = random_constrained_coeffs(1.0, 60, rng, 1000)
    best = max(objective_two(c, 2.0) for c in competitors)
    assert objective_two(optimum.coeffs, 2.0) >= best


def test_optimize_two_independent_of_background():
    optimum = optimize_two(1.0, 50.0, 60, restarts=5)
    assert_allclose(optimum.coeffs, tmsv_amplitudes(1.0, 60), atol=1e-6)
    with pytest.raises(ParameterError):
        optimize_two(1.0, 0.0, 60)


# --- Perturbation operators ---

def test_perturbation_operator_shapes():
    coeffs = [math.sqrt(0.6), math.sqrt(0.3), math.sqrt(0.1)]
    delta_a, delta_b = perturbation_operators(coeffs, 0.5, 40)
    assert delta_a.shape == delta_b.shape == (40, 40)
    assert_allclose(delta_a, delta_a.T)
    assert np.trace(delta_b) == pytest.approx(0.0, abs=1e-12)


def test_finite_differences_certify_operators():
    coeffs = [math.sqrt(0.6), math.sqrt(0.3), math.sqrt(0.1)]
    cert = certify_perturbations(coeffs, 0.5, 20, step=1e-3)
    assert cert.error_a < 1e-2
    assert cert.error_b < 1e-4
    assert cert.max_b_prime < 1e-2
    assert cert.max_c < 1e-2
    assert cert.step == 1e-3
