import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import block_diag

from illumination.errors import NonPhysicalStateError, ParameterError
from illumination.gaussian_core import (
    GaussianState,
    SymplecticOp,
    apply_symplectic,
    beamsplitter_symplectic,
    coherent_state,
    compose,
    is_symplectic,
    mean_photon_number,
    partial_trace,
    symplectic_eigenvalues,
    symplectic_form,
    symplectic_inverse,
    tensor_product,
    thermal_state,
    tmsv_state,
    vacuum_state,
    validate_physical,
    williamson,
)


# --- Constructors ---

@pytest.mark.parametrize("n_modes", [1, 2])
def test_vacuum_is_identity(n_modes):
    state = vacuum_state(n_modes)
    assert_allclose(state.d, np.zeros(2 * n_modes))
    assert_allclose(state.sigma, np.eye(2 * n_modes))


def test_vacuum_rejects_zero_modes():
    with pytest.raises(ParameterError):
        vacuum_state(0)


@pytest.mark.parametrize("nbar, diagonal", [(0.0, 1.0), (2.0, 5.0), (200.0, 401.0)])
def test_thermal_covariance(nbar, diagonal):
    assert_allclose(thermal_state(nbar).sigma, diagonal * np.eye(2))


def test_coherent_displacement():
    assert_allclose(coherent_state(0.0).d, [0.0, 0.0])
    assert_allclose(coherent_state(0.25).d, [1.0, 0.0])
    assert_allclose(coherent_state(0.5).d, [2.0 * math.sqrt(0.5), 0.0])
    assert_allclose(coherent_state(0.5).sigma, np.eye(2))


def test_tmsv_blocks():
    sigma = tmsv_state(1.0).sigma
    assert_allclose(np.diag(sigma), [3.0] * 4)
    assert sigma[0, 2] == pytest.approx(2.0 * math.sqrt(2.0))
    assert sigma[1, 3] == pytest.approx(-2.0 * math.sqrt(2.0))
    assert_allclose(tmsv_state(0.0).sigma, np.eye(4))


@pytest.mark.parametrize("ns", [0.0, 0.3, 1.0, 7.5])
def test_tmsv_is_pure(ns):
    assert np.linalg.det(tmsv_state(ns).sigma) == pytest.approx(1.0, abs=1e-9)


def test_state_is_read_only():
    state = thermal_state(1.0)
    with pytest.raises(ValueError):
        state.sigma[0, 0] = 2.0


def test_state_rejects_bad_shapes():
    with pytest.raises(ParameterError):
        GaussianState(np.zeros(3), np.eye(3))
    with pytest.raises(ParameterError):
        GaussianState(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]))


# --- Symplectic maps ---

def test_symplectic_form_is_orthogonal():
    omega = symplectic_form(3)
    assert_allclose(omega @ omega.T, np.eye(6))
    assert_allclose(omega @ omega, -np.eye(6))


def test_symplectic_op_validates():
    with pytest.raises(ParameterError):
        SymplecticOp(2.0 * np.eye(2))


def test_beamsplitter_endpoints():
    assert_allclose(beamsplitter_symplectic(1.0, (0, 1), 2).matrix, np.eye(4))
    swap = beamsplitter_symplectic(0.0, (0, 1), 2).matrix
    assert_allclose(swap[0:2, 0:2], np.zeros((2, 2)))
    assert_allclose(swap[0:2, 2:4], np.eye(2))
    assert_allclose(swap[2:4, 0:2], -np.eye(2))


def test_beamsplitter_quarter():
    matrix = beamsplitter_symplectic(0.75, (0, 1), 2).matrix
    assert_allclose(matrix[0:2, 0:2], math.sqrt(0.75) * np.eye(2))
    assert_allclose(matrix[0:2, 2:4], 0.5 * np.eye(2))
    assert_allclose(matrix[2:4, 0:2], -0.5 * np.eye(2))
    assert is_symplectic(matrix)


@pytest.mark.parametrize("transmissivity, pair", [(1.5, (0, 1)), (0.5, (0, 0)), (0.5, (0, 3))])
def test_beamsplitter_rejects(transmissivity, pair):
    with pytest.raises(ParameterError):
        beamsplitter_symplectic(transmissivity, pair, 2)


def test_beamsplitters_preserve_form(rng):
    for _ in range(200):
        n_modes = int(rng.integers(2, 6))
        i, j = rng.choice(n_modes, size=2, replace=False)
        op = beamsplitter_symplectic(float(rng.uniform()), (int(i), int(j)), n_modes)
        omega = symplectic_form(n_modes)
        assert np.max(np.abs(op.matrix @ omega @ op.matrix.T - omega)) < 1e-12


def test_symplectic_inverse(random_symplectic):
    matrix = random_symplectic(3)
    assert_allclose(symplectic_inverse(matrix) @ matrix, np.eye(6), atol=1e-12)


def test_compose_matches_sequential_application(rng):
    state = tensor_product(thermal_state(1.3), coherent_state(0.7))
    first = beamsplitter_symplectic(0.3, (0, 1), 2)
    second = beamsplitter_symplectic(0.8, (0, 1), 2)
    sequential = apply_symplectic(apply_symplectic(state, first), second)
    composed = apply_symplectic(state, compose(second, first))
    assert_allclose(composed.sigma, sequential.sigma, atol=1e-12)
    assert_allclose(composed.d, sequential.d, atol=1e-12)


def test_vacuum_through_beamsplitter_stays_vacuum():
    out = apply_symplectic(vacuum_state(2), beamsplitter_symplectic(0.37, (1, 0), 2))
    assert_allclose(out.sigma, np.eye(4), atol=1e-15)


def test_coherent_through_beamsplitter():
    ns, t = 0.8, 0.3
    state = tensor_product(coherent_state(ns), vacuum_state(1))
    out = apply_symplectic(state, beamsplitter_symplectic(t, (0, 1), 2))
    assert_allclose(out.d, [2.0 * math.sqrt(t * ns), 0.0, -2.0 * math.sqrt((1.0 - t) * ns), 0.0])


def test_beamsplitter_chains_keep_states_physical(rng):
    for _ in range(200):
        state = tensor_product(
            thermal_state(float(rng.uniform(0.0, 3.0))),
            coherent_state(float(rng.uniform(0.0, 2.0))),
            tmsv_state(float(rng.uniform(0.0, 2.0))),
        )
        for _ in range(4):
            i, j = rng.choice(4, size=2, replace=False)
            op = beamsplitter_symplectic(float(rng.uniform()), (int(i), int(j)), 4)
            state = apply_symplectic(state, op)
        validate_physical(state)
        lowest = np.linalg.eigvalsh(state.sigma + 1j * symplectic_form(4))[0]
        assert lowest > -1e-9


# --- Marginals ---

def test_partial_trace_tmsv_idler_is_thermal():
    idler = partial_trace(tmsv_state(0.6), [1])
    assert_allclose(idler.sigma, 2.2 * np.eye(2))
    assert mean_photon_number(idler, 0) == pytest.approx(0.6)


def test_partial_trace_keeps_factor_and_order():
    first, second = thermal_state(0.4), coherent_state(0.9)
    product = tensor_product(first, second)
    assert_allclose(partial_trace(product, [1]).d, second.d)
    assert_allclose(partial_trace(product, [0]).sigma, first.sigma)
    swapped = partial_trace(product, [1, 0])
    assert_allclose(swapped.d, np.concatenate([second.d, first.d]))
    whole = partial_trace(product, [0, 1])
    assert_allclose(whole.sigma, product.sigma)


def test_partial_trace_rejects_repeats():
    with pytest.raises(ParameterError):
        partial_trace(tmsv_state(0.5), [0, 0])


def test_partial_trace_commutes_with_local_symplectics(rng, random_symplectic):
    for _ in range(200):
        state = tensor_product(
            thermal_state(float(rng.uniform(0.0, 2.0))),
            tmsv_state(float(rng.uniform(0.0, 2.0))),
        )
        local = random_symplectic(2)
        embedded = SymplecticOp(block_diag(local, np.eye(2)))
        left = partial_trace(apply_symplectic(state, embedded), [0, 1])
        right = apply_symplectic(partial_trace(state, [0, 1]), SymplecticOp(local))
        assert_allclose(left.sigma, right.sigma, atol=1e-12)
        assert_allclose(left.d, right.d, atol=1e-12)


def test_mean_photon_number():
    assert mean_photon_number(coherent_state(0.7), 0) == pytest.approx(0.7)
    assert mean_photon_number(thermal_state(3.0), 0) == pytest.approx(3.0)
    state = tmsv_state(1.2)
    assert mean_photon_number(state, 0) == pytest.approx(1.2)
    assert mean_photon_number(state, 1) == pytest.approx(1.2)


# --- Physicality and normal modes ---

def test_validate_physical_rejects_squeezed_below_vacuum():
    with pytest.raises(NonPhysicalStateError):
        validate_physical(GaussianState(np.zeros(2), 0.5 * np.eye(2)))


@pytest.mark.parametrize("nbar", [0.0, 2.0, 200.0])
def test_thermal_symplectic_eigenvalue(nbar):
    assert_allclose(symplectic_eigenvalues(thermal_state(nbar).sigma), [2.0 * nbar + 1.0])


def test_pure_states_have_unit_eigenvalues(random_symplectic):
    for _ in range(200):
        matrix = random_symplectic(3)
        values = symplectic_eigenvalues(matrix @ matrix.T)
        assert_allclose(values, np.ones(3), atol=1e-9)


def test_tmsv_williamson_is_pure():
    nu, transform = williamson(tmsv_state(1.0).sigma)
    assert_allclose(nu, [1.0, 1.0])
    assert_allclose(transform @ transform.T, tmsv_state(1.0).sigma, atol=1e-9)


def test_williamson_reconstructs(rng, random_symplectic):
    for _ in range(200):
        n_modes = int(rng.integers(1, 4))
        nu = rng.uniform(1.1, 5.0, size=n_modes)
        matrix = random_symplectic(n_modes)
        sigma = matrix @ np.diag(np.repeat(nu, 2)) @ matrix.T

        nu_out, transform = williamson(sigma)
        assert_allclose(np.sort(nu_out), np.sort(nu), rtol=1e-9)
        rebuilt = transform @ np.diag(np.repeat(nu_out, 2)) @ transform.T
        assert_allclose(rebuilt, sigma, atol=1e-9 * np.max(np.abs(sigma)))
        omega = symplectic_form(n_modes)
        assert_allclose(transform @ omega @ transform.T, omega, atol=1e-8)


def test_williamson_rejects_non_positive():
    with pytest.raises(NonPhysicalStateError):
        williamson(np.diag([1.0, -1.0]))
