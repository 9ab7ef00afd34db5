"""Angular-momentum sets, covariance matrices, principal decomposition."""

import math

import numpy as np
import pytest

from amcov import FockBasis, coherent_state, number_state
from amcov.fock import Ensemble, state_from_amplitudes
from amcov.spin import (
    SpinError,
    algebra_report,
    correlation_along,
    covariance_matrix,
    mean_vector,
    principal_decomposition,
    rotate_covariance,
    schwinger_set,
    second_moment_matrix,
    spin_j_set,
    validate_algebra,
    variance_along,
    CovarianceMatrix,
)

from conftest import random_state


# -- algebra -----------------------------------------------------------------

def test_schwinger_algebra_closes_exactly():
    ops = schwinger_set(FockBasis(2, 8))
    report = algebra_report(ops)
    assert report.max_residual() < 1e-12
    validate_algebra(ops)


def test_spin_algebra_all_j_up_to_five():
    for twice_j in range(1, 11):
        ops = spin_j_set(twice_j / 2.0)
        assert algebra_report(ops).max_residual() < 1e-12


def test_spin_half_matrices_are_half_paulis():
    ops = spin_j_set(0.5)
    half_paulis = [
        np.array([[0, 1], [1, 0]]) / 2.0,
        np.array([[0, -1j], [1j, 0]]) / 2.0,
        np.array([[1, 0], [0, -1]]) / 2.0,
    ]
    for k in (1, 2, 3):
        assert np.max(np.abs(ops.component(k).matrix - half_paulis[k - 1])) < 1e-15
    assert np.max(np.abs(ops.component(0).matrix - 0.5 * np.eye(2))) < 1e-15


def test_spin_one_j3_descending_m():
    ops = spin_j_set(1.0)
    assert np.max(np.abs(ops.component(3).matrix - np.diag([1.0, 0.0, -1.0]))) < 1e-15
    expected_j1 = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]]) / math.sqrt(2)
    assert np.max(np.abs(ops.component(1).matrix - expected_j1)) < 1e-15


def test_spin_j_rejects_bad_values():
    with pytest.raises(SpinError):
        spin_j_set(0.3)
    with pytest.raises(SpinError):
        spin_j_set(-1.0)


def test_schwinger_j0_counts_half_total():
    basis = FockBasis(2, 5)
    j0 = schwinger_set(basis).component(0).matrix
    idx = basis.index_of((3, 2))
    assert abs(j0[idx, idx] - 2.5) < 1e-15
    assert np.max(np.abs(j0 - np.diag(np.diag(j0)))) == 0.0


# -- moments -----------------------------------------------------------------

def test_number_state_covariance_oracle():
    # |n,0>: <j3> = n/2 exactly, transverse variances n/4
    basis = FockBasis(2, 6)
    ops = schwinger_set(basis)
    for n in (1, 2, 4):
        psi = number_state(basis, (n, 0))
        means = mean_vector(ops, psi)
        assert np.max(np.abs(means - [0.0, 0.0, n / 2.0])) < 1e-14
        cov = covariance_matrix(ops, psi).matrix
        assert np.max(np.abs(cov - np.diag([n / 4.0, n / 4.0, 0.0]))) < 1e-13


def test_coherent_state_covariance_oracle():
    # |alpha, 0>: isotropic covariance |alpha|^2/4 times identity
    basis = FockBasis(2, 18)
    ops = schwinger_set(basis)
    alpha = 1.5
    psi = coherent_state(basis, [alpha, 0.0])
    cov = covariance_matrix(ops, psi).matrix
    assert np.max(np.abs(cov - np.eye(3) * alpha ** 2 / 4.0)) < 1e-9
    means = mean_vector(ops, psi)
    assert np.max(np.abs(means - [0.0, 0.0, alpha ** 2 / 2.0])) < 1e-9


def test_two_mode_coherent_means():
    basis = FockBasis(2, 14)
    ops = schwinger_set(basis)
    a1, a2 = 0.8, 0.5j
    psi = coherent_state(basis, [a1, a2])
    means = mean_vector(ops, psi)
    z = np.conj(a1) * a2
    expected = [z.real, z.imag, (abs(a1) ** 2 - abs(a2) ** 2) / 2.0]
    assert np.max(np.abs(means - expected)) < 1e-10


def test_noon_like_state_covariance():
    # (|2,0> + |0,2>)/sqrt(2): <j3> = 0 with Var j3 = 1
    basis = FockBasis(2, 2)
    ops = schwinger_set(basis)
    amps = np.zeros(basis.dimension, dtype=np.complex128)
    amps[basis.index_of((2, 0))] = 1.0
    amps[basis.index_of((0, 2))] = 1.0
    psi = state_from_amplitudes(basis, amps)
    cov = covariance_matrix(ops, psi).matrix
    assert abs(cov[2, 2] - 1.0) < 1e-14
    means = mean_vector(ops, psi)
    assert np.max(np.abs(means)) < 1e-14


def test_covariance_of_mixture_combines_moments():
    basis = FockBasis(2, 4)
    ops = schwinger_set(basis)
    up = number_state(basis, (1, 0))
    down = number_state(basis, (0, 1))
    mix = Ensemble(basis, [(0.5, up), (0.5, down)])
    cov = covariance_matrix(ops, mix).matrix
    # classical j3 spread adds 1/4 on top of the quantum term (which is 0)
    assert abs(cov[2, 2] - 0.25) < 1e-14
    assert abs(mean_vector(ops, mix)[2]) < 1e-15


def test_second_moment_matrix_consistency(rng):
    # the symmetrized real part of the Hermitian diagnostic is the covariance
    basis = FockBasis(2, 5)
    ops = schwinger_set(basis)
    psi = random_state(basis, rng)
    second = second_moment_matrix(ops, psi)
    assert np.max(np.abs(second - second.conj().T)) < 1e-12
    cov = covariance_matrix(ops, psi).matrix
    assert np.max(np.abs(0.5 * (second + second.conj().T).real - cov)) < 1e-12


def test_covariance_is_symmetric_psd(rng):
    basis = FockBasis(2, 6)
    ops = schwinger_set(basis)
    for _ in range(10):
        cov = covariance_matrix(ops, random_state(basis, rng))
        assert np.max(np.abs(cov.matrix - cov.matrix.T)) == 0.0
        assert cov.min_eigenvalue() > -1e-12


def test_covariance_rejects_asymmetric_input():
    with pytest.raises(SpinError):
        CovarianceMatrix(np.array([[1.0, 0.2, 0.0],
                                   [0.1, 1.0, 0.0],
                                   [0.0, 0.0, 1.0]]))


# -- directional statistics --------------------------------------------------

def test_variance_and_correlation_along(rng):
    basis = FockBasis(2, 5)
    ops = schwinger_set(basis)
    cov = covariance_matrix(ops, random_state(basis, rng))
    u = np.array([1.0, 2.0, -1.0]) / math.sqrt(6.0)
    v = np.array([0.0, 1.0, 1.0]) / math.sqrt(2.0)
    assert abs(variance_along(cov, u) - u @ cov.matrix @ u) < 1e-14
    assert abs(correlation_along(cov, u, v) - u @ cov.matrix @ v) < 1e-14
    with pytest.raises(SpinError):
        variance_along(cov, [1.0, 2.0, -1.0])


# -- principal decomposition -------------------------------------------------

def test_principal_decomposition_contract(rng):
    basis = FockBasis(2, 6)
    ops = schwinger_set(basis)
    for _ in range(20):
        cov = covariance_matrix(ops, random_state(basis, rng))
        dec = principal_decomposition(cov)
        r = dec.rotation
        assert np.max(np.abs(r @ r.T - np.eye(3))) < 1e-12
        assert np.linalg.det(r) > 0.999999
        v = dec.variances
        assert v[0] >= v[1] >= v[2] >= -1e-12
        recomposed = r.T @ np.diag(v) @ r
        assert np.max(np.abs(recomposed - cov.matrix)) < 1e-12


def test_principal_decomposition_degenerate_isotropic():
    dec = principal_decomposition(CovarianceMatrix(np.eye(3) * 0.7))
    assert np.max(np.abs(dec.variances - 0.7)) < 1e-14
    assert np.max(np.abs(dec.rotation @ dec.rotation.T - np.eye(3))) < 1e-13


def test_rotate_covariance_round_trip(rng):
    basis = FockBasis(2, 5)
    ops = schwinger_set(basis)
    cov = covariance_matrix(ops, random_state(basis, rng))
    theta = 0.7
    r = np.array([
        [math.cos(theta), -math.sin(theta), 0.0],
        [math.sin(theta), math.cos(theta), 0.0],
        [0.0, 0.0, 1.0],
    ])
    rotated = rotate_covariance(cov, r)
    assert np.max(np.abs(rotated.matrix - r @ cov.matrix @ r.T)) < 1e-14
    back = rotate_covariance(rotated, r.T)
    assert np.max(np.abs(back.matrix - cov.matrix)) < 1e-13


def test_covariance_text_round_trip(rng):
    basis = FockBasis(2, 4)
    ops = schwinger_set(basis)
    cov = covariance_matrix(ops, random_state(basis, rng))
    back = CovarianceMatrix.from_text(cov.to_text())
    assert np.array_equal(back.matrix, cov.matrix)
