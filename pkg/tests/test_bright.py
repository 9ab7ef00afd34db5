"""Strong-reference expansion: quadrature moments, polynomial covariance,
homodyne asymptote."""

import math

import numpy as np
import pytest

from amcov import (
    FockBasis,
    TwelvePortConfig,
    bright_decomposition,
    coherent_state,
    convergence_report,
    homodyne_asymptotics,
    number_state,
    quadrature_moments,
    series_covariance,
    vacuum_state,
)
from amcov.bright import BrightError, mean_relations, real_alignment
from amcov.fock import annihilation, product_state
from amcov.spin import covariance_matrix, mean_vector, schwinger_set

CONFIG = TwelvePortConfig(2.0 / 3.0)


def reference_quadratures(state):
    """Independent X, Y moment computation straight from ladder matrices."""
    basis = state.basis
    a = annihilation(basis, 0).matrix
    x = (a.conj().T + a) / 2.0
    y = 1j * (a.conj().T - a) / 2.0
    n = a.conj().T @ a

    def ev(mat):
        return complex(np.vdot(state.amplitudes, mat @ state.amplitudes))

    return x, y, n, ev


# -- quadrature moments ------------------------------------------------------

def test_vacuum_quadratures():
    moments = quadrature_moments(vacuum_state(FockBasis(1, 4)))
    assert moments.x_mean == 0.0 and moments.y_mean == 0.0
    assert abs(moments.x_var - 0.25) < 1e-14
    assert abs(moments.y_var - 0.25) < 1e-14
    assert moments.n_mean == 0.0 and moments.n_var == 0.0
    assert moments.f_x == 0.0 and moments.f_y == 0.0


def test_single_photon_quadratures():
    moments = quadrature_moments(number_state(FockBasis(1, 4), (1,)))
    assert abs(moments.x_var - 0.75) < 1e-14
    assert abs(moments.y_var - 0.75) < 1e-14
    assert abs(moments.n_mean - 1.0) < 1e-14
    assert moments.n_var == 0.0
    assert abs(moments.f_x) < 1e-14 and abs(moments.f_y) < 1e-14


def test_coherent_quadratures_match_ladder_reference():
    basis = FockBasis(1, 24)
    psi = coherent_state(basis, [0.3 + 0.4j])
    moments = quadrature_moments(psi)
    x, y, n, ev = reference_quadratures(psi)
    assert abs(moments.x_mean - ev(x).real) < 1e-12
    assert abs(moments.y_mean - ev(y).real) < 1e-12
    assert abs(moments.x_var - (ev(x @ x).real - ev(x).real ** 2)) < 1e-12
    f_x = (ev(x).real + 2.0 * ev(n).real * ev(x).real - ev(x @ n + n @ x).real)
    assert abs(moments.f_x - f_x) < 1e-12


def test_quadratures_reject_multimode_state():
    with pytest.raises(BrightError):
        quadrature_moments(vacuum_state(FockBasis(2, 2)))


# -- decomposition structure -------------------------------------------------

def test_decomposition_blocks():
    moments = quadrature_moments(number_state(FockBasis(1, 4), (1,)))
    dec = bright_decomposition(moments)
    assert np.max(np.abs(dec.m2 - np.diag([0.75, 0.75, 0.25]))) < 1e-14
    assert np.max(np.abs(dec.m1)) < 1e-14
    assert np.max(np.abs(dec.m0 - np.diag([0.25, 0.25, 0.0]))) < 1e-14


def test_m1_vanishes_on_number_states():
    basis = FockBasis(1, 6)
    for n in (0, 1, 2):
        dec = bright_decomposition(quadrature_moments(number_state(basis, (n,))))
        assert np.max(np.abs(dec.m1)) < 1e-13


def test_vacuum_series_is_isotropic():
    dec = bright_decomposition(quadrature_moments(vacuum_state(FockBasis(1, 4))))
    for alpha in (0.0, 0.5, 1.0, 2.0):
        cov = series_covariance(alpha, dec).matrix
        assert np.max(np.abs(cov - np.eye(3) * alpha ** 2 / 4.0)) < 1e-14


# -- series exactness against the joint state --------------------------------

def reference_states(n_max):
    basis = FockBasis(1, n_max)
    return {
        "vacuum": vacuum_state(basis),
        "one": number_state(basis, (1,)),
        "coherent": coherent_state(basis, [0.3]),
    }


def test_series_matches_joint_state_covariance():
    n_max = 28
    joint_basis = FockBasis(2, n_max)
    ops = schwinger_set(joint_basis)
    for name, a2 in reference_states(n_max).items():
        dec = bright_decomposition(quadrature_moments(a2))
        for alpha in (0.0, 0.5, 1.0, 2.0):
            reference = coherent_state(FockBasis(1, n_max), [alpha])
            joint = product_state(joint_basis,
                                  [reference.amplitudes, a2.amplitudes])
            weight = (reference.truncation_weight + a2.truncation_weight
                      + joint.truncation_weight)
            # truncating weight w at the cutoff moves second moments by
            # up to ~ w n_max^2
            tolerance = (n_max + 1) ** 2 * weight + 1e-10
            assert tolerance < 1e-8, (name, alpha)
            direct = covariance_matrix(ops, joint).matrix
            series = series_covariance(alpha, dec).matrix
            assert np.max(np.abs(series - direct)) < tolerance, (name, alpha)


def test_mean_relations_match_joint_state():
    n_max = 24
    joint_basis = FockBasis(2, n_max)
    ops = schwinger_set(joint_basis)
    a2 = coherent_state(FockBasis(1, n_max), [0.3])
    moments = quadrature_moments(a2)
    alpha = 1.5
    joint = product_state(joint_basis,
                          [coherent_state(FockBasis(1, n_max), [alpha]).amplitudes,
                           a2.amplitudes])
    expected = mean_relations(alpha, moments)
    direct = mean_vector(ops, joint)
    assert np.max(np.abs(expected - direct)) < 1e-8


def test_two_coherent_modes_give_isotropic_covariance():
    # coherent pair: M = (<n_total>/4) I, an independent closed form
    n_max = 26
    a2 = coherent_state(FockBasis(1, n_max), [0.3])
    dec = bright_decomposition(quadrature_moments(a2))
    alpha = 1.2
    cov = series_covariance(alpha, dec).matrix
    expected = (alpha ** 2 + 0.09) / 4.0
    assert np.max(np.abs(cov - np.eye(3) * expected)) < 1e-9


def test_real_alignment():
    alpha = 1.2 * np.exp(0.7j)
    mag, angle = real_alignment(alpha)
    assert abs(mag - 1.2) < 1e-14
    assert abs(alpha * np.exp(1j * angle) - 1.2) < 1e-14


# -- homodyne asymptote ------------------------------------------------------

def test_asymptote_frozen_vacuum_values():
    moments = quadrature_moments(vacuum_state(FockBasis(1, 4)))
    asym = homodyne_asymptotics(8.0, CONFIG, moments)
    # floor (1 + r^2)/(4 t^2) = 1/2 at t^2 = 2/3
    assert abs(asym.variance_1 - 64.0 * 0.75) < 1e-12
    assert abs(asym.variance_2 - 64.0 * 0.75) < 1e-12
    assert abs(asym.symmetric_12) < 1e-14


def test_convergence_rows_exact_cross_moment():
    state = number_state(FockBasis(1, 8), (1,))
    rows = convergence_report([1.0, 2.0, 4.0, 8.0], state, CONFIG)
    for row in rows:
        assert row.cross_residual < 1e-10


def test_asymptote_deviation_shrinks_with_alpha():
    # single-photon reference arm: Var jt_1 = (5 a^2 + 3)/4 exactly, so the
    # relative gap to the a^2 5/4 asymptote is 3/(5 a^2 + 3)
    state = number_state(FockBasis(1, 8), (1,))
    rows = convergence_report([1.0, 2.0, 4.0, 8.0], state, CONFIG)
    deviations = [row.relative_deviation_1 for row in rows]
    assert all(d1 > d2 for d1, d2 in zip(deviations, deviations[1:]))
    assert abs(rows[1].exact_variance_1 - (5.0 * 4.0 + 3.0) / 4.0) < 1e-10
    assert abs(rows[1].relative_deviation_1 - 3.0 / 23.0) < 1e-10


def test_convergence_rejects_negative_alpha():
    state = vacuum_state(FockBasis(1, 4))
    with pytest.raises(BrightError):
        convergence_report([-1.0], state, CONFIG)
