"""Counting statistics: outcome distributions, Philox sampling, jackknife
estimators, record files."""

import json
import math

import numpy as np
import pytest
import scipy.stats

from amcov import (
    DetectorPairing,
    FockBasis,
    OutcomeDistribution,
    PRNG_VERSION,
    coherent_state,
    number_state,
    outcome_distribution,
    read_records,
    sample,
    vacuum_state,
    write_records,
)
from amcov.fock import Ensemble, state_from_amplitudes
from amcov.measure import (
    MeasureError,
    SampleRecords,
    delete_one_covariances,
    delete_one_means,
    delete_one_variances,
    estimate_covariance,
    estimate_covariance_offdiag,
    estimate_mean_variance,
    jackknife_se,
)

HALF_DIFF = DetectorPairing(label="half_difference", plus=0, minus=1,
                            scale=0.5, component=3)

# sampling machinery is indifferent to where its distribution came from
pytestmark = pytest.mark.filterwarnings("ignore::amcov.fock.TruncationWarning")


# -- outcome distributions ---------------------------------------------------

def test_vacuum_distribution_is_point_mass():
    basis = FockBasis(2, 3)
    dist = outcome_distribution(vacuum_state(basis))
    assert abs(dist.probabilities[basis.index_of((0, 0))] - 1.0) < 1e-15
    assert np.count_nonzero(dist.probabilities > 1e-15) == 1


def test_superposition_distribution_half_half():
    basis = FockBasis(2, 2)
    amps = np.zeros(basis.dimension, dtype=np.complex128)
    amps[basis.index_of((1, 0))] = 1.0
    amps[basis.index_of((0, 1))] = 1.0
    dist = outcome_distribution(state_from_amplitudes(basis, amps))
    assert abs(dist.probabilities[basis.index_of((1, 0))] - 0.5) < 1e-15
    assert abs(dist.probabilities[basis.index_of((0, 1))] - 0.5) < 1e-15


def test_coherent_marginal_is_poisson():
    basis = FockBasis(1, 16)
    lam = 0.9 ** 2
    dist = outcome_distribution(coherent_state(basis, [0.9]))
    kept = scipy.stats.poisson.pmf(np.arange(17), lam)
    kept /= kept.sum()
    for n in range(17):
        assert abs(dist.probabilities[basis.index_of((n,))] - kept[n]) < 1e-13


def test_mixture_distribution_weights():
    basis = FockBasis(2, 2)
    mix = Ensemble(basis, [(0.3, number_state(basis, (1, 0))),
                           (0.7, number_state(basis, (0, 2)))])
    dist = outcome_distribution(mix)
    assert abs(dist.probabilities[basis.index_of((1, 0))] - 0.3) < 1e-15
    assert abs(dist.probabilities[basis.index_of((0, 2))] - 0.7) < 1e-15


def test_exact_moments_match_pairing_arithmetic():
    basis = FockBasis(2, 4)
    psi = coherent_state(basis, [0.5, 0.3])
    dist = outcome_distribution(psi)
    mean, variance = dist.exact_moments(HALF_DIFF)
    values = (basis.occupations[:, 0] - basis.occupations[:, 1]) / 2.0
    expected_mean = float(dist.probabilities @ values)
    expected_var = float(dist.probabilities @ (values - expected_mean) ** 2)
    assert abs(mean - expected_mean) < 1e-14
    assert abs(variance - expected_var) < 1e-14


def test_distribution_rejects_bad_probabilities():
    basis = FockBasis(1, 2)
    with pytest.raises(MeasureError):
        OutcomeDistribution(basis, np.array([0.5, 0.5, 0.5]))
    with pytest.raises(MeasureError):
        OutcomeDistribution(basis, np.array([1.2, -0.2, 0.0]))


# -- sampling ----------------------------------------------------------------

def test_sampling_deterministic_in_seed_and_stream():
    basis = FockBasis(2, 4)
    dist = outcome_distribution(coherent_state(basis, [0.7, 0.2]))
    a = sample(dist, shots=5000, seed=11, stream=2)
    b = sample(dist, shots=5000, seed=11, stream=2)
    assert np.array_equal(a.occupations, b.occupations)
    c = sample(dist, shots=5000, seed=11, stream=3)
    assert not np.array_equal(a.occupations, c.occupations)
    d = sample(dist, shots=5000, seed=12, stream=2)
    assert not np.array_equal(a.occupations, d.occupations)


def test_sampling_prefix_stable_across_shot_counts():
    # block-keyed counters: a shorter run is a prefix of a longer one
    basis = FockBasis(2, 3)
    dist = outcome_distribution(coherent_state(basis, [0.4, 0.1]))
    short = sample(dist, shots=3000, seed=5, stream=0)
    long = sample(dist, shots=40000, seed=5, stream=0)
    assert np.array_equal(long.occupations[:3000], short.occupations)


def test_sampling_chi_square_five_se():
    basis = FockBasis(2, 3)  # 10 outcomes
    psi = coherent_state(basis, [0.6, 0.4])
    dist = outcome_distribution(psi)
    shots = 100000
    records = sample(dist, shots=shots, seed=314, stream=0)
    indices = np.array([basis.index_of(tuple(row)) for row in records.occupations])
    counts = np.bincount(indices, minlength=basis.dimension)
    for i, p in enumerate(dist.probabilities):
        if p < 1e-12:
            assert counts[i] == 0
            continue
        se = math.sqrt(shots * p * (1.0 - p))
        assert abs(counts[i] - shots * p) < 5.0 * se


def test_variance_estimator_unbiased():
    # 200 independent 100-shot estimates; their mean must sit within
    # 3 standard errors of the exact variance
    basis = FockBasis(2, 3)
    psi = coherent_state(basis, [0.5, 0.5j])
    dist = outcome_distribution(psi)
    _, exact_var = dist.exact_moments(HALF_DIFF)
    estimates = []
    for rep in range(200):
        rec = sample(dist, shots=100, seed=900, stream=rep)
        estimates.append(estimate_mean_variance(rec, HALF_DIFF).variance)
    estimates = np.array(estimates)
    se_of_mean = estimates.std(ddof=1) / math.sqrt(estimates.size)
    assert abs(estimates.mean() - exact_var) < 3.0 * se_of_mean


def test_sample_validation():
    dist = outcome_distribution(vacuum_state(FockBasis(1, 1)))
    with pytest.raises(MeasureError):
        sample(dist, shots=0, seed=1)
    with pytest.raises(MeasureError):
        sample(dist, shots=10, seed=-1)
    with pytest.raises(MeasureError):
        sample(dist, shots=10, seed=1, stream=2 ** 32)


# -- jackknife building blocks -----------------------------------------------

def test_delete_one_closed_forms_match_brute_force(rng):
    values = rng.normal(size=199)
    other = rng.normal(size=199)
    loo_mean = delete_one_means(values)
    loo_var = delete_one_variances(values)
    loo_cov = delete_one_covariances(values, other)
    for i in range(0, 199, 17):
        sub = np.delete(values, i)
        sub_other = np.delete(other, i)
        assert abs(loo_mean[i] - sub.mean()) < 1e-12
        assert abs(loo_var[i] - sub.var(ddof=1)) < 1e-12
        manual_cov = ((sub - sub.mean()) @ (sub_other - sub_other.mean())) / (sub.size - 1)
        assert abs(loo_cov[i] - manual_cov) < 1e-12


def test_jackknife_se_of_mean_matches_classic(rng):
    # for the sample mean the jackknife reduces to s/sqrt(n) exactly
    values = rng.normal(size=150)
    se = jackknife_se(delete_one_means(values))
    assert abs(se - values.std(ddof=1) / math.sqrt(values.size)) < 1e-12


# -- moment estimation -------------------------------------------------------

def two_point_records(n_plus: int, n_minus: int) -> SampleRecords:
    occ = np.array([[1, 0]] * n_plus + [[0, 1]] * n_minus, dtype=np.int64)
    return SampleRecords(occupations=occ, seed=0, stream=0, n_max=1, metadata={})


def test_estimate_mean_variance_frozen_oracle():
    # 6 shots at +1/2, 4 at -1/2: mean 0.1, unbiased variance 0.24 + bias term
    rec = two_point_records(6, 4)
    est = estimate_mean_variance(rec, HALF_DIFF)
    assert est.shots == 10
    assert abs(est.mean - 0.1) < 1e-15
    v = np.array([0.5] * 6 + [-0.5] * 4)
    assert abs(est.variance - v.var(ddof=1)) < 1e-15
    assert abs(est.se_mean - math.sqrt(est.variance / 10)) < 1e-15
    assert est.se_variance > 0.0


def test_estimate_mean_variance_edge_counts():
    with pytest.raises(MeasureError):
        estimate_mean_variance(two_point_records(1, 0), HALF_DIFF)
    est = estimate_mean_variance(two_point_records(1, 1), HALF_DIFF)
    assert abs(est.variance - 0.5) < 1e-15
    assert math.isnan(est.se_variance)
    constant = estimate_mean_variance(two_point_records(5, 0), HALF_DIFF)
    assert constant.variance == 0.0
    assert constant.se_variance == 0.0


def test_estimate_covariance_pair(rng):
    occ = rng.integers(0, 4, size=(500, 4))
    rec = SampleRecords(occupations=occ, seed=0, stream=0, n_max=12, metadata={})
    pa = DetectorPairing(label="a", plus=0, minus=1, scale=1.0, component=1)
    pb = DetectorPairing(label="b", plus=2, minus=3, scale=1.0, component=2)
    est = estimate_covariance(rec, pa, pb)
    va, vb = rec.values(pa), rec.values(pb)
    manual = ((va - va.mean()) @ (vb - vb.mean())) / (va.size - 1)
    assert abs(est.value - manual) < 1e-12
    assert est.se > 0.0


def test_estimate_covariance_offdiag_matrix(rng):
    occ = rng.integers(0, 3, size=(400, 4))
    rec = SampleRecords(occupations=occ, seed=0, stream=0, n_max=8, metadata={})
    pa = DetectorPairing(label="a", plus=0, minus=1, scale=0.5, component=1)
    pb = DetectorPairing(label="b", plus=2, minus=3, scale=0.5, component=2)
    emp = estimate_covariance_offdiag(rec, [pa, pb])
    stacked = np.stack([rec.values(pa), rec.values(pb)])
    manual = np.cov(stacked, ddof=1)
    assert np.max(np.abs(emp.matrix - manual)) < 1e-12
    assert emp.labels == ("a", "b")
    assert np.all(emp.standard_errors > 0.0)


def test_independent_components_covary_near_zero():
    basis = FockBasis(4, 2)
    psi = coherent_state(basis, [0.3, 0.3, 0.3, 0.3])
    rec = sample(outcome_distribution(psi), shots=20000, seed=4, stream=0)
    pa = DetectorPairing(label="a", plus=0, minus=1, scale=0.5, component=1)
    pb = DetectorPairing(label="b", plus=2, minus=3, scale=0.5, component=2)
    est = estimate_covariance(rec, pa, pb)
    assert abs(est.value) < 5.0 * est.se


# -- record files ------------------------------------------------------------

def test_write_read_round_trip(tmp_path):
    basis = FockBasis(2, 5)
    dist = outcome_distribution(coherent_state(basis, [0.8, 0.5]))
    meta = {"scheme": "generic", "pairings": [HALF_DIFF.to_dict()]}
    rec = sample(dist, shots=1000, seed=21, stream=1, metadata=meta)
    path = tmp_path / "run.csv"
    write_records(rec, path)
    back = read_records(path)
    assert np.array_equal(back.occupations, rec.occupations)
    assert back.seed == 21 and back.stream == 1
    assert back.n_max == 5
    assert back.metadata == meta
    assert back.prng_version == PRNG_VERSION
    assert back.pairings()[0] == HALF_DIFF


def test_csv_header_and_sidecar_layout(tmp_path):
    rec = two_point_records(2, 1)
    path = tmp_path / "counts.csv"
    write_records(rec, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "shot,n1,n2"
    assert lines[1] == "0,1,0"
    sidecar = json.loads((tmp_path / "counts.csv.meta.json").read_text())
    assert sidecar["shots"] == 3
    assert sidecar["prng_version"] == PRNG_VERSION


def test_read_records_missing_and_corrupt(tmp_path):
    with pytest.raises(MeasureError):
        read_records(tmp_path / "absent.csv")
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(MeasureError):
        read_records(empty)
    bad = tmp_path / "bad.csv"
    bad.write_text("shot,n1\n0,notanumber\n")
    with pytest.raises(MeasureError):
        read_records(bad)


def test_read_records_shot_mismatch(tmp_path):
    rec = two_point_records(3, 2)
    path = tmp_path / "counts.csv"
    write_records(rec, path)
    sidecar_path = tmp_path / "counts.csv.meta.json"
    sidecar = json.loads(sidecar_path.read_text())
    sidecar["shots"] = 99
    sidecar_path.write_text(json.dumps(sidecar))
    with pytest.raises(MeasureError):
        read_records(path)


def test_records_validation():
    with pytest.raises(MeasureError):
        SampleRecords(occupations=np.array([[1, -2]]), seed=0, stream=0,
                      n_max=3, metadata={})
    with pytest.raises(MeasureError):
        SampleRecords(occupations=np.array([[5, 0]]), seed=0, stream=0,
                      n_max=3, metadata={})
