"""Shot sampling of occupation outcomes and moment estimation.

Sampling draws basis-tuple outcomes from the exact outcome distribution by
inverse CDF.  The uniform stream is blocked: block b of a run with seed s and
stream t uses a counter-based generator keyed by (s, t << 32 | b), so any
record is reproducible from (seed, stream, shot index) alone, independent of
execution order or thread count.  Estimators are the unbiased sample moments
with delete-one jackknife standard errors in closed form.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._kernels import outcome_lookup
from .fock import Ensemble, FockBasis, StateVector

PRNG_VERSION = "philox2x64-v1"
BLOCK_SIZE = 16384


class MeasureError(ValueError):
    """Invalid distribution, records or estimator input."""


@dataclass(frozen=True)
class DetectorPairing:
    """Scaled count difference scale * (n[plus] - n[minus]) read per shot.

    `component` tags which angular-momentum component the value estimates
    (report bookkeeping only; it never enters the arithmetic).
    """

    label: str
    plus: int
    minus: int
    scale: float = 1.0
    component: int = None

    def values(self, occupations: np.ndarray) -> np.ndarray:
        return self.scale * (occupations[:, self.plus].astype(float)
                             - occupations[:, self.minus].astype(float))

    def to_dict(self) -> dict:
        return {"label": self.label, "plus": self.plus, "minus": self.minus,
                "scale": self.scale, "component": self.component}

    @staticmethod
    def from_dict(data: dict) -> "DetectorPairing":
        return DetectorPairing(
            label=data["label"], plus=int(data["plus"]), minus=int(data["minus"]),
            scale=float(data["scale"]), component=data.get("component"))


class OutcomeDistribution:
    """Probabilities over the occupation tuples of a basis."""

    def __init__(self, basis: FockBasis, probabilities: np.ndarray):
        probabilities = np.asarray(probabilities, dtype=float)
        if probabilities.shape != (basis.dimension,):
            raise MeasureError(
                f"need {basis.dimension} probabilities, got {probabilities.shape}")
        if probabilities.min() < -1e-12:
            raise MeasureError(
                f"negative probability {probabilities.min():.3e}")
        probabilities = np.clip(probabilities, 0.0, None)
        total = float(probabilities.sum())
        if not 0.0 < total <= 1.0 + 1e-9:
            raise MeasureError(f"probabilities sum to {total}")
        self.basis = basis
        # missing weight = truncated population; renormalize so sampling is
        # conditioned on the retained sector
        self.missing_weight = max(0.0, 1.0 - total)
        self.probabilities = probabilities / total
        self._cdf = None

    def cumulative(self) -> np.ndarray:
        if self._cdf is None:
            self._cdf = np.cumsum(self.probabilities)
        return self._cdf

    def exact_moments(self, pairing: DetectorPairing):
        """Population mean and variance of the pairing value."""
        occ = self.basis.occupations
        v = pairing.scale * (occ[:, pairing.plus] - occ[:, pairing.minus])
        mean = float(self.probabilities @ v)
        var = float(self.probabilities @ (v - mean) ** 2)
        return mean, var


def outcome_distribution(state) -> OutcomeDistribution:
    """Born probabilities of photon-count outcomes for a state or mixture."""
    if isinstance(state, StateVector):
        return OutcomeDistribution(state.basis, state.probabilities())
    if isinstance(state, Ensemble):
        probs = np.zeros(state.basis.dimension)
        for weight, part in state.parts:
            probs += weight * part.probabilities()
        return OutcomeDistribution(state.basis, probs)
    raise MeasureError(f"expected StateVector or Ensemble, got {type(state)}")


@dataclass
class SampleRecords:
    """Raw occupation counts per shot plus the provenance to regenerate them."""

    occupations: np.ndarray
    seed: int
    stream: int
    n_max: int = None
    metadata: dict = field(default_factory=dict)
    prng_version: str = PRNG_VERSION

    def __post_init__(self):
        if self.occupations.ndim != 2:
            raise MeasureError("occupations must be a (shots, modes) table")
        if self.occupations.size and self.occupations.min() < 0:
            raise MeasureError("negative count in records")
        if self.n_max is not None and self.occupations.size:
            worst = int(self.occupations.sum(axis=1).max())
            if worst > self.n_max:
                raise MeasureError(
                    f"record with total count {worst} exceeds n_max {self.n_max}")

    @property
    def shots(self) -> int:
        return self.occupations.shape[0]

    @property
    def mode_count(self) -> int:
        return self.occupations.shape[1]

    def values(self, pairing: DetectorPairing) -> np.ndarray:
        if not (0 <= pairing.plus < self.mode_count
                and 0 <= pairing.minus < self.mode_count):
            raise MeasureError(
                f"pairing {pairing.label!r} addresses modes outside 0..{self.mode_count - 1}")
        return pairing.values(self.occupations)

    def pairings(self) -> list:
        """Detector pairings recorded by the scheme that produced the records."""
        stored = self.metadata.get("pairings")
        if not stored:
            raise MeasureError("records carry no detector-pairing metadata")
        return [DetectorPairing.from_dict(item) for item in stored]


def sample(distribution: OutcomeDistribution, shots: int, seed: int, *,
           stream: int = 0, metadata: dict = None) -> SampleRecords:
    """Draw occupation tuples; identical records for identical (seed, stream)."""
    if shots < 1:
        raise MeasureError(f"shots must be positive, got {shots}")
    if not 0 <= seed < 2 ** 64:
        raise MeasureError("seed must fit in 64 bits")
    if not 0 <= stream < 2 ** 32:
        raise MeasureError("stream must fit in 32 bits")
    cdf = distribution.cumulative()
    indices = np.empty(shots, dtype=np.int64)
    for block in range((shots + BLOCK_SIZE - 1) // BLOCK_SIZE):
        lo = block * BLOCK_SIZE
        hi = min(shots, lo + BLOCK_SIZE)
        key = np.array([seed, (stream << 32) | block], dtype=np.uint64)
        uniforms = np.random.Generator(np.random.Philox(key=key)).random(hi - lo)
        indices[lo:hi] = outcome_lookup(cdf, uniforms)
    occupations = distribution.basis.occupations[indices].copy()
    return SampleRecords(occupations=occupations, seed=int(seed), stream=int(stream),
                         n_max=distribution.basis.n_max,
                         metadata=dict(metadata or {}))


# -- jackknife building blocks (delete-one, closed form) ---------------------

def delete_one_means(values: np.ndarray) -> np.ndarray:
    n = values.size
    return (values.sum() - values) / (n - 1)


def delete_one_variances(values: np.ndarray) -> np.ndarray:
    """Unbiased variance of each leave-one-out subsample.

    With S = sum (v - vbar)^2, removing shot i gives
    S_(i) = S - (v_i - vbar)^2 * n / (n - 1), normalized by n - 2.
    """
    n = values.size
    if n < 3:
        raise MeasureError("need at least 3 shots for leave-one-out variances")
    centered = values - values.mean()
    s_full = float(centered @ centered)
    return (s_full - centered ** 2 * (n / (n - 1))) / (n - 2)


def delete_one_covariances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.size
    if n < 3:
        raise MeasureError("need at least 3 shots for leave-one-out covariances")
    ca = a - a.mean()
    cb = b - b.mean()
    c_full = float(ca @ cb)
    return (c_full - ca * cb * (n / (n - 1))) / (n - 2)


def jackknife_se(leave_one_out: np.ndarray) -> float:
    n = leave_one_out.size
    centered = leave_one_out - leave_one_out.mean()
    return math.sqrt((n - 1) / n * float(centered @ centered))


@dataclass(frozen=True)
class MomentEstimate:
    label: str
    shots: int
    mean: float
    variance: float
    se_mean: float
    se_variance: float

    def to_dict(self) -> dict:
        return {"label": self.label, "shots": self.shots,
                "mean": {"value": self.mean, "se": self.se_mean},
                "variance": {"value": self.variance, "se": self.se_variance}}


def estimate_mean_variance(records: SampleRecords,
                           pairing: DetectorPairing) -> MomentEstimate:
    """Sample mean and unbiased variance with jackknife standard errors.

    Two shots give a variance but no variance-of-variance (NaN standard
    error); fewer than two is an error.
    """
    v = records.values(pairing)
    n = v.size
    if n < 2:
        raise MeasureError("variance needs at least 2 shots")
    mean = float(v.mean())
    variance = float(((v - mean) @ (v - mean)) / (n - 1))
    se_mean = math.sqrt(variance / n)
    if n < 3:
        se_variance = float("nan")
    else:
        se_variance = jackknife_se(delete_one_variances(v))
    return MomentEstimate(label=pairing.label, shots=n, mean=mean,
                          variance=variance, se_mean=se_mean,
                          se_variance=se_variance)


@dataclass(frozen=True)
class CovarianceEstimate:
    label: str
    shots: int
    value: float
    se: float

    def to_dict(self) -> dict:
        return {"label": self.label, "shots": self.shots,
                "covariance": {"value": self.value, "se": self.se}}


def estimate_covariance(records: SampleRecords, pairing_a: DetectorPairing,
                        pairing_b: DetectorPairing) -> CovarianceEstimate:
    """Unbiased sample covariance of two pairings over the same shots."""
    a = records.values(pairing_a)
    b = records.values(pairing_b)
    n = a.size
    if n < 2:
        raise MeasureError("covariance needs at least 2 shots")
    value = float(((a - a.mean()) @ (b - b.mean())) / (n - 1))
    if n < 3:
        se = float("nan")
    else:
        se = jackknife_se(delete_one_covariances(a, b))
    return CovarianceEstimate(label=f"{pairing_a.label},{pairing_b.label}",
                              shots=n, value=value, se=se)


@dataclass(frozen=True)
class EmpiricalCovariance:
    """Sample covariance matrix of simultaneously read detector differences."""

    labels: tuple
    matrix: np.ndarray
    standard_errors: np.ndarray
    shots: int

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "shots": self.shots,
                "matrix": [list(row) for row in self.matrix],
                "standard_errors": [list(row) for row in self.standard_errors]}


def estimate_covariance_offdiag(records: SampleRecords,
                                pairings=None) -> EmpiricalCovariance:
    """Full empirical covariance of the recorded detector differences.

    The off-diagonals are the quantities a simultaneous scheme reads without
    any correction; the diagonal is the raw (offset-carrying) variance.
    Pairings default to those stored in the record metadata.
    """
    if pairings is None:
        pairings = records.pairings()
    values = np.stack([records.values(p) for p in pairings])
    n = records.shots
    if n < 3:
        raise MeasureError("need at least 3 shots to attach standard errors")
    count = len(pairings)
    matrix = np.empty((count, count))
    se = np.empty((count, count))
    centered = values - values.mean(axis=1, keepdims=True)
    for i in range(count):
        for k in range(i, count):
            matrix[i, k] = matrix[k, i] = float(centered[i] @ centered[k]) / (n - 1)
            if i == k:
                loo = delete_one_variances(values[i])
            else:
                loo = delete_one_covariances(values[i], values[k])
            se[i, k] = se[k, i] = jackknife_se(loo)
    return EmpiricalCovariance(labels=tuple(p.label for p in pairings),
                               matrix=matrix, standard_errors=se, shots=n)


# -- records on disk ---------------------------------------------------------

def _sidecar_path(path) -> Path:
    return Path(str(path) + ".meta.json")


def write_records(records: SampleRecords, path) -> None:
    """CSV of raw counts (shot,n1,...,nK) plus a JSON provenance sidecar."""
    path = Path(path)
    labels = [f"n{m + 1}" for m in range(records.mode_count)]
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["shot"] + labels)
        for shot, row in enumerate(records.occupations):
            writer.writerow([shot] + [int(n) for n in row])
    sidecar = {
        "prng_version": records.prng_version,
        "seed": records.seed,
        "stream": records.stream,
        "shots": records.shots,
        "mode_count": records.mode_count,
        "n_max": records.n_max,
        "metadata": records.metadata,
    }
    with _sidecar_path(path).open("w") as handle:
        json.dump(sidecar, handle, indent=2, sort_keys=True)
        handle.write("\n")


def read_records(path) -> SampleRecords:
    path = Path(path)
    try:
        with warnings.catch_warnings():
            # empty input becomes a MeasureError below; skip loadtxt's warning
            warnings.simplefilter("ignore", UserWarning)
            table = np.loadtxt(path, dtype=np.int64, delimiter=",",
                               skiprows=1, ndmin=2)
    except MeasureError:
        raise
    except (OSError, ValueError) as exc:
        raise MeasureError(f"cannot read records from {path}: {exc}") from None
    if table.shape[1] < 2:
        raise MeasureError(f"{path} has no count columns")
    occupations = np.ascontiguousarray(table[:, 1:])
    sidecar_file = _sidecar_path(path)
    if sidecar_file.exists():
        sidecar = json.loads(sidecar_file.read_text())
        if sidecar.get("shots") != occupations.shape[0]:
            raise MeasureError(
                f"{path}: sidecar says {sidecar.get('shots')} shots, "
                f"file has {occupations.shape[0]}")
        return SampleRecords(
            occupations=occupations, seed=int(sidecar["seed"]),
            stream=int(sidecar["stream"]), n_max=sidecar.get("n_max"),
            metadata=sidecar.get("metadata", {}),
            prng_version=sidecar.get("prng_version", PRNG_VERSION))
    return SampleRecords(occupations=occupations, seed=0, stream=0,
                         metadata={"source": str(path)})
