"""Simultaneous angular-momentum measurement through passive networks.

Two schemes share the machinery here.  The twelve-port network splits a
two-mode signal with four vacuum ancillas onto six detectors whose scaled
count differences jt_1, jt_2, jt_3 commute, at the price of an additive
vacuum-noise offset on each variance; the offset is a known function of the
beam-splitter transmission and is removed exactly.  The three-copy scheme
taps the signal into three attenuated copies, each read through a fixed
polarization element.

Every quantum prediction has two independent computation paths: normal-ordered
moment propagation through the mode matrix (scales to any photon number) and
full state evolution in a truncated basis (exact for number-conserving
inputs).  Tests hold them against each other.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from . import measure
from .fock import (Ensemble, FockBasis, LinearOperator, StateVector,
                   annihilation, embed_state)
from .spin import CovarianceMatrix
from .su2 import apply_mode_matrix, lift_mode_matrix, standard_element

UNITARY_TOL = 1e-12


class MultiportError(ValueError):
    """Invalid network, configuration or moment table."""


# ---------------------------------------------------------------------------
# networks


@dataclass(frozen=True)
class NetworkUnitary:
    """Mode-amplitude map b = S a with designated signal inputs.

    All non-signal inputs are ancillas assumed in the vacuum state.
    """

    matrix: np.ndarray
    signal_modes: tuple

    def __post_init__(self):
        s = np.asarray(self.matrix, dtype=np.complex128)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise MultiportError(f"network matrix must be square, got {s.shape}")
        if np.max(np.abs(s.conj().T @ s - np.eye(s.shape[0]))) > UNITARY_TOL:
            raise MultiportError("network matrix is not unitary within 1e-12")
        s.setflags(write=False)
        object.__setattr__(self, "matrix", s)
        object.__setattr__(self, "signal_modes", tuple(int(m) for m in self.signal_modes))
        for m in self.signal_modes:
            if not 0 <= m < s.shape[0]:
                raise MultiportError(f"signal mode {m} outside network")

    @property
    def mode_count(self) -> int:
        return self.matrix.shape[0]

    def signal_columns(self) -> np.ndarray:
        return self.matrix[:, list(self.signal_modes)]

    def to_text(self) -> str:
        lines = ["modes= %d signal= %s" % (
            self.mode_count, ",".join(str(m) for m in self.signal_modes))]
        for row in self.matrix:
            lines.append(" ".join("%.17g %.17g" % (z.real, z.imag) for z in row))
        return "\n".join(lines) + "\n"


def network_from_text(text: str) -> NetworkUnitary:
    lines = [l for l in text.splitlines() if l.strip()]
    head = re.match(r"modes=\s*(\d+)\s+signal=\s*([\d,]*)", lines[0])
    if head is None:
        raise MultiportError(f"bad network header {lines[0]!r}")
    n = int(head.group(1))
    signal = tuple(int(x) for x in head.group(2).split(",") if x)
    if len(lines) != n + 1:
        raise MultiportError(f"expected {n} matrix rows, got {len(lines) - 1}")
    mat = np.zeros((n, n), dtype=np.complex128)
    for i, line in enumerate(lines[1:]):
        parts = [float(x) for x in line.split()]
        if len(parts) != 2 * n:
            raise MultiportError(f"row {i} has {len(parts)} numbers, expected {2 * n}")
        mat[i] = np.array(parts[0::2]) + 1j * np.array(parts[1::2])
    return NetworkUnitary(mat, signal)


@dataclass(frozen=True)
class TwelvePortConfig:
    """Transmission t and reflection r of the two final splitters, t != r."""

    t_squared: float = 2.0 / 3.0

    def __post_init__(self):
        if not 0.0 < self.t_squared < 1.0:
            raise MultiportError(
                f"t_squared must lie strictly inside (0, 1), got {self.t_squared}")
        if abs(self.t - self.r) <= 1e-9:
            raise MultiportError("t and r must differ (t != r)")

    @property
    def t(self) -> float:
        return math.sqrt(self.t_squared)

    @property
    def r(self) -> float:
        return math.sqrt(1.0 - self.t_squared)

    def variance_offsets(self):
        """Additive vacuum offsets on the variances of (jt_1, jt_2) and jt_3,
        per unit <j0>."""
        t2 = self.t_squared
        r2 = 1.0 - t2
        return (1.0 + r2) / (2.0 * t2), t2 / (2.0 * r2)

    def to_dict(self) -> dict:
        return {"t_squared": self.t_squared, "t": self.t, "r": self.r}


def twelve_port_matrix(config: TwelvePortConfig) -> NetworkUnitary:
    """The 6x6 map from (a1, a2, a10, a20, a'10, a'20) to (a3 ... a8).

    The four inner splitters are balanced with a pi phase on the upper-side
    reflections; the two outer ones carry (t, r).  Unitarity is checked by
    the constructor.
    """
    t, r = config.t, config.r
    i = 1j
    mat = np.array([
        [t, -t, 1, -1, r, r],
        [t, t, 1, 1, r, -r],
        [-i * t, t, i, -1, -i * r, -r],
        [-i * t, -t, i, 1, -i * r, r],
        [0, 2 * r, 0, 0, 0, 2 * t],
        [-2 * r, 0, 0, 0, 2 * t, 0],
    ], dtype=np.complex128) / 2.0
    return NetworkUnitary(mat, signal_modes=(0, 1))


def twelve_port_pairings(config: TwelvePortConfig):
    """Detector pairings realizing jt_1, jt_2, jt_3 on outputs (a3 ... a8)."""
    t2 = config.t_squared
    r2 = 1.0 - t2
    return [
        measure.DetectorPairing("jt1", plus=1, minus=0, scale=1.0 / t2, component=1),
        measure.DetectorPairing("jt2", plus=3, minus=2, scale=1.0 / t2, component=2),
        measure.DetectorPairing("jt3", plus=5, minus=4, scale=1.0 / (2.0 * r2), component=3),
    ]


def classical_outputs(config: TwelvePortConfig, a1: complex, a2: complex) -> np.ndarray:
    """Output intensities for deterministic amplitudes, ancillas dark."""
    inputs = np.zeros(6, dtype=np.complex128)
    inputs[0] = a1
    inputs[1] = a2
    b = twelve_port_matrix(config).matrix @ inputs
    return np.abs(b) ** 2


def classical_stokes(intensities: np.ndarray, config: TwelvePortConfig):
    """(j0, j1, j2, j3) from the six intensities; exact and noiseless."""
    intensities = np.asarray(intensities, dtype=float)
    if intensities.shape != (6,):
        raise MultiportError(f"need 6 intensities, got {intensities.shape}")
    t2 = config.t_squared
    r2 = 1.0 - t2
    j0 = intensities.sum() / 2.0
    j1 = (intensities[1] - intensities[0]) / t2
    j2 = (intensities[3] - intensities[2]) / t2
    j3 = (intensities[5] - intensities[4]) / (2.0 * r2)
    return j0, j1, j2, j3


# ---------------------------------------------------------------------------
# normal-ordered moment propagation


@dataclass(frozen=True)
class MomentTable:
    """Second moments <a_k^dag a_l> and normal-ordered fourth moments
    <a_k^dag a_p^dag a_l a_q> of the signal modes."""

    second: np.ndarray
    fourth: np.ndarray

    def __post_init__(self):
        second = np.asarray(self.second, dtype=np.complex128)
        fourth = np.asarray(self.fourth, dtype=np.complex128)
        k = second.shape[0]
        if second.shape != (k, k) or fourth.shape != (k, k, k, k):
            raise MultiportError(
                f"moment shapes {second.shape}, {fourth.shape} are inconsistent")
        if np.max(np.abs(second - second.conj().T)) > 1e-10:
            raise MultiportError("second-moment block is not Hermitian")
        if k and np.linalg.eigvalsh(0.5 * (second + second.conj().T)).min() < -1e-10:
            raise MultiportError("second-moment block is not PSD within 1e-10")
        if (np.max(np.abs(fourth - fourth.transpose(1, 0, 2, 3))) > 1e-10
                or np.max(np.abs(fourth - fourth.transpose(0, 1, 3, 2))) > 1e-10):
            raise MultiportError("fourth moments lack dagger-exchange symmetry")
        if np.max(np.abs(fourth.conj() - fourth.transpose(3, 2, 1, 0))) > 1e-10:
            raise MultiportError("fourth moments lack conjugation symmetry")
        second.setflags(write=False)
        fourth.setflags(write=False)
        object.__setattr__(self, "second", second)
        object.__setattr__(self, "fourth", fourth)

    @property
    def mode_count(self) -> int:
        return self.second.shape[0]


def moment_table(state) -> MomentTable:
    """Moments of a (pure or mixed) state, exact in its truncated basis.

    Lowering never leaves the basis, so every normal-ordered word here is
    clipping-free.
    """
    if isinstance(state, Ensemble):
        parts = [(w, moment_table(p)) for w, p in state.parts]
        second = sum(w * t.second for w, t in parts)
        fourth = sum(w * t.fourth for w, t in parts)
        return MomentTable(second, fourth)
    if not isinstance(state, StateVector):
        raise MultiportError(f"expected StateVector or Ensemble, got {type(state)}")
    basis = state.basis
    k = basis.mode_count
    ann = [annihilation(basis, m).matrix for m in range(k)]
    lowered = [a @ state.amplitudes for a in ann]
    double = [[ann[p] @ lowered[m] for m in range(k)] for p in range(k)]
    second = np.empty((k, k), dtype=np.complex128)
    fourth = np.empty((k, k, k, k), dtype=np.complex128)
    for a in range(k):
        for b in range(k):
            second[a, b] = np.vdot(lowered[a], lowered[b])
    for a in range(k):
        for p in range(k):
            bra = double[p][a]
            for l in range(k):
                for q in range(k):
                    fourth[a, p, l, q] = np.vdot(bra, double[l][q])
    return MomentTable(second, fourth)


def single_mode_moments(state) -> dict:
    """<a^dag^p a^q> for p, q <= 2 of a one-mode state, as a dict."""
    if isinstance(state, Ensemble):
        tables = [(w, single_mode_moments(p)) for w, p in state.parts]
        return {key: sum(w * t[key] for w, t in tables) for key in tables[0][1]}
    basis = state.basis
    if basis.mode_count != 1:
        raise MultiportError("single_mode_moments needs a one-mode state")
    a = annihilation(basis, 0).matrix
    vecs = [state.amplitudes]
    vecs.append(a @ vecs[0])
    vecs.append(a @ vecs[1])
    return {(p, q): complex(np.vdot(vecs[p], vecs[q]))
            for p in range(3) for q in range(3)}


def coherent_moments(alpha: complex) -> dict:
    """Analytic coherent-state moments; exact at any amplitude."""
    alpha = complex(alpha)
    return {(p, q): np.conj(alpha) ** p * alpha ** q
            for p in range(3) for q in range(3)}


def product_moment_table(mode_moments) -> MomentTable:
    """Moment table of a product state from per-mode moment dicts.

    Normal-ordered words factorize over modes, so no joint basis (and no
    joint truncation) is ever built.
    """
    moments = list(mode_moments)
    k = len(moments)
    for m, table in enumerate(moments):
        if abs(table[(0, 0)] - 1.0) > 1e-10:
            raise MultiportError(f"mode {m} moments are not normalized")
        for p in range(3):
            for q in range(3):
                if abs(np.conj(table[(q, p)]) - table[(p, q)]) > 1e-10:
                    raise MultiportError(f"mode {m} moments are not Hermitian")
    second = np.empty((k, k), dtype=np.complex128)
    for a in range(k):
        for b in range(k):
            if a == b:
                second[a, b] = moments[a][(1, 1)]
            else:
                second[a, b] = moments[a][(1, 0)] * moments[b][(0, 1)]
    fourth = np.empty((k, k, k, k), dtype=np.complex128)
    for a in range(k):
        for p in range(k):
            for l in range(k):
                for q in range(k):
                    value = 1.0 + 0.0j
                    for m in range(k):
                        dag = (a == m) + (p == m)
                        low = (l == m) + (q == m)
                        if dag or low:
                            value *= moments[m][(dag, low)]
                    fourth[a, p, l, q] = value
    return MomentTable(second, fourth)


@dataclass(frozen=True)
class TildeStatistics:
    """Means and covariance of the commuting observables jt_1, jt_2, jt_3."""

    means: np.ndarray
    covariance: np.ndarray
    j0_mean: float
    config: TwelvePortConfig

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if means.shape != (3,) or cov.shape != (3, 3):
            raise MultiportError("tilde statistics need a 3-vector and a 3x3 matrix")
        if np.max(np.abs(cov - cov.T)) > 1e-8:
            raise MultiportError("tilde covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        means.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariance", cov)

    def second_moment(self, k: int, l: int) -> float:
        """Non-central <jt_k jt_l>."""
        return self.covariance[k - 1, l - 1] + self.means[k - 1] * self.means[l - 1]

    def to_text(self) -> str:
        c12, c3 = self.config.variance_offsets()
        lines = [
            "t_squared= %.17g" % self.config.t_squared,
            "j0_mean= %.17g" % self.j0_mean,
            "offsets= %.17g %.17g" % (c12, c3),
            "means= " + " ".join("%.17g" % v for v in self.means),
            "covariance=",
        ]
        for row in self.covariance:
            lines.append(" ".join("%.17g" % v for v in row))
        return "\n".join(lines) + "\n"


def _tilde_from_number_moments(n_mean, nn, j0_mean, config) -> TildeStatistics:
    pairings = twelve_port_pairings(config)
    means = np.array([p.scale * (n_mean[p.plus] - n_mean[p.minus]) for p in pairings])
    second = np.empty((3, 3))
    for i, pi in enumerate(pairings):
        for k, pk in enumerate(pairings):
            second[i, k] = pi.scale * pk.scale * (
                nn[pi.plus, pk.plus] - nn[pi.plus, pk.minus]
                - nn[pi.minus, pk.plus] + nn[pi.minus, pk.minus])
    cov = second - np.outer(means, means)
    return TildeStatistics(means=means, covariance=0.5 * (cov + cov.T),
                           j0_mean=j0_mean, config=config)


def propagate_tilde_statistics(config: TwelvePortConfig,
                               table: MomentTable) -> TildeStatistics:
    """Tilde means and covariance from input moments, no state vector needed.

    Output moments contract the signal columns only: every term touching a
    vacuum ancilla is normal ordered and vanishes.  Intensity correlations
    then follow from <n_j n_m> = <:n_j n_m:> + delta_jm <n_j>.
    """
    if table.mode_count != 2:
        raise MultiportError("twelve-port propagation needs a two-mode table")
    sig = twelve_port_matrix(config).signal_columns()
    b2 = sig.conj() @ table.second @ sig.T
    nn_normal = np.einsum("jk,mp,jl,mq,kplq->jm", sig.conj(), sig.conj(),
                          sig, sig, table.fourth, optimize=True)
    if np.max(np.abs(nn_normal.imag)) > 1e-10:
        raise MultiportError("normal-ordered intensity moments are not real")
    n_mean = b2.diagonal().real
    nn = nn_normal.real + np.diag(n_mean)
    j0_mean = 0.5 * (table.second[0, 0] + table.second[1, 1]).real
    return _tilde_from_number_moments(n_mean, nn, j0_mean, config)


def corrected_covariance(stats: TildeStatistics) -> CovarianceMatrix:
    """Remove the exact vacuum offsets from the tilde covariance diagonal."""
    c12, c3 = stats.config.variance_offsets()
    correction = np.diag([c12 * stats.j0_mean, c12 * stats.j0_mean,
                          c3 * stats.j0_mean])
    return CovarianceMatrix(stats.covariance - correction)


# ---------------------------------------------------------------------------
# full-state path


def reck_decompose(s_matrix):
    """Triangular reduction S = G_1^dag ... G_M^dag D into two-mode elements.

    Returns (rotations, phases): rotations is the ordered list of
    ((row-1, row), 2x2 unitary) Givens eliminations, phases the residual
    diagonal angles.  Rebuild with network_from_decomposition.
    """
    s = np.asarray(s_matrix, dtype=np.complex128)
    n = s.shape[0]
    if s.ndim != 2 or s.shape != (n, n):
        raise MultiportError(f"cannot decompose non-square shape {s.shape}")
    if np.max(np.abs(s.conj().T @ s - np.eye(n))) > UNITARY_TOL:
        raise MultiportError("cannot decompose a non-unitary matrix")
    work = s.copy()
    rotations = []
    for col in range(n - 1):
        for row in range(n - 1, col, -1):
            b = work[row, col]
            if abs(b) < 1e-14:
                continue
            a = work[row - 1, col]
            norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
            g = np.array([[np.conj(a), np.conj(b)], [-b, a]]) / norm
            work[row - 1:row + 1, :] = g @ work[row - 1:row + 1, :]
            rotations.append(((row - 1, row), g))
    diag = np.diag(work)
    if (np.max(np.abs(work - np.diag(diag))) > 1e-10
            or np.max(np.abs(np.abs(diag) - 1.0)) > 1e-10):
        raise MultiportError("triangular reduction did not reach a diagonal")
    phases = np.angle(diag)
    rebuilt = network_from_decomposition(n, rotations, phases)
    if np.max(np.abs(rebuilt - s)) > 1e-11:
        raise MultiportError("decomposition failed to reproduce the network")
    return rotations, phases


def network_from_decomposition(n: int, rotations, phases) -> np.ndarray:
    acc = np.diag(np.exp(1j * np.asarray(phases, dtype=float)))
    for (lo, hi), g in reversed(rotations):
        acc[[lo, hi], :] = g.conj().T @ acc[[lo, hi], :]
    return acc


def _phase_vector(basis: FockBasis, phases: np.ndarray) -> np.ndarray:
    return np.exp(1j * (basis.occupations @ np.asarray(phases, dtype=float)))


def fock_lift_network(network, n_max: int) -> LinearOperator:
    """Dense lift of a whole network onto FockBasis(N, n_max).

    The lifted unitary acts per total-photon sector and satisfies
    U^dag a_k U = sum_l S_kl a_l.  Dense: intended for small bases; use
    apply_network for large states.
    """
    s = network.matrix if isinstance(network, NetworkUnitary) else np.asarray(network)
    n = s.shape[0]
    basis = FockBasis(n, n_max)
    rotations, phases = reck_decompose(s)
    mat = np.diag(_phase_vector(basis, phases))
    for pair, g in reversed(rotations):
        mat = lift_mode_matrix(g.conj().T, basis, pair).matrix @ mat
    return LinearOperator(basis, mat)


def apply_network(network, state: StateVector) -> StateVector:
    """Evolve a state through a network without materializing the lift."""
    s = network.matrix if isinstance(network, NetworkUnitary) else np.asarray(network)
    if s.shape[0] != state.basis.mode_count:
        raise MultiportError(
            f"network has {s.shape[0]} modes, state has {state.basis.mode_count}")
    rotations, phases = reck_decompose(s)
    amps = state.amplitudes * _phase_vector(state.basis, phases)
    out = StateVector(state.basis, amps,
                      truncation_weight=state.truncation_weight)
    for pair, g in reversed(rotations):
        out = apply_mode_matrix(g.conj().T, out, pair)
    return out


def twelve_port_output_state(config: TwelvePortConfig, state: StateVector,
                             n_max: int) -> StateVector:
    """Embed a two-mode signal with vacuum ancillas and run the network."""
    if state.basis.mode_count != 2:
        raise MultiportError("the twelve-port signal is two-mode")
    basis6 = FockBasis(6, n_max)
    embedded = embed_state(state, basis6, modes=(0, 1))
    return apply_network(twelve_port_matrix(config), embedded)


def _number_statistics(parts, basis):
    """Exact per-mode count means and <n_j n_m> of a renormalized mixture."""
    occ = basis.occupations.astype(float)
    probs = np.zeros(basis.dimension)
    for weight, part in parts:
        probs += weight * part.probabilities()
    total = probs.sum()
    probs /= total
    n_mean = probs @ occ
    nn = (occ * probs[:, None]).T @ occ
    return probs, n_mean, nn


def full_state_tilde_statistics(config: TwelvePortConfig, state, n_max: int,
                                truncation_threshold: float = 1e-6) -> TildeStatistics:
    """Tilde statistics from explicit network evolution, the slow exact path."""
    if isinstance(state, Ensemble):
        parts = state.parts
    else:
        parts = [(1.0, state)]
    outputs = []
    for weight, part in parts:
        if part.truncation_weight > truncation_threshold:
            raise MultiportError(
                f"input truncation weight {part.truncation_weight:.3e} exceeds "
                f"{truncation_threshold:.1e}; raise n_max")
        outputs.append((weight, twelve_port_output_state(config, part, n_max)))
    basis6 = outputs[0][1].basis
    _, n_mean, nn = _number_statistics(outputs, basis6)
    j0_mean = 0.5 * float(n_mean.sum())
    return _tilde_from_number_moments(n_mean, nn, j0_mean, config)


# ---------------------------------------------------------------------------
# sampled path


def sample_twelve_port(config: TwelvePortConfig, state, n_max: int, shots: int,
                       seed: int, stream: int = 0) -> measure.SampleRecords:
    """Draw detector records from the output counting distribution."""
    if isinstance(state, Ensemble):
        parts = state.parts
    else:
        parts = [(1.0, state)]
    outputs = [(w, twelve_port_output_state(config, p, n_max)) for w, p in parts]
    basis6 = outputs[0][1].basis
    probs, _, _ = _number_statistics(outputs, basis6)
    dist = measure.OutcomeDistribution(basis6, probs)
    metadata = {
        "scheme": "twelveport",
        "config": config.to_dict(),
        "pairings": [p.to_dict() for p in twelve_port_pairings(config)],
    }
    return measure.sample(dist, shots, seed, stream=stream, metadata=metadata)


@dataclass(frozen=True)
class CorrectedCovarianceEstimate:
    """Offset-corrected covariance from records, with jackknife errors.

    The diagonal subtracts coefficient * (sample mean of total counts / 2);
    its standard error jackknifes the composite, so the correlation between
    the raw variance and the subtracted mean is kept.
    """

    matrix: np.ndarray
    standard_errors: np.ndarray
    j0_mean: float
    shots: int
    config: TwelvePortConfig

    def to_dict(self) -> dict:
        return {"matrix": [list(row) for row in self.matrix],
                "standard_errors": [list(row) for row in self.standard_errors],
                "j0_mean": self.j0_mean, "shots": self.shots,
                "config": self.config.to_dict()}


def estimate_corrected_covariance(records: measure.SampleRecords,
                                  config: TwelvePortConfig = None) -> CorrectedCovarianceEstimate:
    """Empirical covariance of (jt_1, jt_2, jt_3) with exact offsets removed."""
    if config is None:
        stored = records.metadata.get("config")
        if stored is None:
            raise MultiportError("records carry no twelve-port config")
        config = TwelvePortConfig(t_squared=stored["t_squared"])
    pairings = twelve_port_pairings(config)
    if records.mode_count != 6:
        raise MultiportError("twelve-port records have six detectors")
    n = records.shots
    if n < 3:
        raise MultiportError("need at least 3 shots")
    values = np.stack([records.values(p) for p in pairings])
    j0_values = records.occupations.sum(axis=1) / 2.0
    c12, c3 = config.variance_offsets()
    coefficients = (c12, c12, c3)
    matrix = np.empty((3, 3))
    se = np.empty((3, 3))
    centered = values - values.mean(axis=1, keepdims=True)
    loo_j0 = measure.delete_one_means(j0_values)
    for i in range(3):
        for k in range(i, 3):
            raw = float(centered[i] @ centered[k]) / (n - 1)
            if i == k:
                matrix[i, i] = raw - coefficients[i] * float(j0_values.mean())
                loo = (measure.delete_one_variances(values[i])
                       - coefficients[i] * loo_j0)
            else:
                matrix[i, k] = matrix[k, i] = raw
                loo = measure.delete_one_covariances(values[i], values[k])
            se[i, k] = se[k, i] = measure.jackknife_se(loo)
    return CorrectedCovarianceEstimate(matrix=matrix, standard_errors=se,
                                       j0_mean=float(j0_values.mean()),
                                       shots=n, config=config)


# ---------------------------------------------------------------------------
# three-copy scheme


@dataclass(frozen=True)
class ArmReadout:
    """One attenuated copy: its mode pair, the element before the detectors,
    which component the scaled difference estimates, and with which sign."""

    modes: tuple
    element: np.ndarray
    component: int
    orientation: int
    fraction: float


@dataclass(frozen=True)
class Fig5Scheme:
    network: NetworkUnitary
    arms: tuple

    def to_dict(self) -> dict:
        return {"arms": [{"modes": list(a.modes), "component": a.component,
                          "orientation": a.orientation, "fraction": a.fraction}
                         for a in self.arms]}


def fig5_network(splitting_1: float = 1.0 / 3.0,
                 splitting_2: float = 0.5) -> Fig5Scheme:
    """Three-copy polarimetric scheme on 2 signal + 4 ancilla modes.

    Two spatial splitters tap intensity fractions (s1, (1-s1)s2,
    (1-s1)(1-s2)) into three arms; each arm passes a fixed polarization
    element so its count difference estimates j1, j3 (sign flipped), j2.
    Defaults give three balanced 1/3 copies.
    """
    s1, s2 = float(splitting_1), float(splitting_2)
    if not (0.0 < s1 < 1.0 and 0.0 < s2 < 1.0):
        raise MultiportError("splitting ratios must lie strictly inside (0, 1)")
    c1, d1 = math.sqrt(s1), math.sqrt(1.0 - s1)
    c2, d2 = math.sqrt(s2), math.sqrt(1.0 - s2)
    spatial3 = np.array([
        [c1, d1, 0.0],
        [c2 * d1, -c2 * c1, d2],
        [d2 * d1, -d2 * c1, -c2],
    ])
    spatial = np.zeros((6, 6), dtype=np.complex128)
    for pol in (0, 1):
        spatial[pol::2, pol::2] = spatial3
    elements = (np.eye(2, dtype=np.complex128),
                standard_element(2, 1, 2).matrix,
                standard_element(3, 1, 2).matrix)
    full = np.zeros((6, 6), dtype=np.complex128)
    for arm, w in enumerate(elements):
        full[2 * arm:2 * arm + 2, 2 * arm:2 * arm + 2] = w
    network = NetworkUnitary(full @ spatial, signal_modes=(0, 1))
    fractions = (s1, (1.0 - s1) * s2, (1.0 - s1) * (1.0 - s2))
    arms = (
        ArmReadout(modes=(0, 1), element=elements[0], component=1,
                   orientation=1, fraction=fractions[0]),
        ArmReadout(modes=(2, 3), element=elements[1], component=3,
                   orientation=-1, fraction=fractions[1]),
        ArmReadout(modes=(4, 5), element=elements[2], component=2,
                   orientation=1, fraction=fractions[2]),
    )
    return Fig5Scheme(network=network, arms=arms)


def fig5_classical_differences(scheme: Fig5Scheme, a1: complex, a2: complex) -> np.ndarray:
    """The three arm readouts for deterministic amplitudes, ancillas dark."""
    inputs = np.zeros(6, dtype=np.complex128)
    inputs[0] = a1
    inputs[1] = a2
    b = scheme.network.matrix @ inputs
    out = np.empty(3)
    for i, arm in enumerate(scheme.arms):
        x, y = arm.modes
        out[i] = (np.conj(b[x]) * b[y]).real
    return out


def fig5_mean_estimates(scheme: Fig5Scheme, state) -> np.ndarray:
    """Estimated (<j1>, <j2>, <j3>) of the input from the three arm means.

    Accepts a two-mode state (or Ensemble) or a prebuilt MomentTable; only
    second moments enter, propagated through the network.
    """
    table = state if isinstance(state, MomentTable) else moment_table(state)
    if table.mode_count != 2:
        raise MultiportError("three-copy scheme reads a two-mode signal")
    sig = scheme.network.signal_columns()
    b2 = sig.conj() @ table.second @ sig.T
    estimates = np.empty(3)
    for arm in scheme.arms:
        x, y = arm.modes
        arm_mean = 0.5 * (b2[x, y] + b2[y, x]).real
        estimates[arm.component - 1] = arm.orientation * arm_mean / arm.fraction
    return estimates
