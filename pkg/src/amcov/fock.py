"""Truncated multi-mode Fock space with a total-photon-number cutoff.

The basis keeps every occupation tuple (n_1, ..., n_K) with
n_1 + ... + n_K <= n_max, ordered lexicographically, so the dimension is
binomial(n_max + K, K).  Operators that conserve the total photon number are
exact on this basis (they are block diagonal over total-number sectors);
operators that raise the total clip at the cutoff, and the clipped weight is
tracked wherever it matters (coherent states, embeddings, warnings).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

DEFAULT_MAX_DIMENSION = 4_000_000

NORM_TOL = 1e-12


class FockError(ValueError):
    """Invalid basis, state, or operator request."""


class TruncationWarning(UserWarning):
    """A requested object carries non-negligible weight beyond the cutoff."""


def _enumerate_occupations(mode_count: int, n_max: int):
    # lexicographic ascending: first mode is the slowest index
    if mode_count == 1:
        for n in range(n_max + 1):
            yield (n,)
        return
    for n in range(n_max + 1):
        for rest in _enumerate_occupations(mode_count - 1, n_max - n):
            yield (n,) + rest


class FockBasis:
    """Ordered set of occupation tuples with a shared total-number cutoff."""

    def __init__(self, mode_count: int, n_max: int,
                 max_dimension: int = DEFAULT_MAX_DIMENSION):
        if mode_count < 1:
            raise FockError(f"mode_count must be >= 1, got {mode_count}")
        if n_max < 0:
            raise FockError(f"n_max must be >= 0, got {n_max}")
        dim = math.comb(n_max + mode_count, mode_count)
        if dim > max_dimension:
            raise FockError(
                f"basis dimension {dim} exceeds the configured maximum "
                f"{max_dimension} (mode_count={mode_count}, n_max={n_max})")
        self.mode_count = mode_count
        self.n_max = n_max
        self.occupations = np.array(
            list(_enumerate_occupations(mode_count, n_max)), dtype=np.int64)
        self.occupations.setflags(write=False)
        self._index = {tuple(row): i for i, row in enumerate(self.occupations)}
        self._cache: dict = {}

    @property
    def dimension(self) -> int:
        return self.occupations.shape[0]

    def index_of(self, occupation) -> int:
        key = tuple(int(n) for n in occupation)
        try:
            return self._index[key]
        except KeyError:
            raise FockError(
                f"occupation {key} is not in the basis "
                f"(mode_count={self.mode_count}, n_max={self.n_max})") from None

    def occupation_of(self, index: int) -> tuple:
        return tuple(int(n) for n in self.occupations[index])

    def __eq__(self, other):
        return (isinstance(other, FockBasis)
                and other.mode_count == self.mode_count
                and other.n_max == self.n_max)

    def __hash__(self):
        return hash((self.mode_count, self.n_max))

    def __repr__(self):
        return (f"FockBasis(mode_count={self.mode_count}, n_max={self.n_max}, "
                f"dimension={self.dimension})")


def basis_build(mode_count: int, n_max: int,
                max_dimension: int = DEFAULT_MAX_DIMENSION) -> FockBasis:
    """Build the truncated basis; errors if the dimension exceeds the cap."""
    return FockBasis(mode_count, n_max, max_dimension=max_dimension)


@dataclass
class StateVector:
    """Amplitudes over a FockBasis in canonical order.

    truncation_weight records probability lost to the cutoff when the state
    was prepared (coherent tails, embeddings).  Factory functions normalize;
    apply() may return an unnormalized image (e.g. the zero vector from
    annihilating vacuum), flagged by normalized=False.
    """

    basis: FockBasis
    amplitudes: np.ndarray
    truncation_weight: float = 0.0
    normalized: bool = True

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.basis.dimension,):
            raise FockError(
                f"amplitude shape {amps.shape} does not match basis dimension "
                f"{self.basis.dimension}")
        self.amplitudes = amps
        if self.normalized and abs(self.norm() - 1.0) > NORM_TOL:
            raise FockError(
                f"state marked normalized but |norm - 1| = "
                f"{abs(self.norm() - 1.0):.3e}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass
class Ensemble:
    """Convex mixture of pure states on a common basis."""

    basis: FockBasis
    parts: list = field(default_factory=list)  # (weight, StateVector) pairs

    def __post_init__(self):
        if not self.parts:
            raise FockError("ensemble needs at least one component")
        total = 0.0
        for weight, state in self.parts:
            if weight < 0:
                raise FockError(f"ensemble weight {weight} is negative")
            if state.basis != self.basis:
                raise FockError("ensemble components live on different bases")
            total += weight
        if abs(total - 1.0) > 1e-9:
            raise FockError(f"ensemble weights sum to {total}, expected 1")
        # wash out rounding so moment combinations are exactly convex
        self.parts = [(w / total, s) for w, s in self.parts]


def state_from_amplitudes(basis: FockBasis, amplitudes,
                          truncation_weight: float = 0.0) -> StateVector:
    """Normalize raw amplitudes into a StateVector."""
    amps = np.asarray(amplitudes, dtype=np.complex128)
    if amps.shape != (basis.dimension,):
        raise FockError(
            f"amplitude shape {amps.shape} does not match basis dimension "
            f"{basis.dimension}")
    norm = np.linalg.norm(amps)
    if norm == 0.0:
        raise FockError("cannot normalize the zero vector")
    return StateVector(basis, amps / norm, truncation_weight=truncation_weight)


def number_state(basis: FockBasis, occupation) -> StateVector:
    """Fock state |n_1, ..., n_K>; errors when the total exceeds the cutoff."""
    amps = np.zeros(basis.dimension, dtype=np.complex128)
    amps[basis.index_of(occupation)] = 1.0
    return StateVector(basis, amps)


def vacuum_state(basis: FockBasis) -> StateVector:
    return number_state(basis, (0,) * basis.mode_count)


def coherent_state(basis: FockBasis, alphas,
                   warn_threshold: float = 1e-6) -> StateVector:
    """Truncated multi-mode coherent state.

    Amplitudes follow exp(-|alpha|^2/2) prod alpha_k^{n_k} / sqrt(n_k!); the
    kept weight is renormalized and the exact discarded tail is recorded as
    truncation_weight.  The tail equals the upper tail of a Poisson law with
    mean sum_k |alpha_k|^2 and is evaluated by direct series summation.
    """
    alphas = np.asarray(alphas, dtype=np.complex128)
    if alphas.shape != (basis.mode_count,):
        raise FockError(
            f"need {basis.mode_count} coherent amplitudes, got {alphas.shape}")
    lam = float(np.sum(np.abs(alphas) ** 2))
    log_terms = np.zeros(basis.dimension)
    phases = np.ones(basis.dimension, dtype=np.complex128)
    occ = basis.occupations
    for k in range(basis.mode_count):
        nk = occ[:, k]
        a = alphas[k]
        mag = np.abs(a)
        if mag == 0.0:
            # alpha_k = 0 contributes only n_k = 0
            with np.errstate(divide="ignore"):
                log_terms += np.where(nk == 0, 0.0, -np.inf)
            continue
        log_terms += nk * np.log(mag) - 0.5 * _log_factorial(nk)
        phases *= np.exp(1j * np.angle(a)) ** nk
    amps = np.exp(log_terms - 0.5 * lam) * phases
    kept = float(np.sum(np.abs(amps) ** 2))
    tail = _poisson_tail(lam, basis.n_max)
    if tail > warn_threshold:
        warnings.warn(
            f"coherent state discards weight {tail:.3e} beyond n_max="
            f"{basis.n_max}", TruncationWarning, stacklevel=2)
    if kept == 0.0:
        raise FockError("coherent state has no weight inside the cutoff")
    return StateVector(basis, amps / math.sqrt(kept), truncation_weight=tail)


def _log_factorial(n: np.ndarray) -> np.ndarray:
    return np.array([math.lgamma(int(v) + 1) for v in np.ravel(n)]).reshape(np.shape(n))


def _poisson_tail(lam: float, n_max: int) -> float:
    """P(X > n_max) for X ~ Poisson(lam), by partial series summation."""
    if lam == 0.0:
        return 0.0
    term = math.exp(-lam)
    cdf = term
    for m in range(1, n_max + 1):
        term *= lam / m
        cdf += term
    return max(0.0, 1.0 - cdf)


def product_state(basis: FockBasis, mode_vectors,
                  warn_threshold: float = 1e-6) -> StateVector:
    """Joint state from per-mode amplitude vectors, clipped at the cutoff.

    Each entry of mode_vectors is a 1-d complex array giving that mode's
    amplitudes over n = 0, 1, ...; weight of the product falling outside the
    total-number cutoff is recorded as truncation_weight.
    """
    if len(mode_vectors) != basis.mode_count:
        raise FockError(
            f"need {basis.mode_count} mode vectors, got {len(mode_vectors)}")
    vectors = [np.asarray(v, dtype=np.complex128) for v in mode_vectors]
    total_mass = 1.0
    for v in vectors:
        total_mass *= float(np.sum(np.abs(v) ** 2))
    amps = np.ones(basis.dimension, dtype=np.complex128)
    occ = basis.occupations
    for k, v in enumerate(vectors):
        nk = occ[:, k]
        vals = np.zeros(basis.dimension, dtype=np.complex128)
        inside = nk < v.shape[0]
        vals[inside] = v[nk[inside]]
        amps *= vals
    kept = float(np.sum(np.abs(amps) ** 2))
    lost = max(0.0, total_mass - kept)
    if lost > warn_threshold:
        warnings.warn(
            f"product state discards weight {lost:.3e} beyond n_max="
            f"{basis.n_max}", TruncationWarning, stacklevel=2)
    if kept == 0.0:
        raise FockError("product state has no weight inside the cutoff")
    return StateVector(basis, amps / math.sqrt(kept), truncation_weight=lost)


def embed_state(state: StateVector, basis: FockBasis, modes=None,
                lost_weight_threshold: float = 1e-9) -> StateVector:
    """Embed a state into a larger basis, padding the other modes with vacuum.

    modes gives the destination index of each source mode (default: the first
    mode_count modes).  Weight on source tuples that do not fit under the
    destination cutoff is an error beyond lost_weight_threshold.
    """
    if modes is None:
        modes = tuple(range(state.basis.mode_count))
    if len(modes) != state.basis.mode_count or len(set(modes)) != len(modes):
        raise FockError(f"invalid mode embedding map {modes}")
    amps = np.zeros(basis.dimension, dtype=np.complex128)
    lost = 0.0
    src = state.basis.occupations
    for i, amp in enumerate(state.amplitudes):
        if amp == 0.0:
            continue
        if int(src[i].sum()) > basis.n_max:
            lost += abs(amp) ** 2
            continue
        target = [0] * basis.mode_count
        for k, dest in enumerate(modes):
            target[dest] = int(src[i, k])
        amps[basis.index_of(target)] = amp
    if lost > lost_weight_threshold:
        raise FockError(
            f"embedding would discard weight {lost:.3e} "
            f"(threshold {lost_weight_threshold:.1e}); raise n_max")
    norm = np.linalg.norm(amps)
    return StateVector(basis, amps / norm,
                       truncation_weight=state.truncation_weight + lost)


@dataclass
class LinearOperator:
    """Dense operator over a FockBasis."""

    basis: FockBasis
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        dim = self.basis.dimension
        if mat.shape != (dim, dim):
            raise FockError(
                f"matrix shape {mat.shape} does not match basis dimension {dim}")
        self.matrix = mat

    def adjoint(self) -> "LinearOperator":
        return LinearOperator(self.basis, self.matrix.conj().T)

    def __matmul__(self, other: "LinearOperator") -> "LinearOperator":
        if other.basis != self.basis:
            raise FockError("operator product across different bases")
        return LinearOperator(self.basis, self.matrix @ other.matrix)


def lowering_map(basis: FockBasis, mode: int):
    """Index map of a_mode: target index and sqrt(n) coefficient per source.

    target is -1 where the mode is empty.  Cached on the basis.
    """
    if not 0 <= mode < basis.mode_count:
        raise FockError(f"mode {mode} out of range")
    key = ("lower", mode)
    if key not in basis._cache:
        occ = basis.occupations
        dim = basis.dimension
        targets = np.full(dim, -1, dtype=np.int64)
        coeffs = np.zeros(dim)
        for i in range(dim):
            n = occ[i, mode]
            if n == 0:
                continue
            t = occ[i].copy()
            t[mode] -= 1
            targets[i] = basis._index[tuple(t)]
            coeffs[i] = math.sqrt(n)
        targets.setflags(write=False)
        coeffs.setflags(write=False)
        basis._cache[key] = (targets, coeffs)
    return basis._cache[key]


def raising_map(basis: FockBasis, mode: int):
    """Index map of a_mode^dag; target is -1 where the total hits the cutoff."""
    if not 0 <= mode < basis.mode_count:
        raise FockError(f"mode {mode} out of range")
    key = ("raise", mode)
    if key not in basis._cache:
        occ = basis.occupations
        dim = basis.dimension
        targets = np.full(dim, -1, dtype=np.int64)
        coeffs = np.zeros(dim)
        for i in range(dim):
            if int(occ[i].sum()) >= basis.n_max:
                continue
            t = occ[i].copy()
            t[mode] += 1
            targets[i] = basis._index[tuple(t)]
            coeffs[i] = math.sqrt(occ[i, mode] + 1)
        targets.setflags(write=False)
        coeffs.setflags(write=False)
        basis._cache[key] = (targets, coeffs)
    return basis._cache[key]


def annihilation(basis: FockBasis, mode: int) -> LinearOperator:
    """Truncated annihilation operator for one mode."""
    targets, coeffs = lowering_map(basis, mode)
    mat = np.zeros((basis.dimension, basis.dimension), dtype=np.complex128)
    valid = targets >= 0
    mat[targets[valid], np.nonzero(valid)[0]] = coeffs[valid]
    return LinearOperator(basis, mat)


def creation(basis: FockBasis, mode: int) -> LinearOperator:
    """Adjoint of the truncated annihilation operator (clips at the cutoff)."""
    return annihilation(basis, mode).adjoint()


def number_operator(basis: FockBasis, mode: int) -> LinearOperator:
    if not 0 <= mode < basis.mode_count:
        raise FockError(f"mode {mode} out of range")
    return LinearOperator(basis, np.diag(basis.occupations[:, mode].astype(np.complex128)))


def identity(basis: FockBasis) -> LinearOperator:
    return LinearOperator(basis, np.eye(basis.dimension, dtype=np.complex128))


def expectation(op: LinearOperator, state: StateVector) -> complex:
    if op.basis != state.basis:
        raise FockError("operator and state live on different bases")
    return complex(np.vdot(state.amplitudes, op.matrix @ state.amplitudes))


def apply(op: LinearOperator, state: StateVector) -> StateVector:
    """Image of the state under the operator; not renormalized."""
    if op.basis != state.basis:
        raise FockError("operator and state live on different bases")
    return StateVector(op.basis, op.matrix @ state.amplitudes,
                       truncation_weight=state.truncation_weight,
                       normalized=False)


def _apply_ladder(basis: FockBasis, amps: np.ndarray, mode: int,
                  dagger: bool) -> np.ndarray:
    targets, coeffs = (raising_map if dagger else lowering_map)(basis, mode)
    out = np.zeros_like(amps)
    valid = targets >= 0
    # ladder maps are injective on their support, plain scatter is safe
    out[targets[valid]] = coeffs[valid] * amps[valid]
    return out


def apply_word(state: StateVector, word) -> np.ndarray:
    """Amplitudes of (op_1 ... op_L)|state> for a ladder word.

    word lists (mode, dagger) pairs in operator order, i.e. word[0] is the
    leftmost factor and word[-1] acts on the ket first.  Components pushed
    beyond the cutoff by a raising factor are dropped (projection).
    """
    amps = state.amplitudes
    for mode, dagger in reversed(list(word)):
        amps = _apply_ladder(state.basis, amps, int(mode), bool(dagger))
    return amps


def product_expectation(state: StateVector, word) -> complex:
    """<state| op_1 ... op_L |state> without materializing matrix products.

    Exact whenever no intermediate total exceeds the initial total photon
    number; normal-ordered words (all daggers left of all annihilations)
    always satisfy this.
    """
    return complex(np.vdot(state.amplitudes, apply_word(state, word)))


def state_to_text(state: StateVector) -> str:
    """Serialize as occupation-tuple / amplitude triples, 17 significant digits."""
    lines = [
        f"modes={state.basis.mode_count} nmax={state.basis.n_max} "
        f"truncation_weight={state.truncation_weight:.17g}"
    ]
    occ = state.basis.occupations
    for i, amp in enumerate(state.amplitudes):
        if amp == 0.0:
            continue
        key = ",".join(str(int(n)) for n in occ[i])
        lines.append(f"{key} {amp.real:.17g} {amp.imag:.17g}")
    return "\n".join(lines) + "\n"


def state_from_text(text: str, max_dimension: int = DEFAULT_MAX_DIMENSION) -> StateVector:
    """Inverse of state_to_text."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FockError("empty state text")
    try:
        header = dict(item.split("=", 1) for item in lines[0].split())
        basis = FockBasis(int(header["modes"]), int(header["nmax"]),
                          max_dimension=max_dimension)
        weight = float(header.get("truncation_weight", "0"))
    except (KeyError, ValueError) as exc:
        raise FockError(f"bad state header {lines[0]!r}: {exc}") from None
    amps = np.zeros(basis.dimension, dtype=np.complex128)
    for ln in lines[1:]:
        try:
            key, re_part, im_part = ln.split()
            occupation = tuple(int(v) for v in key.split(","))
            amps[basis.index_of(occupation)] = float(re_part) + 1j * float(im_part)
        except (ValueError, FockError) as exc:
            raise FockError(f"bad state line {ln!r}: {exc}") from None
    return state_from_amplitudes(basis, amps, truncation_weight=weight)
