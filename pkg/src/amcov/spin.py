"""Angular-momentum operator sets and their covariance matrices.

Two realizations share one interface: the two-mode bosonic realization
j1 = (a2^dag a1 + a1^dag a2)/2, j2 = i(a2^dag a1 - a1^dag a2)/2,
j3 = (a1^dag a1 - a2^dag a2)/2 with j0 = (n1 + n2)/2, and the familiar
(2j+1)-dimensional spin-j matrices.  Both satisfy [jk, jl] = i sum eps jn
and j1^2 + j2^2 + j3^2 = j0(j0 + 1); the bosonic one is cutoff-exact because
every member conserves total photon number.

The covariance matrix is the symmetrized second-moment matrix
M_kl = (<jk jl + jl jk>)/2 - <jk><jl>; its principal decomposition
M = R_d^t diag(v) R_d fixes sorting, signs, and handedness deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import Ensemble, FockBasis, LinearOperator, StateVector
from .fock import annihilation, number_operator

SYM_TOL = 1e-8


class SpinError(ValueError):
    """Invalid operator set or covariance request."""


@dataclass(frozen=True)
class SpinBasis:
    """Abstract (2j+1)-dimensional carrier space, m ordered descending."""

    j: float

    def __post_init__(self):
        twice = round(2 * self.j)
        if twice < 1 or abs(2 * self.j - twice) > 1e-12:
            raise SpinError(f"j must be a positive half-integer, got {self.j}")

    @property
    def dimension(self) -> int:
        return round(2 * self.j) + 1


@dataclass
class AngularMomentumSet:
    """The four operators (j0, j1, j2, j3) of one realization."""

    j0: LinearOperator
    j1: LinearOperator
    j2: LinearOperator
    j3: LinearOperator
    realization: str = ""

    def component(self, k: int) -> LinearOperator:
        return (self.j0, self.j1, self.j2, self.j3)[k]

    @property
    def basis(self):
        return self.j0.basis

    def vector_part(self):
        return (self.j1, self.j2, self.j3)


def schwinger_set(basis: FockBasis, modes=(0, 1)) -> AngularMomentumSet:
    """Bosonic realization on a mode pair of a truncated Fock basis.

    Every member conserves total photon number, so the truncated matrices are
    exact projections.  Cached on the basis.
    """
    modes = tuple(int(m) for m in modes)
    key = ("schwinger", modes)
    if key in basis._cache:
        return basis._cache[key]
    p, q = modes
    a_p = annihilation(basis, p).matrix
    a_q = annihilation(basis, q).matrix
    cross = a_q.conj().T @ a_p  # a_q^dag a_p
    n_p = number_operator(basis, p).matrix
    n_q = number_operator(basis, q).matrix
    ops = AngularMomentumSet(
        j0=LinearOperator(basis, 0.5 * (n_p + n_q)),
        j1=LinearOperator(basis, 0.5 * (cross + cross.conj().T)),
        j2=LinearOperator(basis, 0.5j * (cross - cross.conj().T)),
        j3=LinearOperator(basis, 0.5 * (n_p - n_q)),
        realization=f"schwinger[nmax={basis.n_max},modes={modes}]",
    )
    validate_algebra(ops)
    basis._cache[key] = ops
    return ops


def spin_j_set(j: float) -> AngularMomentumSet:
    """Spin-j matrices in the j3 eigenbasis, m = j, j-1, ..., -j."""
    basis = SpinBasis(j)
    dim = basis.dimension
    m = j - np.arange(dim)
    raise_coeff = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    jp = np.zeros((dim, dim), dtype=np.complex128)
    jp[np.arange(dim - 1), np.arange(1, dim)] = raise_coeff
    jm = jp.conj().T
    ops = AngularMomentumSet(
        j0=LinearOperator(basis, j * np.eye(dim, dtype=np.complex128)),
        j1=LinearOperator(basis, 0.5 * (jp + jm)),
        j2=LinearOperator(basis, -0.5j * (jp - jm)),
        j3=LinearOperator(basis, np.diag(m.astype(np.complex128))),
        realization=f"spin[j={j}]",
    )
    validate_algebra(ops)
    return ops


@dataclass
class AlgebraReport:
    """Max-abs residuals of the defining operator relations."""

    hermiticity: float
    commutators: float
    j0_commutes: float
    casimir: float

    def max_residual(self) -> float:
        return max(self.hermiticity, self.commutators, self.j0_commutes,
                   self.casimir)

    def to_dict(self) -> dict:
        return {
            "hermiticity": self.hermiticity,
            "commutators": self.commutators,
            "j0_commutes": self.j0_commutes,
            "casimir": self.casimir,
        }


def algebra_report(ops: AngularMomentumSet) -> AlgebraReport:
    """Residuals of hermiticity, commutation, [j0, jk] = 0 and the Casimir."""
    mats = [ops.component(k).matrix for k in range(4)]
    herm = max(float(np.max(np.abs(m - m.conj().T))) for m in mats)
    eps = np.zeros((3, 3, 3))
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[a, b, c] = 1.0
        eps[b, a, c] = -1.0
    comm = 0.0
    for k in range(3):
        for l in range(3):
            lhs = mats[k + 1] @ mats[l + 1] - mats[l + 1] @ mats[k + 1]
            rhs = sum(1j * eps[k, l, n] * mats[n + 1] for n in range(3))
            comm = max(comm, float(np.max(np.abs(lhs - rhs))))
    j0c = max(
        float(np.max(np.abs(mats[0] @ m - m @ mats[0]))) for m in mats[1:])
    casimir_lhs = sum(m @ m for m in mats[1:])
    casimir_rhs = mats[0] @ (mats[0] + np.eye(mats[0].shape[0]))
    casimir = float(np.max(np.abs(casimir_lhs - casimir_rhs)))
    return AlgebraReport(herm, comm, j0c, casimir)


def validate_algebra(ops: AngularMomentumSet, tol: float = 1e-12) -> AlgebraReport:
    report = algebra_report(ops)
    if report.max_residual() > tol:
        raise SpinError(
            f"operator set violates the algebra: residuals {report.to_dict()}")
    return report


# ---------------------------------------------------------------------------
# moments


def _pure_moments(ops: AngularMomentumSet, state: StateVector):
    vecs = [op.matrix @ state.amplitudes for op in ops.vector_part()]
    mean = np.array([np.vdot(state.amplitudes, v) for v in vecs])
    second = np.array([[np.vdot(vk, vl) for vl in vecs] for vk in vecs])
    return mean, second


def _moments(ops: AngularMomentumSet, state):
    """First moments <jk> and Hermitian second moments <jk jl>, k,l = 1..3."""
    if isinstance(state, Ensemble):
        mean = np.zeros(3, dtype=np.complex128)
        second = np.zeros((3, 3), dtype=np.complex128)
        for weight, part in state.parts:
            m, s = _pure_moments(ops, part)
            mean += weight * m
            second += weight * s
        return mean, second
    if not isinstance(state, StateVector):
        raise SpinError(f"expected StateVector or Ensemble, got {type(state)}")
    return _pure_moments(ops, state)


def mean_vector(ops: AngularMomentumSet, state) -> np.ndarray:
    """(<j1>, <j2>, <j3>) as a real vector."""
    mean, _ = _moments(ops, state)
    if np.max(np.abs(mean.imag)) > 1e-10:
        raise SpinError(f"mean vector has imaginary part {mean.imag}")
    return mean.real.copy()


@dataclass
class CovarianceMatrix:
    """Real symmetric 3x3 matrix of symmetrized angular-momentum covariances."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.shape != (3, 3):
            raise SpinError(f"covariance matrix must be 3x3, got {mat.shape}")
        if np.max(np.abs(mat - mat.T)) > SYM_TOL:
            raise SpinError("covariance matrix is not symmetric within tolerance")
        self.matrix = 0.5 * (mat + mat.T)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def to_text(self) -> str:
        return " ".join(f"{v:.17g}" for v in self.matrix.reshape(-1)) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CovarianceMatrix":
        values = [float(v) for v in text.split()]
        if len(values) != 9:
            raise SpinError(f"expected 9 matrix entries, got {len(values)}")
        return cls(np.array(values).reshape(3, 3))


def covariance_matrix(ops: AngularMomentumSet, state,
                      psd_tol: float = 1e-10) -> CovarianceMatrix:
    """Symmetrized covariance matrix of (j1, j2, j3) in the given state."""
    mean, second = _moments(ops, state)
    if np.max(np.abs(mean.imag)) > 1e-10:
        raise SpinError("mean vector has a non-negligible imaginary part")
    mat = second.real - np.outer(mean.real, mean.real)
    cov = CovarianceMatrix(mat)
    if cov.min_eigenvalue() < -psd_tol:
        raise SpinError(
            f"covariance matrix of a quantum state must be PSD; min eigenvalue "
            f"{cov.min_eigenvalue():.3e}")
    return cov


def second_moment_matrix(ops: AngularMomentumSet, state) -> np.ndarray:
    """Complex Hermitian diagnostic <jk jl> - <jk><jl> (not symmetrized)."""
    mean, second = _moments(ops, state)
    return second - np.outer(mean.conj(), mean)


def variance_along(cov: CovarianceMatrix, direction) -> float:
    """u^t M u for a unit vector u."""
    u = _unit(direction)
    return float(u @ cov.matrix @ u)


def correlation_along(cov: CovarianceMatrix, direction_u, direction_v) -> float:
    """u^t M v for unit vectors u, v."""
    u = _unit(direction_u)
    v = _unit(direction_v)
    return float(u @ cov.matrix @ v)


def _unit(direction) -> np.ndarray:
    u = np.asarray(direction, dtype=float)
    if u.shape != (3,):
        raise SpinError(f"direction must be a 3-vector, got shape {u.shape}")
    norm = np.linalg.norm(u)
    if abs(norm - 1.0) > 1e-9:
        raise SpinError(f"direction must be a unit vector, |u| = {norm}")
    return u / norm


@dataclass
class PrincipalDecomposition:
    """Eigen-decomposition M = rotation^t diag(variances) rotation.

    variances sort descending; each axis (a row of rotation) has its first
    non-negligible component positive, and det(rotation) = +1.
    """

    variances: np.ndarray
    rotation: np.ndarray

    @property
    def axes(self) -> np.ndarray:
        return self.rotation

    def to_dict(self) -> dict:
        return {
            "variances": list(self.variances),
            "rotation": [list(row) for row in self.rotation],
        }


def principal_decomposition(cov: CovarianceMatrix) -> PrincipalDecomposition:
    evals, evecs = np.linalg.eigh(cov.matrix)
    order = np.argsort(-evals, kind="stable")
    variances = evals[order]
    rows = evecs[:, order].T.copy()
    for row in rows:
        for component in row:
            if abs(component) > 1e-12:
                if component < 0:
                    row *= -1.0
                break
    if np.linalg.det(rows) < 0:
        rows[2] *= -1.0
    return PrincipalDecomposition(variances=variances, rotation=rows)


def rotate_covariance(cov: CovarianceMatrix, rotation: np.ndarray) -> CovarianceMatrix:
    """M -> R M R^t."""
    r = np.asarray(rotation, dtype=float)
    if r.shape != (3, 3) or np.max(np.abs(r @ r.T - np.eye(3))) > 1e-10:
        raise SpinError("rotation must be a 3x3 orthogonal matrix")
    return CovarianceMatrix(r @ cov.matrix @ r.T)
