"""SU(2) elements, their 3d rotations, Fock-space lifts, and optical factors.

An axis-angle element is the 2x2 unitary
U = cos(theta/2) I + i sin(theta/2) (u . sigma), i.e. exp(i theta u . sigma/2).
Its action on the angular-momentum vector is the rotation
R_kl = tr(sigma_l U^dag sigma_k U)/2, and the lift to a two-mode Fock pair is
exp(i theta u . j) built from the bosonic realization, which satisfies the
mode transformation U^dag a_k U = sum_l U2_{kl} a_l.

The optical factors are a symmetric beam splitter (1,i;i,1)/sqrt(2), a
differential phase shifter diag(e^{i phi}, e^{-i phi}), and the closed-form
Mach-Zehnder decomposition of an arbitrary two-mode unitary into
PDS(out) * SBS * PDS(mid) * SBS * PDS(in) times a global phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .fock import FockBasis, LinearOperator, StateVector
from .spin import schwinger_set

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=np.complex128)
PAULI.setflags(write=False)

AXES = np.eye(3)


class SU2Error(ValueError):
    """Invalid element, rotation, or decomposition request."""


@dataclass(frozen=True)
class SU2Element:
    """Axis-angle element exp(i theta u . sigma / 2)."""

    theta: float
    axis: tuple

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        if axis.shape != (3,):
            raise SU2Error(f"axis must be a 3-vector, got shape {axis.shape}")
        norm = np.linalg.norm(axis)
        if abs(norm - 1.0) > 1e-9:
            raise SU2Error(f"axis must be a unit vector, |u| = {norm}")
        object.__setattr__(self, "axis", tuple(axis / norm))

    @property
    def matrix(self) -> np.ndarray:
        u = np.asarray(self.axis)
        half = 0.5 * self.theta
        return (math.cos(half) * np.eye(2, dtype=np.complex128)
                + 1j * math.sin(half) * np.tensordot(u, PAULI, axes=1))

    def generator(self) -> np.ndarray:
        """V = u . sigma / 2, so that matrix = exp(i theta V)."""
        return 0.5 * np.tensordot(np.asarray(self.axis), PAULI, axes=1)

    def to_dict(self) -> dict:
        return {"theta": self.theta, "axis": list(self.axis)}


@dataclass(frozen=True)
class ModeUnitary2:
    """Explicit 2x2 unitary acting on a mode pair."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        if mat.shape != (2, 2):
            raise SU2Error(f"mode unitary must be 2x2, got {mat.shape}")
        if np.max(np.abs(mat.conj().T @ mat - np.eye(2))) > 1e-12:
            raise SU2Error("mode matrix is not unitary within 1e-12")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def to_dict(self) -> dict:
        return {"matrix": [[_c2l(v) for v in row] for row in self.matrix]}


def _c2l(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


@dataclass(frozen=True)
class Rotation3:
    """Orthogonal 3x3 matrix with determinant +1."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.shape != (3, 3):
            raise SU2Error(f"rotation must be 3x3, got {mat.shape}")
        if np.max(np.abs(mat @ mat.T - np.eye(3))) > 1e-10:
            raise SU2Error("rotation matrix is not orthogonal within 1e-10")
        if np.linalg.det(mat) < 0:
            raise SU2Error("rotation matrix must have determinant +1")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)


def su2_from_axis_angle(theta: float, axis) -> SU2Element:
    return SU2Element(float(theta), tuple(np.asarray(axis, dtype=float)))


def su2_from_matrix(matrix) -> SU2Element:
    """Recover (theta, axis) from a 2x2 matrix with det = 1."""
    mat = np.asarray(matrix, dtype=np.complex128)
    if mat.shape != (2, 2):
        raise SU2Error(f"expected a 2x2 matrix, got {mat.shape}")
    if abs(np.linalg.det(mat) - 1.0) > 1e-10:
        raise SU2Error("matrix must have determinant 1 for axis-angle recovery")
    cos_half = 0.5 * np.trace(mat).real
    w = np.array([np.trace(PAULI[k] @ mat) / 2j for k in range(3)])
    if np.max(np.abs(w.imag)) > 1e-9:
        raise SU2Error("matrix is not in SU(2)")
    w = w.real
    sin_half = float(np.linalg.norm(w))
    theta = 2.0 * math.atan2(sin_half, cos_half)
    axis = w / sin_half if sin_half > 1e-12 else np.array([0.0, 0.0, 1.0])
    return SU2Element(theta, tuple(axis))


def _as_matrix(element) -> np.ndarray:
    if isinstance(element, SU2Element) or isinstance(element, ModeUnitary2):
        return element.matrix
    mat = np.asarray(element, dtype=np.complex128)
    if mat.shape != (2, 2):
        raise SU2Error(f"expected an element or 2x2 matrix, got {mat.shape}")
    return mat


def rotation_of(element) -> Rotation3:
    """R_kl = tr(sigma_l U^dag sigma_k U) / 2; global phase drops out."""
    u = _as_matrix(element)
    r = np.empty((3, 3))
    for k in range(3):
        conj = u.conj().T @ PAULI[k] @ u
        for l in range(3):
            val = 0.5 * np.trace(PAULI[l] @ conj)
            if abs(val.imag) > 1e-12:
                raise SU2Error("rotation image has a non-real entry")
            r[k, l] = val.real
    return Rotation3(r)


def compose(a, b):
    """Element acting as 'b first, then a' (matrix product a b)."""
    if isinstance(a, SU2Element) and isinstance(b, SU2Element):
        return su2_from_matrix(a.matrix @ b.matrix)
    if isinstance(a, ModeUnitary2) and isinstance(b, ModeUnitary2):
        return ModeUnitary2(a.matrix @ b.matrix)
    raise SU2Error(f"cannot compose {type(a).__name__} with {type(b).__name__}")


def inverse(element):
    if isinstance(element, SU2Element):
        return SU2Element(-element.theta, element.axis)
    if isinstance(element, ModeUnitary2):
        return ModeUnitary2(element.matrix.conj().T)
    raise SU2Error(f"cannot invert {type(element).__name__}")


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """min over chi of ||a - e^{i chi} b||_F (phase-aligned Frobenius distance).

    Evaluated by aligning b with the phase of tr(b^dag a) and subtracting;
    the closed form sqrt(|a|^2 + |b|^2 - 2|tr|) loses half the significant
    digits to cancellation and cannot resolve distances near 1e-10.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    overlap = np.trace(b.conj().T @ a)
    if overlap == 0.0:
        return float(math.hypot(np.linalg.norm(a), np.linalg.norm(b)))
    chi = overlap / abs(overlap)
    return float(np.linalg.norm(a - chi * b))


# ---------------------------------------------------------------------------
# Fock-space lifts


def fock_lift(element: SU2Element, basis: FockBasis, mode_pair=(0, 1)) -> LinearOperator:
    """exp(i theta u . j) on the mode pair, via the Hermitian eigenbasis.

    Conserves total photon number, so the lift is cutoff-exact and satisfies
    U^dag a_k U = sum_l U2_{kl} a_l with U2 = element.matrix.
    """
    ops = schwinger_set(basis, mode_pair)
    u = np.asarray(element.axis)
    h = (u[0] * ops.j1.matrix + u[1] * ops.j2.matrix + u[2] * ops.j3.matrix)
    w, v = np.linalg.eigh(h)
    mat = (v * np.exp(1j * element.theta * w)) @ v.conj().T
    return LinearOperator(basis, mat)


def lift_mode_matrix(matrix2, basis: FockBasis, mode_pair=(0, 1)) -> LinearOperator:
    """Lift an arbitrary 2x2 mode unitary to the basis, sector by sector."""
    mat2 = _as_matrix(matrix2)
    order, group_start, group_s = _kernels.pair_partition(basis, mode_pair)
    blocks = _kernels.pair_sector_blocks(mat2, basis.n_max)
    out = np.zeros((basis.dimension, basis.dimension), dtype=np.complex128)
    for g in range(group_s.shape[0]):
        s = group_s[g]
        idx = order[group_start[g]:group_start[g + 1]]
        out[np.ix_(idx, idx)] = blocks[s, :s + 1, :s + 1]
    return LinearOperator(basis, out)


def apply_mode_matrix(matrix2, state: StateVector, mode_pair=(0, 1)) -> StateVector:
    """Apply a 2x2 mode unitary to a state without building the dense lift."""
    mat2 = _as_matrix(matrix2)
    partition = _kernels.pair_partition(state.basis, mode_pair)
    blocks = _kernels.pair_sector_blocks(mat2, state.basis.n_max)
    amps = _kernels.apply_pair_unitary(state.amplitudes, partition, blocks)
    return StateVector(state.basis, amps,
                       truncation_weight=state.truncation_weight,
                       normalized=state.normalized)


# ---------------------------------------------------------------------------
# standard elements and optical factors


def standard_element(k: int, sign: int, m: int) -> SU2Element:
    """exp(i theta j_k) with theta = sign * pi / m, for k in {1,2,3}, m in {2,4}."""
    if k not in (1, 2, 3):
        raise SU2Error(f"axis index k must be 1, 2 or 3, got {k}")
    if sign not in (1, -1):
        raise SU2Error(f"sign must be +1 or -1, got {sign}")
    if m not in (2, 4):
        raise SU2Error(f"m must be 2 or 4, got {m}")
    return SU2Element(sign * math.pi / m, tuple(AXES[k - 1]))


def beam_splitter_matrix(k: int, sign: int, m: int) -> ModeUnitary2:
    """Closed-form mode matrix of the standard element for k = 1 or 2.

    With c = cos(theta/2), s = sin(theta/2), theta = sign pi/m:
    axis 2 gives ((c, s), (-s, c)); axis 1 gives ((c, is), (is, c)).
    """
    if k not in (1, 2):
        raise SU2Error(f"beam-splitter axis must be 1 or 2, got {k}")
    if sign not in (1, -1):
        raise SU2Error(f"sign must be +1 or -1, got {sign}")
    if m not in (2, 4):
        raise SU2Error(f"m must be 2 or 4, got {m}")
    half = 0.5 * sign * math.pi / m
    c, s = math.cos(half), math.sin(half)
    if k == 2:
        return ModeUnitary2(np.array([[c, s], [-s, c]], dtype=np.complex128))
    return ModeUnitary2(np.array([[c, 1j * s], [1j * s, c]]))


def sbs() -> ModeUnitary2:
    """Symmetric beam splitter (1, i; i, 1)/sqrt(2)."""
    return ModeUnitary2(np.array([[1, 1j], [1j, 1]]) / math.sqrt(2))


def pds(phi: float) -> ModeUnitary2:
    """Differential phase shifter diag(e^{i phi}, e^{-i phi})."""
    return ModeUnitary2(np.diag([np.exp(1j * phi), np.exp(-1j * phi)]))


def circular_from_linear() -> ModeUnitary2:
    """Mode map from a linear pair to the circular pair, (1, i; 1, -i)/sqrt(2)."""
    return ModeUnitary2(np.array([[1, 1j], [1, -1j]]) / math.sqrt(2))


# ---------------------------------------------------------------------------
# Mach-Zehnder decomposition


@dataclass
class MZIDecomposition:
    """Parameters with PDS(output) SBS PDS(internal) SBS PDS(input) = e^{-i global} target.

    The input-side shifter acts first.  residual is the phase-aligned
    Frobenius distance between the reconstruction and the target.
    """

    input_phase: float
    internal_phase: float
    output_phase: float
    global_phase: float
    residual: float = field(default=0.0)

    def elements(self) -> list:
        """Factors in application order (input side first)."""
        return [pds(self.input_phase), sbs(), pds(self.internal_phase),
                sbs(), pds(self.output_phase)]

    def matrix(self) -> np.ndarray:
        out = np.eye(2, dtype=np.complex128)
        for el in self.elements():
            out = el.matrix @ out
        return np.exp(1j * self.global_phase) * out

    def to_dict(self) -> dict:
        return {
            "input_phase": self.input_phase,
            "internal_phase": self.internal_phase,
            "output_phase": self.output_phase,
            "global_phase": self.global_phase,
            "residual": self.residual,
            "ordering": "input->PDS->SBS->PDS->SBS->PDS->output",
        }


def mzi_decompose(target, tol: float = 1e-10) -> MZIDecomposition:
    """Solve PDS(d) SBS PDS(f) SBS PDS(p) = e^{-i g} target in closed form.

    Uses PDS(d) SBS PDS(f) SBS PDS(p) =
    [[i sin f e^{i(d+p)}, i cos f e^{i(d-p)}],
     [i cos f e^{-i(d-p)}, -i sin f e^{-i(d+p)}]],
    matched against the SU(2) part of the target.
    """
    mat = _as_matrix(target)
    if np.max(np.abs(mat.conj().T @ mat - np.eye(2))) > 1e-12:
        raise SU2Error("decomposition target is not unitary within 1e-12")
    det = np.linalg.det(mat)
    gamma = 0.5 * np.angle(det)
    su2 = np.exp(-1j * gamma) * mat
    a, b = su2[0, 0], su2[0, 1]
    f = math.atan2(abs(a), abs(b))
    if abs(a) < 1e-14:
        arg_b = float(np.angle(b)) - 0.5 * math.pi
        arg_a = arg_b
    elif abs(b) < 1e-14:
        arg_a = float(np.angle(a)) - 0.5 * math.pi
        arg_b = arg_a
    else:
        arg_a = float(np.angle(a)) - 0.5 * math.pi
        arg_b = float(np.angle(b)) - 0.5 * math.pi
    d = 0.5 * (arg_a + arg_b)
    p = 0.5 * (arg_a - arg_b)
    dec = MZIDecomposition(input_phase=p, internal_phase=f, output_phase=d,
                           global_phase=gamma)
    dec.residual = phase_distance(dec.matrix(), mat)
    if dec.residual > tol:
        raise SU2Error(
            f"Mach-Zehnder decomposition failed: residual {dec.residual:.3e}")
    return dec


def reference_mzi_parameters(k: int, sign: int, m: int,
                             tol: float = 1e-10) -> MZIDecomposition:
    """Known closed-form phase triples that realize the standard beam splitters.

    With theta = sign pi/m and the ordering of MZIDecomposition (input-side
    shifter first): the axis-2 family uses (input, internal, output) =
    (pi/2, theta/2 - pi/2, 0); the axis-1 family uses
    (pi/4, theta/2 - pi/2, pi/4).  Both reconstruct exactly, global phase 0.
    """
    if k not in (1, 2):
        raise SU2Error(f"axis must be 1 or 2, got {k}")
    theta = sign * math.pi / m
    if k == 2:
        dec = MZIDecomposition(input_phase=0.5 * math.pi,
                               internal_phase=0.5 * theta - 0.5 * math.pi,
                               output_phase=0.0, global_phase=0.0)
    else:
        dec = MZIDecomposition(input_phase=0.25 * math.pi,
                               internal_phase=0.5 * theta - 0.5 * math.pi,
                               output_phase=0.25 * math.pi, global_phase=0.0)
    target = beam_splitter_matrix(k, sign, m).matrix
    dec.residual = phase_distance(dec.matrix(), target)
    if dec.residual > tol:
        raise SU2Error(
            f"reference parameters do not reproduce the target: "
            f"residual {dec.residual:.3e}")
    return dec


@dataclass(frozen=True)
class OrderingCheck:
    """Residuals of the stated phase triple under both natural placements.

    The triple (varphi, internal, delta) can put varphi on the input or the
    output shifter; the stated values only identify one of them, so both are
    tried and the match recorded rather than assumed.
    """

    varphi: float
    internal: float
    delta: float
    residual_varphi_input: float
    residual_varphi_output: float
    tolerance: float = 1e-10

    @property
    def matched(self) -> str:
        on_input = self.residual_varphi_input < self.tolerance
        on_output = self.residual_varphi_output < self.tolerance
        if on_input and on_output:
            return "either"
        if on_input:
            return "varphi_input"
        if on_output:
            return "varphi_output"
        return "neither"

    def to_dict(self) -> dict:
        return {
            "varphi": self.varphi,
            "internal": self.internal,
            "delta": self.delta,
            "residual_varphi_input": self.residual_varphi_input,
            "residual_varphi_output": self.residual_varphi_output,
            "matched": self.matched,
        }


def check_reference_ordering(k: int, sign: int, m: int) -> OrderingCheck:
    """Try the closed-form triple with varphi on each side of the MZI.

    For the axis-2 family (varphi = pi/2, delta = 0) only the input-side
    placement reproduces the target; the axis-1 family has varphi = delta,
    so both placements coincide.
    """
    if k not in (1, 2):
        raise SU2Error(f"axis must be 1 or 2, got {k}")
    theta = sign * math.pi / m
    internal = 0.5 * theta - 0.5 * math.pi
    if k == 2:
        varphi, delta = 0.5 * math.pi, 0.0
    else:
        varphi, delta = 0.25 * math.pi, 0.25 * math.pi
    target = beam_splitter_matrix(k, sign, m).matrix
    as_input = MZIDecomposition(input_phase=varphi, internal_phase=internal,
                                output_phase=delta, global_phase=0.0)
    as_output = MZIDecomposition(input_phase=delta, internal_phase=internal,
                                 output_phase=varphi, global_phase=0.0)
    return OrderingCheck(
        varphi=varphi, internal=internal, delta=delta,
        residual_varphi_input=phase_distance(as_input.matrix(), target),
        residual_varphi_output=phase_distance(as_output.matrix(), target))
