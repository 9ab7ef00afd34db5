"""Two-level ensemble dynamics and Ramsey compilation of standard rotations.

In the rotating-wave model the evolution over a constant-drive window has the
closed form U(t) = exp(-i w t j3) exp(-i [(w0 - w) j3 - W j1] t).  Axis-1
rotations come from a resonant pulse completed to a full 2 pi free precession;
axis-2 rotations sandwich the same pulse between quarter-turn free segments,
which conjugate j1 into j2; axis-3 rotations are free evolution alone.  All
durations are kept non-negative by adding whole precession periods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import LinearOperator
from .spin import AngularMomentumSet
from .su2 import phase_distance

TWO_PI = 2.0 * math.pi
VERIFY_TOL = 1e-10


class AtomsError(ValueError):
    """Invalid drive parameters or uncompilable sequence."""


@dataclass(frozen=True)
class DriveParameters:
    """Transition frequency w0, field frequency w, real Rabi frequency W."""

    omega_0: float
    omega: float
    rabi: float

    def __post_init__(self):
        for name in ("omega_0", "omega", "rabi"):
            if not math.isfinite(getattr(self, name)):
                raise AtomsError(f"{name} must be finite")
        if self.rabi < 0:
            raise AtomsError("the Rabi frequency is real and non-negative here")

    def to_dict(self) -> dict:
        return {"omega_0": self.omega_0, "omega": self.omega, "rabi": self.rabi}


@dataclass(frozen=True)
class Segment:
    kind: str
    duration: float

    def __post_init__(self):
        if self.kind not in ("free", "resonant"):
            raise AtomsError(f"unknown segment kind {self.kind!r}")
        if self.duration < 0:
            raise AtomsError(f"negative duration {self.duration}")


@dataclass(frozen=True)
class PulseSequence:
    params: DriveParameters
    segments: tuple
    target: tuple  # (k, sign, m)

    def to_dict(self) -> dict:
        k, sign, m = self.target
        return {
            "target": {"k": k, "sign": sign, "m": m},
            "drive": self.params.to_dict(),
            "segments": [{"kind": s.kind, "duration": s.duration}
                         for s in self.segments],
        }


def _expm_spin(matrix: np.ndarray, factor: complex) -> np.ndarray:
    """exp(1j * factor * matrix) for Hermitian matrix, via its eigenbasis."""
    w, v = np.linalg.eigh(matrix)
    return (v * np.exp(1j * factor * w)) @ v.conj().T


def evolution_operator(params: DriveParameters, duration: float,
                       spin_set: AngularMomentumSet) -> LinearOperator:
    """Constant-drive propagator: frame factor times rotating-frame rotation."""
    if duration < 0:
        raise AtomsError(f"negative duration {duration}")
    j1 = spin_set.component(1).matrix
    j3 = spin_set.component(3).matrix
    frame = _expm_spin(j3, -params.omega * duration)
    rotating = _expm_spin((params.omega_0 - params.omega) * j3 - params.rabi * j1,
                          -duration)
    return LinearOperator(spin_set.basis, frame @ rotating)


def free_evolution(omega_0: float, duration: float,
                   spin_set: AngularMomentumSet) -> LinearOperator:
    if duration < 0:
        raise AtomsError(f"negative duration {duration}")
    j3 = spin_set.component(3).matrix
    return LinearOperator(spin_set.basis, _expm_spin(j3, -omega_0 * duration))


def resonant_evolution(omega_0: float, rabi: float, duration: float,
                       spin_set: AngularMomentumSet) -> LinearOperator:
    """On-resonance drive: exp(-i w0 t j3) exp(+i W t j1)."""
    if duration < 0:
        raise AtomsError(f"negative duration {duration}")
    j1 = spin_set.component(1).matrix
    j3 = spin_set.component(3).matrix
    mat = _expm_spin(j3, -omega_0 * duration) @ _expm_spin(j1, rabi * duration)
    return LinearOperator(spin_set.basis, mat)


def _free_duration(omega_0: float, angle: float, minimum: float = 0.0) -> float:
    """Smallest t >= minimum with w0 t = angle (mod 2 pi).

    A long pulse (small Rabi frequency) can push `minimum` across many
    precession periods, so the skip count is computed, not searched.  ceil
    can land one period high on exact multiples; pulled back when safe.
    """
    period = TWO_PI / omega_0
    t = (angle % TWO_PI) / omega_0
    if t < minimum:
        t += period * math.ceil((minimum - t) / period)
        if t - period >= minimum - 1e-12 * period:
            t -= period
    return max(t, 0.0)


def _pulse_duration(sign: int, m: int, rabi: float) -> float:
    # W t_{+m} = pi/m; W t_{-m} = (2m - 1) pi / m
    if sign > 0:
        return math.pi / (m * rabi)
    return (2 * m - 1) * math.pi / (m * rabi)


def _odd_winding(angle: float) -> bool:
    """Whether `angle` contains an odd number of whole 2 pi turns.

    A 2 pi precession is only a global phase on an irreducible spin; on the
    two-mode realization it is the photon parity operator, which squares to
    the identity and commutes with every number-conserving factor.  Keeping
    the total winding of a sequence even makes it drop out on every
    realization at once.
    """
    return round(angle / TWO_PI) % 2 == 1


def ramsey_sequence(k: int, sign: int, m: int, omega_0: float,
                    rabi: float) -> PulseSequence:
    """Compile the standard element U_{k,+-m} into drive segments.

    k=1: resonant pulse, then free completion of the bare precession to 2 pi.
    k=2: free quarter turn (as 3 pi/2), the k=1 pulse, free closure to +pi/2.
    k=3: free evolution alone.
    """
    if k not in (1, 2, 3):
        raise AtomsError(f"axis k must be 1, 2 or 3, got {k}")
    if sign not in (1, -1):
        raise AtomsError(f"sign must be +1 or -1, got {sign}")
    if m not in (2, 4):
        raise AtomsError(f"order m must be 2 or 4, got {m}")
    if omega_0 <= 0 or rabi <= 0:
        raise AtomsError("omega_0 and the Rabi frequency must be positive")
    params = DriveParameters(omega_0=omega_0, omega=omega_0, rabi=rabi)
    period = TWO_PI / omega_0
    theta = sign * math.pi / m
    if k == 3:
        t_free = _free_duration(omega_0, -theta)
        if _odd_winding(omega_0 * t_free + theta):
            t_free += period
        segments = (Segment("free", t_free),)
        return PulseSequence(params, segments, (k, sign, m))
    t_pulse = _pulse_duration(sign, m, rabi)
    # the sign<0 pulse turns by 2 pi - pi/m, winding j1 once around
    pulse_odd = _odd_winding(rabi * t_pulse - theta)
    if k == 1:
        t_close = _free_duration(omega_0, 0.0, minimum=t_pulse)
        if _odd_winding(omega_0 * t_close) != pulse_odd:
            t_close += period
        segments = (Segment("resonant", t_pulse),
                    Segment("free", max(0.0, t_close - t_pulse)))
        return PulseSequence(params, segments, (k, sign, m))
    t_open = _free_duration(omega_0, -0.5 * math.pi)
    t_close = _free_duration(omega_0, 0.5 * math.pi, minimum=t_pulse)
    if (_odd_winding(omega_0 * t_open + 0.5 * math.pi)
            != _odd_winding(omega_0 * t_close - 0.5 * math.pi)) != pulse_odd:
        t_close += period
    segments = (Segment("free", t_open),
                Segment("resonant", t_pulse),
                Segment("free", max(0.0, t_close - t_pulse)))
    return PulseSequence(params, segments, (k, sign, m))


@dataclass(frozen=True)
class VerificationRecord:
    target: tuple
    distance: float
    verified: bool
    tolerance: float = VERIFY_TOL

    def to_dict(self) -> dict:
        k, sign, m = self.target
        return {"target": {"k": k, "sign": sign, "m": m},
                "phase_aligned_distance": self.distance,
                "tolerance": self.tolerance, "verified": self.verified}


def segment_operator(params: DriveParameters, segment: Segment,
                     spin_set: AngularMomentumSet) -> LinearOperator:
    if segment.kind == "free":
        return free_evolution(params.omega_0, segment.duration, spin_set)
    return resonant_evolution(params.omega_0, params.rabi, segment.duration,
                              spin_set)


def compile_and_verify(sequence: PulseSequence, spin_set: AngularMomentumSet):
    """Multiply the segments in temporal order and hold the result against
    exp(i theta j_k) up to a global phase.  Failure is reported, not raised."""
    mat = np.eye(spin_set.component(3).matrix.shape[0], dtype=np.complex128)
    for segment in sequence.segments:
        mat = segment_operator(sequence.params, segment, spin_set).matrix @ mat
    k, sign, m = sequence.target
    theta = sign * math.pi / m
    target = _expm_spin(spin_set.component(k).matrix, theta)
    distance = phase_distance(mat, target)
    record = VerificationRecord(target=sequence.target, distance=distance,
                                verified=bool(distance < VERIFY_TOL))
    return LinearOperator(spin_set.basis, mat), record
