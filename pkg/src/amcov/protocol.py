"""Covariance reconstruction from six combo variances, and measurement plans.

The six Hermitian combinations j_{k+-l} = (j_k +- j_l)/sqrt(2) for the pairs
(1,2), (1,3), (2,3) determine the full covariance matrix: off-diagonals from
M_kl = [var(j_{k+l}) - var(j_{k-l})]/2 and diagonals from the identity
var(j_{k+l}) + var(j_{k-l}) = M_kk + M_ll.  Each combo is realized physically
by rotating the state with a short composition of standard SU(2) elements and
measuring a single fixed component: j1 in the polarimetric plan, j3 in the
interferometric plan (the cyclic image of the former).  Plans are checked at
construction by conjugating the measured component on a reference basis.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import measure
from .fock import Ensemble, FockBasis, LinearOperator, StateVector, TruncationWarning
from .spin import AngularMomentumSet, CovarianceMatrix, schwinger_set
from .su2 import SU2Element, compose, fock_lift, standard_element

COMBO_LABELS = ("1+2", "1-2", "1+3", "1-3", "2+3", "2-3")

PLAN_CHECK_TOL = 1e-11


class ProtocolError(ValueError):
    """Invalid variance set or plan."""


def _parse_label(label: str):
    k, sign, l = int(label[0]), label[1], int(label[2])
    return k, 1.0 if sign == "+" else -1.0, l


def combo_components(ops: AngularMomentumSet) -> dict:
    """The six operators (j_k +- j_l)/sqrt(2), keyed by label."""
    out = {}
    for label in COMBO_LABELS:
        k, sign, l = _parse_label(label)
        mat = (ops.component(k).matrix + sign * ops.component(l).matrix) / math.sqrt(2)
        out[label] = LinearOperator(ops.basis, mat)
    return out


@dataclass
class VarianceSet6:
    """Variances of the six combos; may carry standard errors when sampled."""

    values: dict
    standard_errors: dict = None

    def __post_init__(self):
        missing = [l for l in COMBO_LABELS if l not in self.values]
        if missing:
            raise ProtocolError(f"variance set is missing combos {missing}")
        extra = [l for l in self.values if l not in COMBO_LABELS]
        if extra:
            raise ProtocolError(f"variance set has unknown combos {extra}")
        for label, value in self.values.items():
            if value < -1e-10:
                raise ProtocolError(
                    f"variance of {label} is {value}, below the noise floor")

    def to_dict(self) -> dict:
        out = {"variances": dict(self.values)}
        if self.standard_errors is not None:
            out["standard_errors"] = dict(self.standard_errors)
        return out


def assemble_covariance(variances: VarianceSet6) -> CovarianceMatrix:
    """Invert the combo-variance map into the full covariance matrix.

    Uses var(j_{k+l}) - var(j_{k-l}) = 2 M_kl for the off-diagonals and the
    pairwise sums (which equal M_kk + M_ll) for the diagonals.  PSD is not
    enforced here: finite-shot inputs may violate it slightly.
    """
    v = variances.values
    pair_sum = {
        (1, 2): v["1+2"] + v["1-2"],
        (1, 3): v["1+3"] + v["1-3"],
        (2, 3): v["2+3"] + v["2-3"],
    }
    mat = np.empty((3, 3))
    mat[0, 1] = mat[1, 0] = 0.5 * (v["1+2"] - v["1-2"])
    mat[0, 2] = mat[2, 0] = 0.5 * (v["1+3"] - v["1-3"])
    mat[1, 2] = mat[2, 1] = 0.5 * (v["2+3"] - v["2-3"])
    mat[0, 0] = 0.5 * (pair_sum[(1, 2)] + pair_sum[(1, 3)] - pair_sum[(2, 3)])
    mat[1, 1] = 0.5 * (pair_sum[(1, 2)] + pair_sum[(2, 3)] - pair_sum[(1, 3)])
    mat[2, 2] = 0.5 * (pair_sum[(1, 3)] + pair_sum[(2, 3)] - pair_sum[(1, 2)])
    return CovarianceMatrix(mat)


def assemble_with_known_principal(var_1: float, var_2: float, var_3: float,
                                  var_plus12: float) -> CovarianceMatrix:
    """Four-variance shortcut valid when e3 is a principal axis.

    Then M_13 = M_23 = 0 by assumption and the only unknown off-diagonal is
    M_12 = var(j_{1+2}) - (var(j_1) + var(j_2))/2.
    """
    m12 = var_plus12 - 0.5 * (var_1 + var_2)
    return CovarianceMatrix(np.array([
        [var_1, m12, 0.0],
        [m12, var_2, 0.0],
        [0.0, 0.0, var_3],
    ]))


@dataclass(frozen=True)
class PlanStep:
    """One measurement setting: elements (applied in list order), then count.

    The conjugated measured component equals orientation * (labeled combo);
    the sign cannot always be +1 when only standard elements are allowed, and
    it never affects a variance.
    """

    label: str
    elements: tuple
    measured_component: int
    orientation: int = 1

    def composed(self) -> SU2Element:
        total = self.elements[0]
        for el in self.elements[1:]:
            total = compose(el, total)  # later elements act after earlier ones
        return total

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "measured_component": self.measured_component,
            "orientation": self.orientation,
            "elements": [el.to_dict() for el in self.elements],
        }


@dataclass(frozen=True)
class ProtocolPlan:
    name: str
    steps: tuple

    def to_dict(self) -> dict:
        return {"name": self.name, "steps": [s.to_dict() for s in self.steps]}


_REFERENCE_NMAX = 6


def _verify_plan(plan: ProtocolPlan) -> None:
    basis = FockBasis(2, _REFERENCE_NMAX)
    ops = schwinger_set(basis)
    combos = combo_components(ops)
    j_mats = {k: ops.component(k).matrix for k in (1, 2, 3)}
    for step in plan.steps:
        u = fock_lift(step.composed(), basis).matrix
        conj = u.conj().T @ j_mats[step.measured_component] @ u
        target = step.orientation * combos[step.label].matrix
        residual = float(np.max(np.abs(conj - target)))
        if residual > PLAN_CHECK_TOL:
            raise ProtocolError(
                f"plan {plan.name!r} step {step.label}: conjugation residual "
                f"{residual:.3e} exceeds {PLAN_CHECK_TOL}")


def polarimetric_plan() -> ProtocolPlan:
    """Six settings measuring j1 behind phase plates / rotators.

    j_{1+-2} needs a quarter rotation about axis 3; j_{1+-3} a quarter about
    axis 2 (opposite sign); j_{2+-3} composes a half rotation about axis 2
    (applied first) with the +pi/4 rotation about axis 3.
    """
    u3 = {s: standard_element(3, s, 4) for s in (1, -1)}
    u2q = {s: standard_element(2, s, 4) for s in (1, -1)}
    u2h = {s: standard_element(2, s, 2) for s in (1, -1)}
    steps = (
        PlanStep("1+2", (u3[1],), 1),
        PlanStep("1-2", (u3[-1],), 1),
        PlanStep("1+3", (u2q[-1],), 1),
        PlanStep("1-3", (u2q[1],), 1),
        PlanStep("2+3", (u2h[-1], u3[1]), 1),
        PlanStep("2-3", (u2h[1], u3[1]), 1),
    )
    plan = ProtocolPlan("polarimetric", steps)
    _verify_plan(plan)
    return plan


def interferometric_plan() -> ProtocolPlan:
    """Cyclic image (1,2,3) -> (3,1,2) of the polarimetric plan, measuring j3.

    Two settings realize the negative of their combo (orientation -1): the
    standard elements rotate j3 into -j_{1-3} and -j_{2-3}, which carries the
    same variance.
    """
    u2q = {s: standard_element(2, s, 4) for s in (1, -1)}
    u1q = {s: standard_element(1, s, 4) for s in (1, -1)}
    u1h = {s: standard_element(1, s, 2) for s in (1, -1)}
    steps = (
        PlanStep("1+3", (u2q[1],), 3, orientation=1),
        PlanStep("1-3", (u2q[-1],), 3, orientation=-1),
        PlanStep("2+3", (u1q[-1],), 3, orientation=1),
        PlanStep("2-3", (u1q[1],), 3, orientation=-1),
        PlanStep("1+2", (u1h[-1], u2q[1]), 3, orientation=1),
        PlanStep("1-2", (u1h[1], u2q[1]), 3, orientation=1),
    )
    plan = ProtocolPlan("interferometric", steps)
    _verify_plan(plan)
    return plan


def measurement_element(component: int):
    """Element W with W^dag j3 W = j_component, mapping the component onto
    the photon-number difference that detectors actually resolve."""
    if component == 3:
        return None
    if component == 1:
        return standard_element(2, 1, 2)
    if component == 2:
        return standard_element(1, -1, 2)
    raise ProtocolError(f"measured component must be 1, 2 or 3, got {component}")


def _as_parts(state):
    if isinstance(state, Ensemble):
        return state.basis, state.parts
    if isinstance(state, StateVector):
        return state.basis, [(1.0, state)]
    raise ProtocolError(f"expected StateVector or Ensemble, got {type(state)}")


def execute_plan(plan: ProtocolPlan, state, *, shots: int = None,
                 seed: int = None, truncation_threshold: float = 1e-6) -> VarianceSet6:
    """Run every step on a two-mode state; exact when shots is None.

    Exact mode evolves the state and takes the variance of the measured
    component from the operators.  Sampled mode additionally rotates the
    measured component onto j3, draws occupation outcomes through `measure`
    (stream keyed by the step index, so step order and parallelism cannot
    change the records), and returns unbiased sample variances with jackknife
    standard errors.  Mixtures are combined at the moment level.
    """
    basis, parts = _as_parts(state)
    if basis.mode_count != 2:
        raise ProtocolError("plans act on two-mode states")
    for _, part in parts:
        if part.truncation_weight > truncation_threshold:
            warnings.warn(
                f"state truncation weight {part.truncation_weight:.3e} exceeds "
                f"{truncation_threshold:.1e}; plan variances carry truncation bias",
                TruncationWarning, stacklevel=2)
    if shots is None:
        return _execute_exact(plan, basis, parts)
    if seed is None:
        raise ProtocolError("sampled execution needs a seed")
    return _execute_sampled(plan, basis, parts, int(shots), int(seed))


def _execute_exact(plan, basis, parts):
    ops = schwinger_set(basis)
    values = {}
    for step in plan.steps:
        u = fock_lift(step.composed(), basis).matrix
        j = ops.component(step.measured_component).matrix
        e1 = 0.0
        e2 = 0.0
        for weight, part in parts:
            evolved = u @ part.amplitudes
            jpsi = j @ evolved
            e1 += weight * np.vdot(evolved, jpsi).real
            e2 += weight * np.vdot(jpsi, jpsi).real
        values[step.label] = e2 - e1 ** 2
    return VarianceSet6(values)


_HALF_DIFFERENCE = measure.DetectorPairing(
    label="half_difference", plus=0, minus=1, scale=0.5, component=3)


def sample_plan_records(plan: ProtocolPlan, state, shots: int, seed: int,
                        truncation_threshold: float = 1e-6) -> dict:
    """Detector records for every step, keyed by combo label.

    Each step rotates its measured component onto the count difference, so
    the recorded occupation pairs carry the combo value as (n1 - n2)/2.  The
    stream index is the step position: records are reproducible from
    (seed, label) regardless of execution order.
    """
    basis, parts = _as_parts(state)
    if basis.mode_count != 2:
        raise ProtocolError("plans act on two-mode states")
    for _, part in parts:
        if part.truncation_weight > truncation_threshold:
            warnings.warn(
                f"state truncation weight {part.truncation_weight:.3e} exceeds "
                f"{truncation_threshold:.1e}; plan variances carry truncation bias",
                TruncationWarning, stacklevel=2)
    out = {}
    for index, step in enumerate(plan.steps):
        element = step.composed()
        rotation = measurement_element(step.measured_component)
        if rotation is not None:
            element = compose(rotation, element)
        u = fock_lift(element, basis).matrix
        probs = np.zeros(basis.dimension)
        for weight, part in parts:
            probs += weight * np.abs(u @ part.amplitudes) ** 2
        dist = measure.OutcomeDistribution(basis, probs)
        metadata = {
            "scheme": "reconstruct",
            "plan": plan.name,
            "combo": step.label,
            "pairings": [_HALF_DIFFERENCE.to_dict()],
        }
        out[step.label] = measure.sample(dist, shots, seed, stream=index,
                                         metadata=metadata)
    return out


def estimates_from_records(records_by_label: dict) -> VarianceSet6:
    """Variance set from one record set per combo, pairing read from metadata."""
    values = {}
    errors = {}
    for label, records in records_by_label.items():
        pairing = records.pairings()[0]
        est = measure.estimate_mean_variance(records, pairing)
        values[label] = est.variance
        errors[label] = est.se_variance
    return VarianceSet6(values, standard_errors=errors)


def _execute_sampled(plan, basis, parts, shots, seed):
    state = parts[0][1] if len(parts) == 1 else Ensemble(basis, parts)
    records = sample_plan_records(plan, state, shots, seed,
                                  truncation_threshold=float("inf"))
    return estimates_from_records(records)
