"""Bright-beam expansion of the covariance matrix in the reference amplitude.

When mode 1 carries a real coherent amplitude alpha and mode 2 an arbitrary
state, M splits exactly into alpha^2 M2 + alpha M1 + M0 built from single-mode
quadrature moments of mode 2 alone: the leading block is the quadrature
covariance matrix.  The same moments predict the large-alpha behaviour of the
simultaneous-network variances; the cross term relation is exact, not
asymptotic, and is checked as such.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from . import multiport
from .fock import Ensemble, StateVector, annihilation
from .spin import CovarianceMatrix


class BrightError(ValueError):
    """Invalid moment set or state."""


@dataclass(frozen=True)
class QuadratureMoments:
    """Single-mode moments entering the expansion.

    f_x and f_y are f(A) = <A> + 2<n><A> - <An + nA> for A = X, Y; they vanish
    on number states.  xy_cov is the symmetrized covariance
    <XY + YX>/2 - <X><Y>.
    """

    x_mean: float
    y_mean: float
    n_mean: float
    x_var: float
    y_var: float
    xy_cov: float
    n_var: float
    f_x: float
    f_y: float

    @property
    def symmetric_product(self) -> float:
        """Non-central <XY + YX>."""
        return 2.0 * (self.xy_cov + self.x_mean * self.y_mean)

    def to_dict(self) -> dict:
        return {"x_mean": self.x_mean, "y_mean": self.y_mean,
                "n_mean": self.n_mean, "x_var": self.x_var,
                "y_var": self.y_var, "xy_cov": self.xy_cov,
                "n_var": self.n_var, "f_x": self.f_x, "f_y": self.f_y}


def _real(value: complex, what: str) -> float:
    if abs(value.imag) > 1e-10:
        raise BrightError(f"{what} came out complex: {value}")
    return float(value.real)


def quadrature_moments(state) -> QuadratureMoments:
    """Moments of X = (a^dag + a)/2, Y = i(a^dag - a)/2 and n for one mode.

    X and Y do not conserve photon number, so near the cutoff their truncated
    matrices clip one matrix element; the error is of the order of the state's
    truncation weight.
    """
    if isinstance(state, Ensemble):
        parts = [(w, _noncentral_quadratures(p)) for w, p in state.parts]
        raw = {key: sum(w * moments[key] for w, moments in parts)
               for key in parts[0][1]}
    else:
        raw = _noncentral_quadratures(state)
    x, y, n = raw["x"], raw["y"], raw["n"]
    return QuadratureMoments(
        x_mean=x, y_mean=y, n_mean=n,
        x_var=raw["xx"] - x * x,
        y_var=raw["yy"] - y * y,
        xy_cov=raw["xy_sym"] - x * y,
        n_var=raw["nn"] - n * n,
        f_x=x + 2.0 * n * x - raw["xn_sym"],
        f_y=y + 2.0 * n * y - raw["yn_sym"],
    )


def _noncentral_quadratures(state: StateVector) -> dict:
    basis = state.basis
    if basis.mode_count != 1:
        raise BrightError("quadrature moments are defined for a one-mode state")
    a = annihilation(basis, 0).matrix
    x = 0.5 * (a.conj().T + a)
    y = 0.5j * (a.conj().T - a)
    nop = a.conj().T @ a
    psi = state.amplitudes
    def ev(mat):
        return np.vdot(psi, mat @ psi)
    return {
        "x": _real(ev(x), "<X>"),
        "y": _real(ev(y), "<Y>"),
        "n": _real(ev(nop), "<n>"),
        "xx": _real(ev(x @ x), "<X^2>"),
        "yy": _real(ev(y @ y), "<Y^2>"),
        "xy_sym": _real(0.5 * ev(x @ y + y @ x), "<XY+YX>/2"),
        "nn": _real(ev(nop @ nop), "<n^2>"),
        "xn_sym": _real(ev(x @ nop + nop @ x), "<Xn+nX>"),
        "yn_sym": _real(ev(y @ nop + nop @ y), "<Yn+nY>"),
    }


@dataclass(frozen=True)
class BrightDecomposition:
    """The three coefficient matrices of M = a^2 M2 + a M1 + M0."""

    m2: np.ndarray
    m1: np.ndarray
    m0: np.ndarray
    moments: QuadratureMoments

    def __post_init__(self):
        for name in ("m2", "m1", "m0"):
            mat = np.asarray(getattr(self, name), dtype=float)
            if mat.shape != (3, 3) or np.max(np.abs(mat - mat.T)) > 1e-12:
                raise BrightError(f"{name} must be a symmetric 3x3 matrix")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)
        if (np.max(np.abs(self.m1[:2, :2])) > 1e-12
                or abs(self.m1[2, 2]) > 1e-12):
            raise BrightError("m1 must vanish outside the (1,3),(2,3) slots")

    def to_dict(self) -> dict:
        return {"m2": [list(r) for r in self.m2],
                "m1": [list(r) for r in self.m1],
                "m0": [list(r) for r in self.m0],
                "moments": self.moments.to_dict()}


def bright_decomposition(moments: QuadratureMoments) -> BrightDecomposition:
    m2 = np.array([
        [moments.x_var, moments.xy_cov, 0.0],
        [moments.xy_cov, moments.y_var, 0.0],
        [0.0, 0.0, 0.25],
    ])
    m1 = 0.25 * np.array([
        [0.0, 0.0, moments.f_x],
        [0.0, 0.0, moments.f_y],
        [moments.f_x, moments.f_y, 0.0],
    ])
    m0 = 0.25 * np.diag([moments.n_mean, moments.n_mean, moments.n_var])
    return BrightDecomposition(m2=m2, m1=m1, m0=m0, moments=moments)


def series_covariance(alpha: float, decomposition: BrightDecomposition) -> CovarianceMatrix:
    """M at a given real amplitude; exact at every alpha, not just large."""
    a = float(alpha)
    return CovarianceMatrix(a * a * decomposition.m2 + a * decomposition.m1
                            + decomposition.m0)


def mean_relations(alpha: float, moments: QuadratureMoments) -> np.ndarray:
    """(alpha <X>, alpha <Y>, (alpha^2 - <n>)/2)."""
    a = float(alpha)
    return np.array([a * moments.x_mean, a * moments.y_mean,
                     0.5 * (a * a - moments.n_mean)])


def real_alignment(alpha: complex):
    """Magnitude and the phase-shift angle that rotates alpha real.

    A phase-difference shift by the returned angle maps the reference mode
    amplitude to |alpha|; the covariance matrix co-rotates about axis 3.
    """
    alpha = complex(alpha)
    return abs(alpha), -cmath.phase(alpha)


@dataclass(frozen=True)
class HomodyneAsymptote:
    """Large-alpha predictions for the simultaneous-network statistics."""

    alpha: float
    variance_1: float
    variance_2: float
    symmetric_12: float
    config: multiport.TwelvePortConfig

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "variance_1": self.variance_1,
                "variance_2": self.variance_2, "symmetric_12": self.symmetric_12,
                "config": self.config.to_dict()}


def homodyne_asymptotics(alpha: float, config: multiport.TwelvePortConfig,
                         moments: QuadratureMoments) -> HomodyneAsymptote:
    """Var jt_1 ~ a^2 [Var X + (1+r^2)/(4t^2)], likewise for Y, and the exact
    cross moment <jt_1 jt_2> = (a^2/2) <XY + YX>."""
    a = float(alpha)
    t2 = config.t_squared
    r2 = 1.0 - t2
    floor = (1.0 + r2) / (4.0 * t2)
    return HomodyneAsymptote(
        alpha=a,
        variance_1=a * a * (moments.x_var + floor),
        variance_2=a * a * (moments.y_var + floor),
        symmetric_12=0.5 * a * a * moments.symmetric_product,
        config=config,
    )


@dataclass(frozen=True)
class ConvergenceRow:
    alpha: float
    exact_variance_1: float
    exact_variance_2: float
    exact_symmetric_12: float
    predicted_variance_1: float
    predicted_variance_2: float
    predicted_symmetric_12: float

    @property
    def relative_deviation_1(self) -> float:
        return abs(self.exact_variance_1 - self.predicted_variance_1) / abs(self.exact_variance_1)

    @property
    def relative_deviation_2(self) -> float:
        return abs(self.exact_variance_2 - self.predicted_variance_2) / abs(self.exact_variance_2)

    @property
    def cross_residual(self) -> float:
        return abs(self.exact_symmetric_12 - self.predicted_symmetric_12)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha,
                "exact": {"variance_1": self.exact_variance_1,
                          "variance_2": self.exact_variance_2,
                          "symmetric_12": self.exact_symmetric_12},
                "predicted": {"variance_1": self.predicted_variance_1,
                              "variance_2": self.predicted_variance_2,
                              "symmetric_12": self.predicted_symmetric_12},
                "relative_deviation_1": self.relative_deviation_1,
                "relative_deviation_2": self.relative_deviation_2,
                "cross_residual": self.cross_residual}


def convergence_report(alphas, state, config: multiport.TwelvePortConfig):
    """Exact network statistics vs the asymptote over a ladder of amplitudes.

    The exact side contracts analytic coherent moments for the reference mode
    with the state's own moments, so alpha is unrestricted by truncation.
    """
    moments = quadrature_moments(state)
    mode2 = multiport.single_mode_moments(state)
    rows = []
    for alpha in alphas:
        a = float(alpha)
        if a < 0:
            raise BrightError("amplitudes are taken real and non-negative here")
        table = multiport.product_moment_table(
            [multiport.coherent_moments(a), mode2])
        stats = multiport.propagate_tilde_statistics(config, table)
        predicted = homodyne_asymptotics(a, config, moments)
        rows.append(ConvergenceRow(
            alpha=a,
            exact_variance_1=stats.covariance[0, 0],
            exact_variance_2=stats.covariance[1, 1],
            exact_symmetric_12=stats.second_moment(1, 2),
            predicted_variance_1=predicted.variance_1,
            predicted_variance_2=predicted.variance_2,
            predicted_symmetric_12=predicted.symmetric_12,
        ))
    return rows
