"""Angular-momentum covariance matrices on truncated Fock spaces.

Simulation of the measurement schemes that determine the covariance matrix
of (j1, j2, j3): direct computation on states, six-variance reconstruction
through SU(2) rotations, the 12-port simultaneous scheme with exact
vacuum-noise correction, Ramsey pulse compilation, and the bright-reference
quadrature expansion.
"""

from ._backend import backend_name, set_backend, use_numba
from .fock import (
    Ensemble,
    FockBasis,
    FockError,
    LinearOperator,
    StateVector,
    TruncationWarning,
    coherent_state,
    number_state,
    product_state,
    state_from_text,
    state_to_text,
    vacuum_state,
)
from .spin import (
    AngularMomentumSet,
    CovarianceMatrix,
    PrincipalDecomposition,
    covariance_matrix,
    mean_vector,
    principal_decomposition,
    schwinger_set,
    spin_j_set,
)
from .su2 import SU2Element, compose, fock_lift, phase_distance, standard_element
from .protocol import (
    ProtocolPlan,
    VarianceSet6,
    assemble_covariance,
    execute_plan,
    interferometric_plan,
    polarimetric_plan,
)
from .measure import (
    PRNG_VERSION,
    DetectorPairing,
    OutcomeDistribution,
    SampleRecords,
    estimate_mean_variance,
    outcome_distribution,
    read_records,
    sample,
    write_records,
)
from .multiport import (
    NetworkUnitary,
    TwelvePortConfig,
    corrected_covariance,
    estimate_corrected_covariance,
    fig5_network,
    full_state_tilde_statistics,
    moment_table,
    propagate_tilde_statistics,
    sample_twelve_port,
    twelve_port_matrix,
)
from .atoms import DriveParameters, PulseSequence, compile_and_verify, ramsey_sequence
from .bright import (
    bright_decomposition,
    convergence_report,
    homodyne_asymptotics,
    quadrature_moments,
    series_covariance,
)

__version__ = "0.1.0"

__all__ = [
    "AngularMomentumSet",
    "CovarianceMatrix",
    "DetectorPairing",
    "DriveParameters",
    "Ensemble",
    "FockBasis",
    "FockError",
    "LinearOperator",
    "NetworkUnitary",
    "OutcomeDistribution",
    "PRNG_VERSION",
    "PrincipalDecomposition",
    "ProtocolPlan",
    "PulseSequence",
    "SU2Element",
    "SampleRecords",
    "StateVector",
    "TruncationWarning",
    "TwelvePortConfig",
    "VarianceSet6",
    "assemble_covariance",
    "backend_name",
    "bright_decomposition",
    "coherent_state",
    "compile_and_verify",
    "compose",
    "convergence_report",
    "corrected_covariance",
    "covariance_matrix",
    "estimate_corrected_covariance",
    "estimate_mean_variance",
    "execute_plan",
    "fig5_network",
    "fock_lift",
    "full_state_tilde_statistics",
    "homodyne_asymptotics",
    "interferometric_plan",
    "mean_vector",
    "moment_table",
    "number_state",
    "outcome_distribution",
    "phase_distance",
    "polarimetric_plan",
    "principal_decomposition",
    "product_state",
    "propagate_tilde_statistics",
    "quadrature_moments",
    "ramsey_sequence",
    "read_records",
    "sample",
    "sample_twelve_port",
    "schwinger_set",
    "series_covariance",
    "set_backend",
    "spin_j_set",
    "standard_element",
    "state_from_text",
    "state_to_text",
    "twelve_port_matrix",
    "use_numba",
    "vacuum_state",
    "write_records",
]
