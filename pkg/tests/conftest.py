"""Shared helpers: seeded random states, random SU(2) elements, backend sweep."""

import numpy as np
import pytest

from amcov import FockBasis, set_backend, use_numba
from amcov._backend import HAS_NUMBA
from amcov.fock import StateVector, state_from_amplitudes
from amcov.su2 import SU2Element, su2_from_axis_angle


def random_state(basis: FockBasis, rng: np.random.Generator) -> StateVector:
    amps = rng.normal(size=basis.dimension) + 1j * rng.normal(size=basis.dimension)
    amps /= np.linalg.norm(amps)
    return state_from_amplitudes(basis, amps)


def random_element(rng: np.random.Generator) -> SU2Element:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    theta = rng.uniform(-2.0 * np.pi, 2.0 * np.pi)
    return su2_from_axis_angle(theta, axis)


BACKENDS = ["numpy"] + (["numba"] if HAS_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    previous = set_backend(request.param)
    yield request.param
    set_backend(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)
