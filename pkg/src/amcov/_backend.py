"""Kernel backend selection.

The index-heavy inner loops (pair-sector unitary application, sampled-count
lookup) exist twice: an @njit version and a vectorized numpy version.  The
active backend is chosen once from the environment variable AMCOV_BACKEND
("numba" or "numpy") and can be switched at runtime with set_backend(), which
the benchmark and the agreement tests use.  Default is numba when importable.
"""

from __future__ import annotations

import os

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

_VALID = ("numba", "numpy")


def _from_environment() -> str:
    name = os.environ.get("AMCOV_BACKEND", "").strip().lower()
    if name in _VALID:
        if name == "numba" and not HAS_NUMBA:
            raise RuntimeError("AMCOV_BACKEND=numba but numba is not importable")
        return name
    if name:
        raise RuntimeError(f"AMCOV_BACKEND must be one of {_VALID}, got {name!r}")
    return "numba" if HAS_NUMBA else "numpy"


_ACTIVE = _from_environment()


def backend_name() -> str:
    """Name of the active kernel backend."""
    return _ACTIVE


def use_numba() -> bool:
    return _ACTIVE == "numba"


def set_backend(name: str) -> str:
    """Switch the kernel backend; returns the previous name."""
    global _ACTIVE
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    previous = _ACTIVE
    _ACTIVE = name
    return previous
