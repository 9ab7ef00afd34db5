"""Hot kernels with numba and numpy implementations.

Two inner loops dominate the full-state network paths:

* applying a two-mode mixing unitary to a multi-mode state vector.  Within
  each group of basis states sharing the spectator occupations and the pair
  total s, the lifted unitary is a dense (s+1)x(s+1) block, so the update is
  a gather / small-matvec / scatter sweep over many groups;
* turning uniform variates into outcome indices through the cumulative
  distribution (sampled counting).

Both exist as @njit loops and as vectorized numpy code; _backend picks one.
The numpy sampling fallback and the numba loop implement the identical
"first index with cdf[i] > u" rule, so sampled records are bit-identical
across backends.
"""

from __future__ import annotations

import numpy as np

from . import _backend
from .fock import FockBasis, FockError

if _backend.HAS_NUMBA:
    from numba import njit
else:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap


# ---------------------------------------------------------------------------
# pair-sector partition of a basis


def pair_partition(basis: FockBasis, pair):
    """Group basis indices by (spectator occupations, pair total).

    Returns (order, group_start, group_s): order lists basis indices sorted so
    that each group is contiguous and ordered by n_p; group g spans
    order[group_start[g]:group_start[g+1]] and has pair total group_s[g]
    (hence size group_s[g] + 1).  Cached on the basis.
    """
    p, q = pair
    if p == q or not (0 <= p < basis.mode_count and 0 <= q < basis.mode_count):
        raise FockError(f"invalid mode pair {pair}")
    key = ("pair_partition", p, q)
    if key in basis._cache:
        return basis._cache[key]
    occ = basis.occupations
    m = occ[:, p]
    s = occ[:, p] + occ[:, q]
    spectator = np.zeros(basis.dimension, dtype=np.int64)
    radix = 1
    for k in range(basis.mode_count):
        if k in (p, q):
            continue
        spectator += occ[:, k] * radix
        radix *= basis.n_max + 1
    order = np.lexsort((m, s, spectator))
    s_sorted = s[order]
    spec_sorted = spectator[order]
    change = np.nonzero((np.diff(s_sorted) != 0)
                        | (np.diff(spec_sorted) != 0))[0] + 1
    group_start = np.concatenate(([0], change, [basis.dimension])).astype(np.int64)
    group_s = s_sorted[group_start[:-1]].astype(np.int64)
    # every group must hold the complete ladder n_p = 0..s
    if not np.array_equal(np.diff(group_start), group_s + 1):
        raise AssertionError("pair partition groups are not complete ladders")
    order = order.astype(np.int64)
    for arr in (order, group_start, group_s):
        arr.setflags(write=False)
    basis._cache[key] = (order, group_start, group_s)
    return basis._cache[key]


def pair_sector_blocks(matrix2: np.ndarray, n_max: int) -> np.ndarray:
    """Lift a 2x2 unitary to every two-mode sector of fixed total s <= n_max.

    Returns blocks[s, :s+1, :s+1] acting on amplitudes ordered by n_p = 0..s.
    The sector generator is the quadratic form a^dag K a with K = -i log U
    restricted to the sector, exponentiated through its eigenbasis so each
    block is unitary to machine precision.
    """
    u = np.asarray(matrix2, dtype=np.complex128)
    if u.shape != (2, 2):
        raise FockError(f"pair unitary must be 2x2, got {u.shape}")
    if np.max(np.abs(u.conj().T @ u - np.eye(2))) > 1e-12:
        raise FockError("pair matrix is not unitary within 1e-12")
    kmat = _matrix_log_unitary(u)
    if np.max(np.abs(_expm_hermitian_2x2(kmat) - u)) > 1e-12:
        raise FockError("failed to take a Hermitian logarithm of the pair matrix")
    blocks = np.zeros((n_max + 1, n_max + 1, n_max + 1), dtype=np.complex128)
    for s in range(n_max + 1):
        m = np.arange(s + 1)
        h = np.zeros((s + 1, s + 1), dtype=np.complex128)
        h[m, m] = kmat[0, 0] * m + kmat[1, 1] * (s - m)
        step = np.sqrt((m[:-1] + 1.0) * (s - m[:-1]))
        h[m[:-1] + 1, m[:-1]] = kmat[0, 1] * step  # <m+1, s-m-1| a_p^dag a_q |m, s-m>
        h[m[:-1], m[:-1] + 1] = kmat[1, 0] * step
        w, v = np.linalg.eigh(h)
        blocks[s, :s + 1, :s + 1] = (v * np.exp(1j * w)) @ v.conj().T
    return blocks


def _expm_hermitian_2x2(k: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(k)
    return (v * np.exp(1j * w)) @ v.conj().T


def _matrix_log_unitary(u: np.ndarray) -> np.ndarray:
    """Hermitian K with e^{iK} = u via the complex Schur form.

    For a unitary input the Schur factor is diagonal up to roundoff, so
    dropping its off-diagonal part and symmetrizing is exact at machine level
    and stays correct for degenerate eigenvalues where plain eig may return
    non-orthogonal eigenvectors.
    """
    from scipy.linalg import schur

    t, z = schur(u, output="complex")
    k = (z * np.angle(np.diag(t))) @ z.conj().T
    return 0.5 * (k + k.conj().T)


# ---------------------------------------------------------------------------
# kernel: apply pair-sector blocks to a state vector


@njit(cache=True)
def _apply_pair_numba(amps, order, group_start, group_s, blocks, out):  # pragma: no cover - compiled
    for g in range(group_s.shape[0]):
        s = group_s[g]
        base = group_start[g]
        for i in range(s + 1):
            acc = 0.0 + 0.0j
            for j in range(s + 1):
                acc += blocks[s, i, j] * amps[order[base + j]]
            out[order[base + i]] = acc


def _apply_pair_numpy(amps, order, group_start, group_s, blocks, out):
    sorted_amps = amps[order]
    sorted_out = np.empty_like(sorted_amps)
    for s in np.unique(group_s):
        starts = group_start[:-1][group_s == s]
        idx = starts[:, None] + np.arange(s + 1)[None, :]
        sorted_out[idx] = sorted_amps[idx] @ blocks[s, :s + 1, :s + 1].T
    out[order] = sorted_out


def apply_pair_unitary(amps: np.ndarray, partition, blocks: np.ndarray) -> np.ndarray:
    """New amplitude vector after the pair unitary encoded by the blocks."""
    order, group_start, group_s = partition
    out = np.empty_like(amps)
    if _backend.use_numba():
        _apply_pair_numba(amps, order, group_start, group_s, blocks, out)
    else:
        _apply_pair_numpy(amps, order, group_start, group_s, blocks, out)
    return out


# ---------------------------------------------------------------------------
# kernel: outcome lookup through the cumulative distribution


@njit(cache=True)
def _lookup_numba(cdf, uniforms, out):  # pragma: no cover - compiled
    n = cdf.shape[0]
    for i in range(uniforms.shape[0]):
        u = uniforms[i]
        lo = 0
        hi = n
        while lo < hi:
            mid = (lo + hi) // 2
            if cdf[mid] > u:
                hi = mid
            else:
                lo = mid + 1
        if lo >= n:
            lo = n - 1
        out[i] = lo


def _lookup_numpy(cdf, uniforms, out):
    idx = np.searchsorted(cdf, uniforms, side="right")
    np.minimum(idx, cdf.shape[0] - 1, out=out)


def outcome_lookup(cdf: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """First index with cdf[i] > u, clamped to the last bin."""
    out = np.empty(uniforms.shape[0], dtype=np.int64)
    if _backend.use_numba():
        _lookup_numba(cdf, uniforms, out)
    else:
        _lookup_numpy(cdf, uniforms, out)
    return out
