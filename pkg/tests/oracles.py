"""Independent recomputation routes used only by the tests.

Nothing here shares code with the production kernels: reduced density
matrices come from a full-space partial trace, pair connectivity from a
quadratic scan, Jacobians from finite differences.
"""

from __future__ import annotations

import numpy as np

from heisenglass import fitting
from heisenglass.basis import SectorBasis


def embed_full_space(basis: SectorBasis, coefficients: np.ndarray) -> np.ndarray:
    """Sector coefficients -> full 2^L vector (bit k of the index = site k)."""
    full = np.zeros(2**basis.sites)
    full[np.fromiter(basis.states, dtype=np.int64)] = coefficients
    return full


def pair_rdm_by_partial_trace(psi_full: np.ndarray, sites: int, i: int, j: int) -> np.ndarray:
    """4x4 pair RDM of a full-space pure state, (uu, ud, du, dd) ordered.

    Reshape to one axis per site (axis L-1-k holds bit k), pull the pair
    to the front, and contract the rest.  The row index 2*s_i + s_j runs
    (dd, du, ud, uu), so both axes are reversed at the end.
    """
    t = psi_full.reshape((2,) * sites)
    t = np.moveaxis(t, (sites - 1 - i, sites - 1 - j), (0, 1))
    m = t.reshape(4, -1)
    rho = m @ m.T
    return rho[::-1, ::-1]


def brute_pair_partners(states: list[int], i: int, j: int) -> list[tuple[int, int]]:
    """All (k, l) with state l = state k with the (i up, j down) pair swapped.

    Quadratic scan over the basis; cross-checks the order-preserving
    pairing the assembly kernel relies on.
    """
    index = {s: k for k, s in enumerate(states)}
    out = []
    for k, s in enumerate(states):
        if (s >> i) & 1 and not (s >> j) & 1:
            swapped = s - (1 << i) + (1 << j)
            if swapped in index:
                out.append((k, index[swapped]))
    return out


def finite_difference_jacobian(family: str, params: np.ndarray, L: np.ndarray, h: float = 1e-6) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64)
    cols = []
    for k in range(params.size):
        dp = np.zeros_like(params)
        dp[k] = h * max(1.0, abs(params[k]))
        cols.append(
            (fitting.model_value(family, params + dp, L) - fitting.model_value(family, params - dp, L))
            / (2.0 * dp[k])
        )
    return np.column_stack(cols)


def gap_scan_groups(eigenvalues: np.ndarray, tol: float) -> list[tuple[int, int]]:
    """Degeneracy groups by direct gap comparison (no production helpers)."""
    groups = []
    start = 0
    for k in range(1, eigenvalues.size):
        if eigenvalues[k] - eigenvalues[k - 1] > tol:
            groups.append((start, k))
            start = k
    groups.append((start, eigenvalues.size))
    return groups
