"""Heisenberg Hamiltonians restricted to fixed-magnetization sectors.

H = sum_{i<j} J_ij sigma_i . sigma_j commutes with the total z
magnetization, so it is block diagonal over the bases of
:mod:`heisenglass.basis`.  Writing sigma_i . sigma_j = 2 S_ij - 1 with
S_ij the spin swap gives the matrix elements directly:

* diagonal:  sum_{i<j} J_ij s_i s_j with s = +-1,
* off-diagonal:  2 J_ij between the two states that a swap of an
  antiparallel pair (i, j) exchanges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import SectorBasis
from .couplings import CouplingMatrix, coupling_sum

FULL_SPACE_MAX_SITES = 12


@dataclass
class SectorMatrix:
    """Dense symmetric sector block together with its ingredients."""

    basis: SectorBasis
    couplings: CouplingMatrix
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.dim

    def coupling_sum(self) -> float:
        return self.couplings.coupling_sum()


def assemble(cm: CouplingMatrix, basis: SectorBasis) -> SectorMatrix:
    """Build the dense sector block of the swap-form Hamiltonian.

    For each site pair the states with (i up, j down) and (j up, i down)
    both list in ascending pattern order, and the swap adds the constant
    2^j - 2^i to every pattern of the first group, which preserves
    order.  The two groups therefore pair up elementwise and the
    off-diagonal fill needs no rank lookups.
    """
    if cm.sites != basis.sites:
        raise ValueError(f"couplings for {cm.sites} sites, basis has {basis.sites}")
    dim = basis.dim
    H = np.zeros((dim, dim), dtype=np.float64)

    spins = basis.spins()
    H[np.diag_indices(dim)] = 0.5 * np.einsum("ki,ij,kj->k", spins, cm.J, spins)

    up = [basis.bit_column(i) for i in range(basis.sites)]
    for i in range(basis.sites):
        for j in range(i + 1, basis.sites):
            Jij = cm.J[i, j]
            if Jij == 0.0:
                continue
            ud = np.flatnonzero(up[i] & ~up[j])
            du = np.flatnonzero(~up[i] & up[j])
            H[ud, du] = 2.0 * Jij
            H[du, ud] = 2.0 * Jij
    return SectorMatrix(basis=basis, couplings=cm, matrix=H)


def _site_operator(op: np.ndarray, site: int, sites: int) -> np.ndarray:
    """Embed a single-spin operator at ``site`` (bit order: site 0 varies fastest)."""
    out = op
    if site > 0:
        out = np.kron(out, np.eye(1 << site))
    if site < sites - 1:
        out = np.kron(np.eye(1 << (sites - 1 - site)), out)
    return out


def full_space_oracle(cm: CouplingMatrix) -> np.ndarray:
    """The 2^L x 2^L Hamiltonian from explicit Pauli matrices.

    Deliberately ignores the swap shortcut: each J_ij term is the literal
    Kronecker sum sigma^x_i sigma^x_j + sigma^y_i sigma^y_j +
    sigma^z_i sigma^z_j.  Exponential in L, for cross-checks only.
    """
    L = cm.sites
    if L > FULL_SPACE_MAX_SITES:
        raise ValueError(f"full-space construction capped at {FULL_SPACE_MAX_SITES} sites")

    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
    sy = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
    sz = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=np.complex128)  # bit value 1 = up

    H = np.zeros((1 << L, 1 << L), dtype=np.complex128)
    for i in range(L):
        for j in range(i + 1, L):
            if cm.J[i, j] == 0.0:
                continue
            term = np.zeros_like(H)
            for pauli in (sx, sy, sz):
                term += _site_operator(pauli, i, L) @ _site_operator(pauli, j, L)
            H += cm.J[i, j] * term
    if np.abs(H.imag).max() != 0.0:
        raise AssertionError("Pauli construction produced a complex Hamiltonian")
    return H.real.copy()


def sector_of_full_space(H_full: np.ndarray, basis: SectorBasis) -> np.ndarray:
    """Slice the rows/columns of a full-space matrix belonging to one sector."""
    idx = np.asarray(basis.states, dtype=np.int64)
    return H_full[np.ix_(idx, idx)]


def all_up_residual(sm: SectorMatrix) -> float:
    """|| H u - S_J u || for the uniform state u, zero in exact arithmetic.

    Every row of the sector matrix sums to S_J: parallel pairs keep
    J_ij on the diagonal, antiparallel pairs contribute -J_ij there and
    2 J_ij off the diagonal.
    """
    u = np.full(sm.dim, 1.0 / np.sqrt(sm.dim))
    sj = coupling_sum(sm.couplings.J)
    return float(np.linalg.norm(sm.matrix @ u - sj * u))
