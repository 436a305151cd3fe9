"""Pairwise entanglement of definite-magnetization states.

For a real state with a fixed number of up spins, the reduced density
matrix of sites (i, j) is determined by five numbers: the populations
v (both up), w (i up, j down), x (i down, j up), y (both down) and the
single coherence z between the two antiparallel configurations.  The
concurrence of such a matrix is max(2 (|z| - sqrt(v y)), 0).

The kernels below accumulate (v, w, x, y, z) directly from the sector
coefficients without ever forming a 2^L density matrix, and accept a
matrix of column states so a whole spectrum is processed in one sweep.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .basis import SectorBasis

_NORM_TOL = 1e-12


@dataclass
class DefiniteParticleState:
    """Real coefficients over one sector basis, unit norm."""

    basis: SectorBasis
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.coefficients, dtype=np.float64)
        if a.shape != (self.basis.dim,):
            raise ValueError(f"expected {self.basis.dim} coefficients, got shape {a.shape}")
        norm = float(np.linalg.norm(a))
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state norm {norm} is not 1 within {_NORM_TOL}")
        self.coefficients = a

    @classmethod
    def normalized(cls, basis: SectorBasis, raw: np.ndarray) -> "DefiniteParticleState":
        raw = np.asarray(raw, dtype=np.float64)
        norm = float(np.linalg.norm(raw))
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(basis, raw / norm)

    @classmethod
    def uniform(cls, basis: SectorBasis) -> "DefiniteParticleState":
        """The equal-amplitude state, an eigenstate of every sector matrix."""
        return cls(basis, np.full(basis.dim, 1.0 / sqrt(basis.dim)))


@dataclass
class PairRDM:
    """Two-site reduced density matrix of a definite-magnetization state.

    Basis order for the populations: v both-up, w = (i up, j down),
    x = (i down, j up), y both-down; z is the real coherence between the
    w and x configurations.
    """

    i: int
    j: int
    v: float
    w: float
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        total = self.v + self.w + self.x + self.y
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"populations sum to {total}, not 1")
        if self.z * self.z > self.w * self.x + 1e-12:
            raise ValueError("coherence violates positivity: z^2 > w x")

    def as_matrix(self) -> np.ndarray:
        """Dense 4x4 matrix in the (uu, ud, du, dd) product basis."""
        rho = np.zeros((4, 4))
        rho[0, 0] = self.v
        rho[1, 1] = self.w
        rho[2, 2] = self.x
        rho[3, 3] = self.y
        rho[1, 2] = rho[2, 1] = self.z
        return rho


def _pair_groups(basis: SectorBasis, i: int, j: int):
    """Split basis indices by the spin configuration at sites (i, j).

    The swap partner of the t-th (i up, j down) state is the t-th
    (i down, j up) state: the swap adds the constant 2^j - 2^i to the
    pattern, so it preserves ascending order between the two groups.
    """
    ui = basis.bit_column(i)
    uj = basis.bit_column(j)
    uu = np.flatnonzero(ui & uj)
    ud = np.flatnonzero(ui & ~uj)
    du = np.flatnonzero(~ui & uj)
    dd = np.flatnonzero(~(ui | uj))
    return uu, ud, du, dd


def pair_rdm_elements(
    basis: SectorBasis, coefficients: np.ndarray, i: int, j: int
) -> tuple[np.ndarray, ...]:
    """(v, w, x, y, z) for one pair, vectorized over column states.

    ``coefficients`` may be a single vector or a (dim, n) matrix; each
    output is then a scalar array or a length-n array.
    """
    if i == j:
        raise ValueError("pair sites must differ")
    a = np.asarray(coefficients, dtype=np.float64)
    uu, ud, du, dd = _pair_groups(basis, i, j)
    sq = a * a
    v = sq[uu].sum(axis=0)
    w = sq[ud].sum(axis=0)
    x = sq[du].sum(axis=0)
    y = sq[dd].sum(axis=0)
    z = (a[ud] * a[du]).sum(axis=0)
    return v, w, x, y, z


def pair_rdm(state: DefiniteParticleState, i: int, j: int) -> PairRDM:
    v, w, x, y, z = pair_rdm_elements(state.basis, state.coefficients, i, j)
    return PairRDM(i=i, j=j, v=float(v), w=float(w), x=float(x), y=float(y), z=float(z))


def concurrence(rdm: PairRDM) -> float:
    """Entanglement of formation monotone for the five-element RDM."""
    return max(2.0 * (abs(rdm.z) - sqrt(rdm.v * rdm.y)), 0.0)


def concurrence_from_elements(v, y, z) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    return np.maximum(2.0 * (np.abs(z) - np.sqrt(np.maximum(v * y, 0.0))), 0.0)


def site_pairs(sites: int) -> list[tuple[int, int]]:
    """All pairs (i, j), i < j, in lexicographic order."""
    return [(i, j) for i in range(sites) for j in range(i + 1, sites)]


def pair_concurrences(basis: SectorBasis, coefficients: np.ndarray) -> np.ndarray:
    """Concurrence of every site pair for every column state.

    Returns an (n_pairs, n_states) array ordered like
    :func:`site_pairs`.  Cost is O(n_pairs * dim) per column.
    """
    a = np.asarray(coefficients, dtype=np.float64)
    squeeze = a.ndim == 1
    if squeeze:
        a = a[:, None]
    pairs = site_pairs(basis.sites)
    out = np.empty((len(pairs), a.shape[1]), dtype=np.float64)
    for row, (i, j) in enumerate(pairs):
        v, w, x, y, z = pair_rdm_elements(basis, a, i, j)
        out[row] = concurrence_from_elements(v, y, z)
    return out[:, 0] if squeeze else out


def average_concurrence(state: DefiniteParticleState) -> float:
    """Concurrence averaged over all site pairs of one state."""
    return float(pair_concurrences(state.basis, state.coefficients).mean())


def average_concurrence_columns(basis: SectorBasis, coefficients: np.ndarray) -> np.ndarray:
    """Per-column pair-averaged concurrence for a matrix of states."""
    return pair_concurrences(basis, coefficients).mean(axis=0)


def positive_fraction_columns(basis: SectorBasis, coefficients: np.ndarray) -> np.ndarray:
    """Per-column fraction of site pairs with strictly positive concurrence."""
    return (pair_concurrences(basis, coefficients) > 0.0).mean(axis=0)


def inverse_participation_ratio(coefficients: np.ndarray) -> np.ndarray | float:
    """Sum of fourth powers; 1 for a basis state, 1/dim for the uniform state."""
    a = np.asarray(coefficients, dtype=np.float64)
    out = (a**4).sum(axis=0)
    return float(out) if np.ndim(out) == 0 else out


def participation_ratio(coefficients: np.ndarray) -> np.ndarray | float:
    """Effective number of participating basis states, 1 / IPR."""
    ipr = inverse_participation_ratio(coefficients)
    return 1.0 / ipr


@dataclass
class StateReport:
    """One row of a per-eigenstate report."""

    index: int
    eigenvalue: float
    e_minus_sj: float
    avg_concurrence: float
    participation: float
    promoted: int  # 1 promoted, 0 new, -1 ambiguous
    degenerate: bool

    CSV_HEADER = "index,eigenvalue,E_minus_SJ,avg_concurrence,PR,promoted,degenerate"

    def csv_row(self) -> str:
        return (
            f"{self.index},{self.eigenvalue!r},{self.e_minus_sj!r},"
            f"{self.avg_concurrence!r},{self.participation!r},"
            f"{self.promoted},{int(self.degenerate)}"
        )
