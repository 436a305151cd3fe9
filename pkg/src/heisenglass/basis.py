"""Bit-coded bases for fixed-magnetization sectors.

A basis state of L spins is an integer whose set bits mark the up spins
(bit 0 is site 0).  The sector with m up spins is the list of all such
patterns in ascending integer order, which coincides with the
combinatorial number system, so ranking and unranking are O(L) and need
no search.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

# Dense sector matrices get allocated downstream; keep dimensions sane.
DEFAULT_MAX_DIM = 200_000


@dataclass
class SectorBasis:
    """All L-spin patterns with exactly m bits set, ascending.

    ``words`` holds the same patterns sliced into 64-bit limbs
    (column w covers bits 64*w .. 64*w+63) so that per-site bit tests
    vectorize for any L.
    """

    sites: int
    magnons: int
    states: list[int]
    words: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def bit_column(self, i: int) -> np.ndarray:
        """Boolean array: is site i up in each basis state."""
        if not 0 <= i < self.sites:
            raise ValueError(f"site {i} outside 0..{self.sites - 1}")
        w, b = divmod(i, 64)
        return (self.words[:, w] >> np.uint64(b)) & np.uint64(1) != 0

    def spins(self) -> np.ndarray:
        """(dim, L) array of +-1 spin values, +1 for up."""
        out = np.empty((self.dim, self.sites), dtype=np.float64)
        for i in range(self.sites):
            out[:, i] = np.where(self.bit_column(i), 1.0, -1.0)
        return out

    def rank(self, pattern: int) -> int:
        return rank(self.sites, self.magnons, pattern)

    def index_of_sites(self, up_sites: tuple[int, ...]) -> int:
        """Rank of the state whose up spins sit exactly at ``up_sites``."""
        pattern = 0
        for s in up_sites:
            pattern |= 1 << s
        return self.rank(pattern)


def build_basis(sites: int, magnons: int, max_dim: int = DEFAULT_MAX_DIM) -> SectorBasis:
    """Enumerate the m-magnon sector of L sites.

    Raises ValueError when the arguments are out of range or the sector
    dimension exceeds ``max_dim``.
    """
    if sites < 1:
        raise ValueError(f"need at least one site, got {sites}")
    if not 0 <= magnons <= sites:
        raise ValueError(f"magnon number {magnons} outside 0..{sites}")
    dim = comb(sites, magnons)
    if dim > max_dim:
        raise ValueError(f"sector dimension {dim} exceeds budget {max_dim}")

    # combinations() yields ascending site tuples in lexicographic order;
    # packing them little-endian gives ascending integers.
    states = [sum(1 << s for s in combo) for combo in combinations(range(sites), magnons)]
    states.sort()

    n_words = (sites + 63) // 64
    words = np.zeros((dim, n_words), dtype=np.uint64)
    mask = (1 << 64) - 1
    for k, pattern in enumerate(states):
        for w in range(n_words):
            words[k, w] = (pattern >> (64 * w)) & mask
    return SectorBasis(sites, magnons, states, words)


def rank(sites: int, magnons: int, pattern: int) -> int:
    """Position of ``pattern`` within its sector, without search.

    Combinatorial number system: with set bits at positions
    p_1 < ... < p_m, the rank is sum_k C(p_k, k).
    """
    if pattern < 0 or pattern >> sites:
        raise ValueError(f"pattern {pattern:#x} does not fit {sites} sites")
    r = 0
    k = 0
    p = pattern
    while p:
        low = p & -p
        k += 1
        r += comb(low.bit_length() - 1, k)
        p ^= low
    if k != magnons:
        raise ValueError(f"pattern has {k} bits set, sector expects {magnons}")
    return r


def unrank(sites: int, magnons: int, r: int) -> int:
    """Inverse of :func:`rank`: the r-th pattern of the sector."""
    if not 0 <= r < comb(sites, magnons):
        raise ValueError(f"rank {r} outside sector of dimension {comb(sites, magnons)}")
    pattern = 0
    top = sites
    for k in range(magnons, 0, -1):
        # largest position p with C(p, k) <= r
        p = k - 1
        while p + 1 < top and comb(p + 1, k) <= r:
            p += 1
        pattern |= 1 << p
        r -= comb(p, k)
        top = p
    return pattern


def pair_partners(basis: SectorBasis, k: int, i: int, j: int) -> list[tuple[int, int]]:
    """States reached from state k by swapping the spins at sites i and j.

    Empty when the two spins are equal (the swap acts as identity);
    otherwise a single (index, pattern) pair in the same sector.
    """
    if i == j:
        raise ValueError("pair sites must differ")
    pattern = basis.states[k]
    bi = (pattern >> i) & 1
    bj = (pattern >> j) & 1
    if bi == bj:
        return []
    swapped = pattern ^ ((1 << i) | (1 << j))
    return [(basis.rank(swapped), swapped)]
