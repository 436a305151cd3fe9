"""Collective spin raising and lowering between adjacent sectors.

The raising operator sum_i sigma_i^+ commutes with the Hamiltonian, so
normalizing its action on an m-magnon eigenstate yields an
(m+1)-magnon eigenstate with the same eigenvalue.  Eigenstates that
arise this way ("promoted") are detected through sigma^+ sigma^-, whose
eigenvalues on exact eigenstates are integers fixed by angular-momentum
algebra: 0 for states annihilated by the lowering operator ("new"),
at least L - 2m + 2 otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .basis import SectorBasis, build_basis
from .spectrum import Spectrum, fix_signs

LADDER_TOL = 0.5

PROMOTED = 1
NEW = 0
AMBIGUOUS = -1


class ZeroPromotionError(ValueError):
    """sigma^+ annihilated the state, so no promoted state exists."""


@dataclass
class PromotionMap:
    """Unnormalized sigma^+ from the m-magnon to the (m+1)-magnon sector.

    Both directions are stored as gather tables: ``parents[t, b]`` ranks
    the t-th target pattern with its b-th set bit cleared, and
    ``children[s, c]`` ranks the s-th source pattern with its c-th clear
    bit set.  sigma^+ sums over parents, its adjoint sums over children.
    """

    source: SectorBasis
    target: SectorBasis
    parents: np.ndarray = field(repr=False)
    children: np.ndarray = field(repr=False)

    def apply(self, coefficients: np.ndarray) -> np.ndarray:
        """Raw sigma^+ on source-sector coefficients (columns allowed)."""
        a = np.asarray(coefficients, dtype=np.float64)
        out = a[self.parents[:, 0]].astype(np.float64, copy=True)
        for b in range(1, self.parents.shape[1]):
            out += a[self.parents[:, b]]
        return out

    def apply_adjoint(self, coefficients: np.ndarray) -> np.ndarray:
        """Raw sigma^- on target-sector coefficients (columns allowed)."""
        a = np.asarray(coefficients, dtype=np.float64)
        out = a[self.children[:, 0]].astype(np.float64, copy=True)
        for c in range(1, self.children.shape[1]):
            out += a[self.children[:, c]]
        return out


def promotion_map(source: SectorBasis, target: SectorBasis | None = None) -> PromotionMap:
    if target is None:
        target = build_basis(source.sites, source.magnons + 1)
    if target.sites != source.sites or target.magnons != source.magnons + 1:
        raise ValueError("target sector must have one more magnon on the same sites")

    parents = np.empty((target.dim, target.magnons), dtype=np.int64)
    for t, pattern in enumerate(target.states):
        p = pattern
        b = 0
        while p:
            low = p & -p
            parents[t, b] = source.rank(pattern ^ low)
            b += 1
            p ^= low

    children = np.empty((source.dim, source.sites - source.magnons), dtype=np.int64)
    for s, pattern in enumerate(source.states):
        c = 0
        for i in range(source.sites):
            bit = 1 << i
            if not pattern & bit:
                children[s, c] = target.rank(pattern | bit)
                c += 1
    return PromotionMap(source=source, target=target, parents=parents, children=children)


def promote(state, pmap: PromotionMap):
    """Normalized sigma^+ |state>; raises ZeroPromotionError if annihilated."""
    from .entanglement import DefiniteParticleState

    if state.basis is not pmap.source and state.basis.states != pmap.source.states:
        raise ValueError("state does not live in the source sector of the map")
    raw = pmap.apply(state.coefficients)
    norm = float(np.linalg.norm(raw))
    if norm < 1e-12:
        raise ZeroPromotionError("state is annihilated by the raising operator")
    return DefiniteParticleState(pmap.target, raw / norm)


def lower(state, pmap: PromotionMap) -> np.ndarray:
    """Unnormalized sigma^- |state> as source-sector coefficients."""
    if state.basis is not pmap.target and state.basis.states != pmap.target.states:
        raise ValueError("state does not live in the target sector of the map")
    return pmap.apply_adjoint(state.coefficients)


@dataclass
class Classification:
    """Promoted / new labels for every eigenstate of one spectrum.

    ``vectors`` are the spectrum's eigenvectors after re-rotation inside
    each degeneracy group; outside groups they are untouched.
    ``ladder_eigenvalues`` holds <psi| sigma^+ sigma^- |psi> per state
    (the group-diagonalized values inside degenerate groups).
    """

    labels: np.ndarray
    ladder_eigenvalues: np.ndarray
    lowering_norms: np.ndarray
    vectors: np.ndarray = field(repr=False)
    degenerate: np.ndarray = field(repr=False)
    ladder_tol: float = LADDER_TOL

    @property
    def n_promoted(self) -> int:
        return int((self.labels == PROMOTED).sum())

    @property
    def n_new(self) -> int:
        return int((self.labels == NEW).sum())

    @property
    def n_ambiguous(self) -> int:
        return int((self.labels == AMBIGUOUS).sum())


def _label(value: float, tol: float) -> int:
    if value > tol:
        return PROMOTED
    if value < tol:
        return NEW
    return AMBIGUOUS


def classify(spectrum: Spectrum, pmap: PromotionMap, ladder_tol: float = LADDER_TOL) -> Classification:
    """Label each eigenstate by the sigma^+ sigma^- eigenvalue.

    Within a degeneracy group the operator is diagonalized on the group
    subspace and the eigenvectors are rotated accordingly, so labels do
    not depend on the arbitrary basis LAPACK returned for the group.
    """
    if pmap.target.magnons != spectrum.matrix.basis.magnons:
        raise ValueError("promotion map target must match the spectrum's sector")
    vectors = spectrum.vectors.copy()
    lowered = pmap.apply_adjoint(vectors)

    dim = spectrum.dim
    values = np.empty(dim, dtype=np.float64)
    labels = np.empty(dim, dtype=np.int64)
    degenerate = spectrum.degenerate_mask()

    for a, b in spectrum.groups:
        if b - a == 1:
            values[a] = float(lowered[:, a] @ lowered[:, a])
        else:
            # restriction of sigma^+ sigma^- to the degenerate subspace
            G = lowered[:, a:b].T @ lowered[:, a:b]
            G = 0.5 * (G + G.T)
            gvals, gvecs = np.linalg.eigh(G)
            vectors[:, a:b] = fix_signs(vectors[:, a:b] @ gvecs)
            lowered[:, a:b] = lowered[:, a:b] @ gvecs
            values[a:b] = gvals
    for k in range(dim):
        labels[k] = _label(values[k], ladder_tol)

    return Classification(
        labels=labels,
        ladder_eigenvalues=values,
        lowering_norms=np.sqrt(np.maximum(values, 0.0)),
        vectors=vectors,
        degenerate=degenerate,
        ladder_tol=ladder_tol,
    )


def expected_counts(sites: int, magnons: int) -> tuple[int, int]:
    """(promoted, new) eigenstate counts for a sector with 2m <= L."""
    dim = comb(sites, magnons)
    below = comb(sites, magnons - 1) if magnons >= 1 else 0
    return below, dim - below


@dataclass(frozen=True)
class LocalizedBound:
    """Pair entanglement of a promoted fully localized magnon."""

    probability: float
    pair_concurrence: float
    average_concurrence: float


def localized_promotion_bound(sites: int) -> LocalizedBound:
    """Exact pair statistics of promote(single up spin) on L sites.

    The promoted state is the localized spin tensored with the uniform
    one-magnon state of the remaining L-1 sites: a fraction
    C(L-1, 2) / C(L, 2) of the pairs carries concurrence 2 / (L-1),
    the rest none.
    """
    if sites < 3:
        raise ValueError("bound needs at least three sites")
    probability = comb(sites - 1, 2) / comb(sites, 2)
    pair = 2.0 / (sites - 1)
    return LocalizedBound(
        probability=probability,
        pair_concurrence=pair,
        average_concurrence=pair * probability,
    )
