"""Monte Carlo ensembles of random definite-magnetization states.

Three ensembles: random one-magnon states, random two-magnon states
(i.i.d. Gaussian coefficients, normalized), and promoted two-magnon
states obtained by raising a random one-magnon state.  Estimators are
deterministic per (seed, index) through per-sample Philox streams, so
results never depend on chunking or worker layout.

Pair statistics default to the single pair (0, 1); every ensemble here
is permutation invariant, so that pair is representative and the cost
stays O(L) per sample.  The all-pairs policy materializes the states
and runs the generic kernels instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .basis import build_basis
from .couplings import sample_seed
from .entanglement import (
    DefiniteParticleState,
    average_concurrence_columns,
    concurrence_from_elements,
    positive_fraction_columns,
)
from .ladder import promotion_map

RANDOM_1P = "random-1p"
RANDOM_2P = "random-2p"
RANDOM_PROMOTED_2P = "random-promoted-2p"
KINDS = (RANDOM_1P, RANDOM_2P, RANDOM_PROMOTED_2P)

PROB_POSITIVE = "prob-positive-concurrence"
MEAN_CONCURRENCE = "mean-concurrence"
MEAN_IPR = "mean-ipr"
QUANTITIES = (PROB_POSITIVE, MEAN_CONCURRENCE, MEAN_IPR)

# erf(1/sqrt2)^2 + erfc(1/sqrt2)^2: large-L probability that a promoted
# pair is entangled, from the signs of the two Gaussian seed amplitudes.
PROB_POSITIVE_ASYMPTOTE = math.erf(2.0**-0.5) ** 2 + math.erfc(2.0**-0.5) ** 2

# Rounded value of promoted_concurrence_constant(): <C> * L for promoted
# random states as L -> infinity.
PROMOTED_CONCURRENCE_COEFF = 0.465

_CHUNK = 1024


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    sites: int
    n_samples: int
    seed: int
    pair_policy: str = "single"
    zero_sum: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.pair_policy not in ("single", "all"):
            raise ValueError(f"pair policy must be 'single' or 'all', got {self.pair_policy!r}")
        if self.sites < 3:
            raise ValueError("ensembles need at least three sites")
        if self.n_samples < 100:
            raise ValueError("need at least 100 samples for a meaningful estimate")
        if self.zero_sum and self.kind == RANDOM_2P:
            raise ValueError("the zero-sum constraint applies to one-magnon seeds only")


@dataclass(frozen=True)
class MCEstimate:
    quantity: str
    kind: str
    pair_policy: str
    sites: int
    n_samples: int
    mean: float
    stderr: float

    CSV_HEADER = "L,quantity,estimate,stderr,n_samples,kind,pair_policy"

    def csv_row(self) -> str:
        return (
            f"{self.sites},{self.quantity},{self.mean!r},{self.stderr!r},"
            f"{self.n_samples},{self.kind},{self.pair_policy}"
        )


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(sample_seed(seed, index)))


def _draw_seed_vector(spec: EnsembleSpec, index: int) -> np.ndarray:
    """Normalized raw coefficients for one sample.

    One-magnon kinds draw L normals, the plain two-magnon ensemble
    draws C(L, 2).  Centering (zero_sum) happens before normalization.
    """
    n = math.comb(spec.sites, 2) if spec.kind == RANDOM_2P else spec.sites
    a = _rng(spec.seed, index).standard_normal(n)
    if spec.zero_sum:
        a -= a.mean()
    return a / np.linalg.norm(a)


def sample_state(spec: EnsembleSpec, index: int) -> DefiniteParticleState:
    """Materialize sample ``index`` as a state over its sector basis."""
    a = _draw_seed_vector(spec, index)
    if spec.kind == RANDOM_2P:
        return DefiniteParticleState(build_basis(spec.sites, 2), a)
    one = DefiniteParticleState(build_basis(spec.sites, 1), a)
    if spec.kind == RANDOM_1P:
        return one
    from .ladder import promote

    return promote(one, promotion_map(one.basis))


def _two_magnon_gathers(sites: int) -> tuple[np.ndarray, np.ndarray]:
    """Ranks of the {0,k} and {1,k} patterns (k >= 2) in the 2-magnon basis."""
    k = np.arange(2, sites)
    base = k * (k - 1) // 2  # rank of {0, k}
    return base, base + 1


def _pair01_elements(spec: EnsembleSpec, A: np.ndarray) -> tuple[np.ndarray, ...]:
    """(v, y, z) of the pair (0, 1) for a chunk of seed-coefficient columns.

    Exact O(L) per column; ``A`` holds normalized seed vectors (one- or
    two-magnon depending on the ensemble kind).
    """
    if spec.kind == RANDOM_1P:
        v = np.zeros(A.shape[1])
        y = 1.0 - A[0] ** 2 - A[1] ** 2
        z = A[0] * A[1]
    elif spec.kind == RANDOM_2P:
        w_idx, x_idx = _two_magnon_gathers(spec.sites)
        v = A[0] ** 2
        w = (A[w_idx] ** 2).sum(axis=0)
        x = (A[x_idx] ** 2).sum(axis=0)
        y = 1.0 - v - w - x
        z = (A[w_idx] * A[x_idx]).sum(axis=0)
    else:  # promoted: pair elements of b_ij = a_i + a_j without materializing
        s = A.sum(axis=0)
        B = (spec.sites - 2.0) + s * s
        b0 = A[0] + A[2:]
        b1 = A[1] + A[2:]
        v = (A[0] + A[1]) ** 2 / B
        w = (b0 * b0).sum(axis=0) / B
        x = (b1 * b1).sum(axis=0) / B
        y = 1.0 - v - w - x
        z = (b0 * b1).sum(axis=0) / B
    return v, np.maximum(y, 0.0), z  # clip rounding residue of 1 - v - w - x


def _promoted_ipr(A: np.ndarray, sites: int) -> np.ndarray:
    """IPR of the promoted state from its normalized one-magnon seed.

    sum_{i<j} (a_i + a_j)^4 expands to (L - 8) P4 + 4 P3 s + 3 with
    P_k = sum a^k and s = sum a, for unit-norm a.
    """
    s = A.sum(axis=0)
    p3 = (A**3).sum(axis=0)
    p4 = (A**4).sum(axis=0)
    B = (sites - 2.0) + s * s
    return ((sites - 8.0) * p4 + 4.0 * p3 * s + 3.0) / (B * B)


def sample_values(spec: EnsembleSpec, quantity: str) -> np.ndarray:
    """Per-sample values of ``quantity``, in sample order."""
    if quantity not in QUANTITIES:
        raise ValueError(f"quantity must be one of {QUANTITIES}, got {quantity!r}")
    out = np.empty(spec.n_samples, dtype=np.float64)
    pmap = None
    basis = None
    if spec.pair_policy == "all":
        basis = build_basis(spec.sites, 1 if spec.kind == RANDOM_1P else 2)
        if spec.kind == RANDOM_PROMOTED_2P:
            pmap = promotion_map(build_basis(spec.sites, 1), basis)

    for lo in range(0, spec.n_samples, _CHUNK):
        hi = min(lo + _CHUNK, spec.n_samples)
        A = np.stack([_draw_seed_vector(spec, idx) for idx in range(lo, hi)], axis=1)

        if quantity == MEAN_IPR:
            if spec.kind == RANDOM_PROMOTED_2P:
                out[lo:hi] = _promoted_ipr(A, spec.sites)
            else:
                out[lo:hi] = (A**4).sum(axis=0)
            continue

        if spec.pair_policy == "single":
            v, y, z = _pair01_elements(spec, A)
            conc = concurrence_from_elements(v, y, z)
            out[lo:hi] = conc if quantity == MEAN_CONCURRENCE else (conc > 0.0).astype(np.float64)
        else:
            states = A
            if spec.kind == RANDOM_PROMOTED_2P:
                states = pmap.apply(A)
                states /= np.linalg.norm(states, axis=0)
            if quantity == MEAN_CONCURRENCE:
                out[lo:hi] = average_concurrence_columns(basis, states)
            else:
                out[lo:hi] = positive_fraction_columns(basis, states)
    return out


def estimate(spec: EnsembleSpec, quantity: str) -> MCEstimate:
    """Monte Carlo mean with its standard error (sample stdev / sqrt N)."""
    values = sample_values(spec, quantity)
    return MCEstimate(
        quantity=quantity,
        kind=spec.kind,
        pair_policy=spec.pair_policy,
        sites=spec.sites,
        n_samples=spec.n_samples,
        mean=float(values.mean()),
        stderr=float(values.std(ddof=1) / math.sqrt(spec.n_samples)),
    )


@dataclass(frozen=True)
class ClosedForms:
    """Reference values the ensembles should reproduce at large L."""

    sites: int
    prob_positive_asymptote: float
    mean_concurrence_promoted2p: float
    mean_concurrence_random2p: float
    mean_sq_coherence_random2p: float
    mean_ipr_random1p: float
    mean_ipr_promoted2p: float
    uniform_concurrence_1p: float
    uniform_avg_concurrence_2p: float


def uniform_avg_concurrence_2p(sites: int) -> float:
    """Pair-averaged concurrence of the uniform two-magnon state."""
    L = sites
    return (2.0 / math.comb(L, 2)) * (L - 2.0 - math.sqrt((L * L - 5.0 * L + 6.0) / 2.0))


def closed_forms(sites: int) -> ClosedForms:
    L = sites
    return ClosedForms(
        sites=L,
        prob_positive_asymptote=PROB_POSITIVE_ASYMPTOTE,
        mean_concurrence_promoted2p=PROMOTED_CONCURRENCE_COEFF / L,
        mean_concurrence_random2p=16.0 / (L * L * math.pi**1.5),
        mean_sq_coherence_random2p=4.0 / L**3,
        mean_ipr_random1p=3.0 / L,
        mean_ipr_promoted2p=6.0 / (L * L),
        uniform_concurrence_1p=2.0 / L,
        uniform_avg_concurrence_2p=uniform_avg_concurrence_2p(L),
    )


@dataclass(frozen=True)
class PromotedPairApprox:
    """Large-L pair (0, 1) elements of a promoted one-magnon state."""

    v: float  # both up
    y: float  # both down
    z: float  # coherence


def promoted_pair_leading_order(a0: float, a1: float, sites: int) -> PromotedPairApprox:
    """Leading 1/L forms of the promoted pair RDM given the two seed amplitudes."""
    L = float(sites)
    return PromotedPairApprox(
        v=(a0 + a1) ** 2 / L,
        y=1.0,
        z=(1.0 + L * a0 * a1) / L,
    )


@lru_cache(maxsize=1)
def promoted_concurrence_constant() -> float:
    """<C> * L for promoted random states as L -> infinity, by quadrature.

    In leading order the pair concurrence is
    2 (|1 + x1 x2| - |x1 + x2|) / L with x1, x2 the standardized seed
    amplitudes, positive exactly on (1 - x1^2)(1 - x2^2) > 0.  The
    region splits into the unit square and its two-sided tails; the
    (x1, x2) -> (-x1, -x2) symmetry halves the tail work.
    """

    def integrand(x2: float, x1: float) -> float:
        density = math.exp(-(x1 * x1 + x2 * x2) / 2.0) / (2.0 * math.pi)
        return (abs(1.0 + x1 * x2) - abs(x1 + x2)) * density

    inner, _ = integrate.dblquad(integrand, -1.0, 1.0, -1.0, 1.0, epsabs=1e-12)
    tail_pp, _ = integrate.dblquad(integrand, 1.0, np.inf, 1.0, np.inf, epsabs=1e-12)
    tail_pm, _ = integrate.dblquad(integrand, 1.0, np.inf, -np.inf, -1.0, epsabs=1e-12)
    return 2.0 * (inner + 2.0 * (tail_pp + tail_pm))
