"""Entanglement structure of disordered Heisenberg spin sectors.

Fixed-magnon exact diagonalization for Heisenberg models with random
couplings (infinite-range, nearest-neighbour ring, power-law decay on a
ring), plus the magnon-promotion ladder, pairwise concurrence analysis,
random-state ensembles, and finite-size scaling fits.
"""

from .basis import SectorBasis, build_basis, rank, unrank
from .couplings import (
    CouplingMatrix,
    DisorderPlan,
    InfiniteRange,
    NearestNeighbour,
    PowerLaw,
    sample_couplings,
)
from .entanglement import (
    DefiniteParticleState,
    PairRDM,
    average_concurrence,
    concurrence,
    pair_concurrences,
    pair_rdm,
)
from .ladder import Classification, PromotionMap, classify, promote, promotion_map
from .sector import SectorMatrix, assemble
from .spectrum import Spectrum, diagonalize

__version__ = "0.1.0"

__all__ = [
    "SectorBasis",
    "build_basis",
    "rank",
    "unrank",
    "CouplingMatrix",
    "DisorderPlan",
    "InfiniteRange",
    "NearestNeighbour",
    "PowerLaw",
    "sample_couplings",
    "DefiniteParticleState",
    "PairRDM",
    "average_concurrence",
    "concurrence",
    "pair_concurrences",
    "pair_rdm",
    "Classification",
    "PromotionMap",
    "classify",
    "promote",
    "promotion_map",
    "SectorMatrix",
    "assemble",
    "Spectrum",
    "diagonalize",
    "__version__",
]
