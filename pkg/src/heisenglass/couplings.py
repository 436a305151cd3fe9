"""Random exchange couplings for disordered Heisenberg chains and graphs.

Three disorder laws on L sites arranged on a ring:

* ``InfiniteRange``: every pair carries an independent N(0, 1) coupling.
* ``NearestNeighbour``: N(0, 1) on ring-adjacent pairs only.
* ``PowerLaw(sigma)``: variance 1 / r_ij^sigma with r_ij the chord
  distance through the ring, so sigma = 0 reproduces the infinite-range
  law and large sigma approaches the nearest-neighbour one.

Sampling uses the counter-based Philox generator seeded through
``SeedSequence`` and numpy's ziggurat Gaussian transform, so a
(seed, sample index) pair fixes every matrix bit-exactly regardless of
how many samples are drawn around it.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class InfiniteRange:
    name = "infinite-range"


@dataclass(frozen=True)
class NearestNeighbour:
    name = "nearest-neighbour"


@dataclass(frozen=True)
class PowerLaw:
    sigma: float
    name = "power-law"

    def __post_init__(self) -> None:
        if not self.sigma >= 0:
            raise ValueError(f"power-law exponent must be >= 0, got {self.sigma}")


Model = InfiniteRange | NearestNeighbour | PowerLaw


@dataclass
class CouplingMatrix:
    """Symmetric coupling matrix with zero diagonal plus its provenance."""

    model: Model
    sites: int
    seed: int
    J: np.ndarray

    def coupling_sum(self) -> float:
        """Sum over the upper triangle, the eigenvalue of the all-up state."""
        return coupling_sum(self.J)


def chord_distance(sites: int, i: int, j: int) -> float:
    """Euclidean distance between sites i and j on the unit-spacing ring.

    Sites are equally spaced on a circle of circumference L, so the
    chord is (L / pi) * sin(pi * |i - j| / L).  Only |i - j| enters;
    any common index base gives the same answer.
    """
    if i == j:
        raise ValueError("chord distance needs two distinct sites")
    d = abs(i - j) % sites
    return (sites / math.pi) * math.sin(math.pi * d / sites)


def ring_pairs(sites: int) -> list[tuple[int, int]]:
    """Adjacent (i, j) pairs of the periodic ring, 0-indexed, i < j."""
    if sites == 2:
        return [(0, 1)]
    pairs = [(i, i + 1) for i in range(sites - 1)]
    pairs.append((0, sites - 1))
    return sorted(pairs)


def sample_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Seed for one disorder sample, a pure function of (master, index)."""
    return np.random.SeedSequence(entropy=(master_seed, index))


def _generator(seed: int | np.random.SeedSequence) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def sample_couplings(
    model: Model, sites: int, seed: int | np.random.SeedSequence
) -> CouplingMatrix:
    """Draw one disorder realization.

    Upper-triangle entries are drawn in lexicographic (i, j) order, one
    Gaussian per structurally present pair, then mirrored.  The power
    law scales the unit normals by r_ij^(-sigma/2); with sigma = 0 this
    reproduces the infinite-range stream verbatim.
    """
    if sites < 2:
        raise ValueError("need at least two sites for a coupling matrix")
    rng = _generator(seed)
    J = np.zeros((sites, sites), dtype=np.float64)

    if isinstance(model, NearestNeighbour):
        pairs = ring_pairs(sites)
        draws = rng.standard_normal(len(pairs))
        for (i, j), g in zip(pairs, draws):
            J[i, j] = g
    elif isinstance(model, (InfiniteRange, PowerLaw)):
        iu, ju = np.triu_indices(sites, k=1)
        draws = rng.standard_normal(iu.size)
        if isinstance(model, PowerLaw) and model.sigma > 0:
            dist = np.array([chord_distance(sites, int(a), int(b)) for a, b in zip(iu, ju)])
            draws = draws * dist ** (-model.sigma / 2.0)
        J[iu, ju] = draws
    else:
        raise TypeError(f"unknown coupling model {model!r}")

    J += J.T
    seed_int = seed if isinstance(seed, int) else _entropy_int(seed)
    return CouplingMatrix(model=model, sites=sites, seed=seed_int, J=J)


def _entropy_int(seq: np.random.SeedSequence) -> int:
    ent = seq.entropy
    if isinstance(ent, (tuple, list)):
        # fold the (master, index) tuple into one reportable integer
        return int(np.random.SeedSequence(entropy=tuple(ent)).generate_state(1, np.uint64)[0])
    return int(ent)


def coupling_sum(J: np.ndarray) -> float:
    """S_J = sum of J_ij over i < j."""
    return float(np.triu(J, k=1).sum())


@dataclass
class DisorderPlan:
    """A reproducible batch of disorder samples."""

    model: Model
    sites: int
    n_samples: int
    master_seed: int

    def seed_for(self, index: int) -> np.random.SeedSequence:
        if not 0 <= index < self.n_samples:
            raise ValueError(f"sample index {index} outside 0..{self.n_samples - 1}")
        return sample_seed(self.master_seed, index)

    def realization(self, index: int) -> CouplingMatrix:
        return sample_couplings(self.model, self.sites, self.seed_for(index))


def model_to_dict(model: Model) -> dict:
    d: dict = {"name": model.name}
    if isinstance(model, PowerLaw):
        d["sigma"] = model.sigma
    return d


def model_from_dict(d: dict) -> Model:
    name = d["name"]
    if name == InfiniteRange.name:
        return InfiniteRange()
    if name == NearestNeighbour.name:
        return NearestNeighbour()
    if name == PowerLaw.name:
        return PowerLaw(sigma=float(d["sigma"]))
    raise ValueError(f"unknown model name {name!r}")


def to_csv(cm: CouplingMatrix) -> str:
    """Serialize as CSV rows ``i,j,J_ij`` (sites 1-indexed) behind a JSON header."""
    header = {
        "model": model_to_dict(cm.model),
        "sites": cm.sites,
        "seed": cm.seed,
    }
    buf = io.StringIO()
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    buf.write("i,j,J_ij\n")
    for i in range(cm.sites):
        for j in range(i + 1, cm.sites):
            buf.write(f"{i + 1},{j + 1},{float(cm.J[i, j])!r}\n")
    return buf.getvalue()


def from_csv(text: str) -> CouplingMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing JSON header line")
    header = json.loads(lines[0].lstrip("# "))
    sites = int(header["sites"])
    J = np.zeros((sites, sites), dtype=np.float64)
    for ln in lines[2:]:
        si, sj, sv = ln.split(",")
        i, j = int(si) - 1, int(sj) - 1
        J[i, j] = J[j, i] = float(sv)
    return CouplingMatrix(
        model=model_from_dict(header["model"]),
        sites=sites,
        seed=int(header["seed"]),
        J=J,
    )
