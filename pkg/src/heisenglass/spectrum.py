"""Dense symmetric eigensolves with deterministic conventions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sector import SectorMatrix


class SpectrumError(RuntimeError):
    """Eigensolve failed or violated a post-condition."""


@dataclass
class Spectrum:
    """Eigendecomposition of one sector matrix.

    Eigenvalues ascend; eigenvector k is column k of ``vectors`` with
    its largest-magnitude component made positive.  ``groups`` lists
    contiguous (start, stop) index ranges of eigenvalues that chain
    together within ``degtol``.
    """

    matrix: SectorMatrix
    eigenvalues: np.ndarray
    vectors: np.ndarray
    degtol: float
    groups: list[tuple[int, int]] = field(repr=False)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def degenerate_mask(self) -> np.ndarray:
        mask = np.zeros(self.dim, dtype=bool)
        for a, b in self.groups:
            if b - a > 1:
                mask[a:b] = True
        return mask


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip eigenvector columns so the largest-|.| entry is positive.

    Ties resolve to the lowest index via argmax, so the convention is
    deterministic.
    """
    idx = np.abs(vectors).argmax(axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def group_degeneracies(eigenvalues: np.ndarray, degtol: float) -> list[tuple[int, int]]:
    """Maximal runs of ascending eigenvalues with consecutive gaps <= degtol."""
    n = eigenvalues.size
    groups: list[tuple[int, int]] = []
    start = 0
    for k in range(1, n):
        if eigenvalues[k] - eigenvalues[k - 1] > degtol:
            groups.append((start, k))
            start = k
    if n:
        groups.append((start, n))
    return groups


def default_degtol(matrix: np.ndarray) -> float:
    return 1e-8 * max(1.0, float(np.linalg.norm(matrix)))


def diagonalize(sm: SectorMatrix, degtol: float | None = None, rtol: float = 1e-10) -> Spectrum:
    """Eigensolve a sector matrix (LAPACK) and verify the result.

    Checks the residual of every eigenpair against rtol * ||H||_F,
    orthonormality of the eigenvector matrix, and the trace identity,
    raising SpectrumError instead of returning a silently bad
    decomposition.
    """
    H = sm.matrix
    try:
        evals, evecs = np.linalg.eigh(H)
    except np.linalg.LinAlgError as err:
        raise SpectrumError(f"eigensolver did not converge: {err}") from err

    scale = max(1.0, float(np.linalg.norm(H)))
    residual = np.linalg.norm(H @ evecs - evecs * evals, axis=0)
    worst = float(residual.max(initial=0.0))
    if worst > rtol * scale:
        raise SpectrumError(f"eigenpair residual {worst:.3e} exceeds {rtol:.1e} * ||H||_F")
    ortho = float(np.abs(evecs.T @ evecs - np.eye(evecs.shape[0])).max(initial=0.0))
    if ortho > 1e-10:
        raise SpectrumError(f"eigenvectors not orthonormal, deviation {ortho:.3e}")
    tr = float(np.trace(H))
    if abs(evals.sum() - tr) > 1e-9 * max(1.0, abs(tr)):
        raise SpectrumError("eigenvalue sum disagrees with trace")

    if degtol is None:
        degtol = default_degtol(H)
    return Spectrum(
        matrix=sm,
        eigenvalues=evals,
        vectors=fix_signs(evecs),
        degtol=degtol,
        groups=group_degeneracies(evals, degtol),
    )


def contains_spectrum(outer: np.ndarray, inner: np.ndarray, tol: float) -> bool:
    """Is every eigenvalue of ``inner`` matched (with multiplicity) in ``outer``?

    Greedy two-pointer scan over the ascending arrays; each outer value
    is consumed at most once.
    """
    i = 0
    for lam in inner:
        while i < outer.size and outer[i] < lam - tol:
            i += 1
        if i == outer.size or abs(outer[i] - lam) > tol:
            return False
        i += 1
    return True
