import numpy as np
import pytest

import oracles
from heisenglass import basis, couplings, sector, spectrum
from heisenglass.verify import jacobi_eigenvalues


def _sector(model, sites, magnons, seed):
    cm = couplings.sample_couplings(model, sites, seed)
    return cm, sector.assemble(cm, basis.build_basis(sites, magnons))


def test_two_spin_eigenvalues():
    J = np.array([[0.0, 1.0], [1.0, 0.0]])
    cm = couplings.CouplingMatrix(couplings.InfiniteRange(), 2, 0, J)
    spec = spectrum.diagonalize(sector.assemble(cm, basis.build_basis(2, 1)))
    assert np.allclose(spec.eigenvalues, [-3.0, 1.0], atol=1e-12)


def test_all_one_vector_is_eigenvector():
    cm, sm = _sector(couplings.InfiniteRange(), 8, 2, 3)
    spec = spectrum.diagonalize(sm)
    k = int(np.argmin(np.abs(spec.eigenvalues - cm.coupling_sum())))
    assert abs(spec.eigenvalues[k] - cm.coupling_sum()) <= 1e-9
    uniform = np.full(sm.dim, 1.0 / np.sqrt(sm.dim))
    # sign convention makes the uniform vector come out positive
    assert np.abs(spec.vectors[:, k] - uniform).max() <= 1e-9


def test_matches_jacobi_oracle_on_random_symmetric():
    rng = np.random.Generator(np.random.Philox(5))
    M = rng.standard_normal((6, 6))
    M = 0.5 * (M + M.T)
    cm, sm = _sector(couplings.InfiniteRange(), 4, 2, 0)
    sm = sector.SectorMatrix(basis=sm.basis, couplings=cm, matrix=M)
    spec = spectrum.diagonalize(sm)
    assert np.abs(spec.eigenvalues - jacobi_eigenvalues(M)).max() <= 1e-10


def test_sign_convention_and_determinism():
    _, sm = _sector(couplings.PowerLaw(1.0), 9, 2, 11)
    a = spectrum.diagonalize(sm)
    b = spectrum.diagonalize(sm)
    idx = np.abs(a.vectors).argmax(axis=0)
    assert np.all(a.vectors[idx, np.arange(a.dim)] > 0)
    assert np.array_equal(a.vectors, b.vectors)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)


def test_eigensolver_postconditions():
    _, sm = _sector(couplings.NearestNeighbour(), 10, 3, 2)
    spec = spectrum.diagonalize(sm)
    H = sm.matrix
    assert np.all(np.diff(spec.eigenvalues) >= 0)
    assert np.abs(spec.vectors.T @ spec.vectors - np.eye(spec.dim)).max() <= 1e-10
    assert spec.eigenvalues.sum() == pytest.approx(np.trace(H), rel=1e-9)
    assert (spec.eigenvalues**2).sum() == pytest.approx(np.linalg.norm(H) ** 2, rel=1e-9)


def test_nonfinite_input_raises():
    _, sm = _sector(couplings.InfiniteRange(), 6, 2, 0)
    sm.matrix[0, 0] = np.nan
    with pytest.raises(spectrum.SpectrumError):
        spectrum.diagonalize(sm)


def test_group_degeneracies_simple():
    groups = spectrum.group_degeneracies(np.array([1.0, 1.0, 2.0]), 1e-8)
    assert groups == [(0, 2), (2, 3)]


def test_triplet_grouping():
    J = np.array([[0.0, 1.0], [1.0, 0.0]])
    cm = couplings.CouplingMatrix(couplings.InfiniteRange(), 2, 0, J)
    evals = np.sort(np.linalg.eigvalsh(sector.full_space_oracle(cm)))
    groups = spectrum.group_degeneracies(evals, 1e-8)
    assert groups == [(0, 1), (1, 4)]


def test_degenerate_mask():
    _, sm = _sector(couplings.InfiniteRange(), 4, 2, 0)
    spec = spectrum.Spectrum(
        matrix=sm,
        eigenvalues=np.array([1.0, 1.0, 2.0]),
        vectors=np.eye(3),
        degtol=1e-8,
        groups=[(0, 2), (2, 3)],
    )
    assert np.array_equal(spec.degenerate_mask(), [True, True, False])


def test_nn_degeneracy_grouping_against_gap_scan():
    cm, sm = _sector(couplings.NearestNeighbour(), 20, 1, 4)
    spec = spectrum.diagonalize(sm)
    assert spec.groups == oracles.gap_scan_groups(spec.eigenvalues, spec.degtol)
    # multiplicity of the group holding the all-one eigenvalue S_J
    k = int(np.argmin(np.abs(spec.eigenvalues - cm.coupling_sum())))
    (size,) = [b - a for a, b in spec.groups if a <= k < b]
    assert size >= 1


def test_containment_infinite_range():
    cm = couplings.sample_couplings(couplings.InfiniteRange(), 12, 8)
    s1 = spectrum.diagonalize(sector.assemble(cm, basis.build_basis(12, 1)))
    s2 = spectrum.diagonalize(sector.assemble(cm, basis.build_basis(12, 2)))
    assert spectrum.contains_spectrum(s2.eigenvalues, s1.eigenvalues, 1e-9)


def test_containment_rejects_missing_and_multiplicity():
    outer = np.array([0.0, 1.0, 2.0])
    assert spectrum.contains_spectrum(outer, np.array([1.0]), 1e-12)
    assert not spectrum.contains_spectrum(outer, np.array([1.5]), 1e-12)
    assert not spectrum.contains_spectrum(outer, np.array([1.0, 1.0]), 1e-12)


def test_fix_signs_zero_safe():
    v = np.array([[0.0, -1.0], [0.0, 0.5]])
    fixed = spectrum.fix_signs(v.copy())
    assert np.array_equal(fixed[:, 1], [1.0, -0.5])
