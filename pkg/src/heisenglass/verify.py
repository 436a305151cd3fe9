"""Self-contained invariant and oracle checks at small system sizes.

Every check recomputes its expectation through an independent route
(full Pauli construction, general Wootters concurrence, Jacobi
rotations, closed forms) rather than trusting the production kernels,
so a silent regression in any kernel trips at least one named check.
The ``tamper`` hook deliberately breaks one kernel to prove the checks
can fail; it exists for the test suite and is never set by the CLI.
"""

from __future__ import annotations

import numpy as np

from . import basis, couplings, ensembles, entanglement, fitting, ladder, sector, spectrum

CheckResult = tuple[str, bool, str]

_SY2 = np.array([[0.0, -1.0], [1.0, 0.0]])  # i * sigma_y, real form
_FLIP = np.kron(_SY2, _SY2)  # sigma_y x sigma_y up to a sign that drops out


def wootters_concurrence(rho: np.ndarray) -> float:
    """Concurrence of an arbitrary real 4x4 two-qubit density matrix.

    For real rho the spin-flipped matrix is F rho F with F = sy x sy, so
    the usual square roots of eigvals(rho F rho F) equal the absolute
    eigenvalues of the symmetric matrix sqrt(rho) F sqrt(rho).  The
    symmetric form avoids the precision loss of rooting near-zero
    eigenvalues; no X-matrix shortcut is involved.
    """
    w, U = np.linalg.eigh(rho)
    root = U @ (np.sqrt(np.clip(w, 0.0, None))[:, None] * U.T)
    lam = np.abs(np.linalg.eigvalsh(root @ _FLIP @ root))
    lam[::-1].sort()
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def jacobi_eigenvalues(A: np.ndarray, sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations."""
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    for _ in range(sweeps):
        off = np.abs(A - np.diag(np.diag(A))).max(initial=0.0)
        if off < 1e-14 * max(1.0, np.abs(np.diag(A)).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                theta = 0.5 * np.arctan2(2.0 * A[p, q], A[q, q] - A[p, p])
                c, s = np.cos(theta), np.sin(theta)
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                A = rot.T @ A @ rot
    return np.sort(np.diag(A))


def _random_state(rng: np.random.Generator, b: basis.SectorBasis) -> entanglement.DefiniteParticleState:
    return entanglement.DefiniteParticleState.normalized(b, rng.standard_normal(b.dim))


def _check_basis() -> CheckResult:
    b = basis.build_basis(10, 3)
    ok = all(basis.rank(10, 3, s) == k for k, s in enumerate(b.states))
    ok = ok and all(basis.unrank(10, 3, k) == s for k, s in enumerate(b.states))
    ok = ok and all(bin(s).count("1") == 3 for s in b.states)
    return ("basis-rank-roundtrip", ok, f"{b.dim} states, L=10 m=3")


def _check_sector_oracle() -> CheckResult:
    cm = couplings.sample_couplings(couplings.InfiniteRange(), 6, 3)
    full = sector.full_space_oracle(cm)
    worst = 0.0
    for m in range(7):
        b = basis.build_basis(6, m)
        block = sector.sector_of_full_space(full, b)
        worst = max(worst, float(np.abs(sector.assemble(cm, b).matrix - block).max(initial=0.0)))
    pops = np.array([bin(n).count("1") for n in range(64)])
    off = np.abs(full[pops[:, None] != pops[None, :]]).max(initial=0.0)
    ok = worst <= 1e-12 and off == 0.0
    return ("sector-block-oracle", ok, f"max block deviation {worst:.2e}, off-block {off:.1e}")


def _check_uniform_eigenstate() -> CheckResult:
    worst = 0.0
    for model in (couplings.InfiniteRange(), couplings.NearestNeighbour(), couplings.PowerLaw(1.5)):
        cm = couplings.sample_couplings(model, 10, 11)
        sm = sector.assemble(cm, basis.build_basis(10, 2))
        worst = max(worst, sector.all_up_residual(sm))
    return ("uniform-eigenstate", worst <= 1e-10, f"max residual {worst:.2e}")


def _check_promotion_commutes() -> CheckResult:
    cm = couplings.sample_couplings(couplings.InfiniteRange(), 8, 5)
    b1, b2 = basis.build_basis(8, 1), basis.build_basis(8, 2)
    pm = ladder.promotion_map(b1, b2)
    H1 = sector.assemble(cm, b1).matrix
    H2 = sector.assemble(cm, b2).matrix
    P = pm.apply(np.eye(b1.dim))
    resid = float(np.abs(H2 @ P - P @ H1).max(initial=0.0))
    s1 = spectrum.diagonalize(sector.assemble(cm, b1))
    s2 = spectrum.diagonalize(sector.assemble(cm, b2))
    contained = spectrum.contains_spectrum(s2.eigenvalues, s1.eigenvalues, 1e-9)
    ok = resid <= 1e-9 and contained
    return ("promotion-commutes", ok, f"commutator {resid:.2e}, containment {contained}")


def _check_concurrence_oracle(tamper: str | None) -> CheckResult:
    rng = np.random.Generator(np.random.Philox(42))
    worst = 0.0
    for _ in range(50):
        m = int(rng.integers(1, 4))
        b = basis.build_basis(6, m)
        state = _random_state(rng, b)
        i, j = sorted(rng.choice(6, size=2, replace=False).tolist())
        rdm = entanglement.pair_rdm(state, int(i), int(j))
        shortcut = entanglement.concurrence(rdm)
        if tamper == "concurrence":
            shortcut = 2.0 * abs(rdm.z)  # broken on purpose: forgets sqrt(v y)
        worst = max(worst, abs(shortcut - wootters_concurrence(rdm.as_matrix())))
    return ("concurrence-wootters", worst <= 1e-10, f"max |shortcut - oracle| {worst:.2e}")


def _check_uniform_closed_forms() -> CheckResult:
    worst = 0.0
    for L in (4, 8, 16):
        u1 = entanglement.DefiniteParticleState.uniform(basis.build_basis(L, 1))
        c1 = entanglement.concurrence(entanglement.pair_rdm(u1, 0, 1))
        worst = max(worst, abs(c1 - 2.0 / L))
        u2 = entanglement.DefiniteParticleState.uniform(basis.build_basis(L, 2))
        c2 = entanglement.average_concurrence(u2)
        worst = max(worst, abs(c2 - ensembles.uniform_avg_concurrence_2p(L)))
    return ("uniform-closed-forms", worst <= 1e-12, f"max deviation {worst:.2e}")


def _check_ipr_identity() -> CheckResult:
    rng = np.random.Generator(np.random.Philox(7))
    L = 12
    b1 = basis.build_basis(L, 1)
    pm = ladder.promotion_map(b1)
    worst = 0.0
    for _ in range(20):
        a = rng.standard_normal(L)
        a -= a.mean()
        a /= np.linalg.norm(a)
        st = entanglement.DefiniteParticleState(b1, a)
        direct = entanglement.inverse_participation_ratio(ladder.promote(st, pm).coefficients)
        ipr1 = entanglement.inverse_participation_ratio(a)
        predicted = ((L - 8.0) * ipr1 + 3.0) / (L - 2.0) ** 2
        worst = max(worst, abs(direct - predicted))
    return ("ipr-promotion-identity", worst <= 1e-12, f"max deviation {worst:.2e}")


def _check_localized_bound() -> CheckResult:
    L = 10
    b1 = basis.build_basis(L, 1)
    pm = ladder.promotion_map(b1)
    coeff = np.zeros(b1.dim)
    coeff[3] = 1.0
    promoted = ladder.promote(entanglement.DefiniteParticleState(b1, coeff), pm)
    conc = entanglement.pair_concurrences(pm.target, promoted.coefficients)
    bound = ladder.localized_promotion_bound(L)
    dev = max(
        abs(conc.mean() - bound.average_concurrence),
        abs((conc > 0).mean() - bound.probability),
        abs(conc.max() - bound.pair_concurrence),
    )
    return ("localized-bound", dev <= 1e-12, f"max deviation {dev:.2e}")


def _check_classification() -> CheckResult:
    cm = couplings.sample_couplings(couplings.InfiniteRange(), 12, 21)
    b1, b2 = basis.build_basis(12, 1), basis.build_basis(12, 2)
    pm = ladder.promotion_map(b1, b2)
    spec = spectrum.diagonalize(sector.assemble(cm, b2))
    cls = ladder.classify(spec, pm)
    expected = ladder.expected_counts(12, 2)
    counts_ok = (cls.n_promoted, cls.n_new) == expected and cls.n_ambiguous == 0
    # ladder eigenvalues must sit on integers fixed by the spin algebra
    rounded = np.round(cls.ladder_eigenvalues)
    integers_ok = bool(np.abs(cls.ladder_eigenvalues - rounded).max(initial=0.0) <= 1e-8)
    ok = counts_ok and integers_ok
    return ("classification-counts", ok, f"promoted/new {cls.n_promoted}/{cls.n_new}, expected {expected}")


def _check_degeneracy_grouping() -> CheckResult:
    cm = couplings.sample_couplings(couplings.NearestNeighbour(), 12, 2)
    sm = sector.assemble(cm, basis.build_basis(12, 1))
    spec = spectrum.diagonalize(sm)
    # brute-force gap scan must induce the same grouping
    ev = spec.eigenvalues
    cuts = [k for k in range(1, ev.size) if ev[k] - ev[k - 1] > spec.degtol]
    starts = [0] + cuts
    stops = cuts + [ev.size]
    ok = list(zip(starts, stops)) == spec.groups
    return ("degeneracy-grouping", ok, f"{len(spec.groups)} groups at degtol {spec.degtol:.2e}")


def _check_jacobi() -> CheckResult:
    cm = couplings.sample_couplings(couplings.PowerLaw(1.0), 6, 17)
    sm = sector.assemble(cm, basis.build_basis(6, 2))
    spec = spectrum.diagonalize(sm)
    dev = float(np.abs(spec.eigenvalues - jacobi_eigenvalues(sm.matrix)).max(initial=0.0))
    return ("eigensolver-jacobi", dev <= 1e-10, f"max eigenvalue deviation {dev:.2e}")


def _check_fit_recovery() -> CheckResult:
    L = np.array([8.0, 12, 16, 20, 28, 40, 64])
    truth = np.array([0.9, 1.1])
    y = fitting.model_value(fitting.POWER_LAW, truth, L)
    res = fitting.fit(fitting.POWER_LAW, L, y)
    dev = float(np.abs(res.parameters - truth).max(initial=0.0))
    return ("fit-recovery", res.converged and dev <= 1e-6, f"parameter deviation {dev:.2e}")


def _check_estimate_determinism() -> CheckResult:
    spec = ensembles.EnsembleSpec(ensembles.RANDOM_PROMOTED_2P, 20, 200, 5)
    a = ensembles.estimate(spec, ensembles.MEAN_CONCURRENCE)
    b = ensembles.estimate(spec, ensembles.MEAN_CONCURRENCE)
    ok = repr(a.mean) == repr(b.mean) and repr(a.stderr) == repr(b.stderr)
    return ("estimate-determinism", ok, f"mean {a.mean!r}")


def run_checks(tamper: str | None = None) -> list[CheckResult]:
    """Run every named check; ``tamper`` breaks one kernel on purpose."""
    if tamper not in (None, "concurrence"):
        raise ValueError(f"unknown tamper target {tamper!r}")
    return [
        _check_basis(),
        _check_sector_oracle(),
        _check_uniform_eigenstate(),
        _check_promotion_commutes(),
        _check_concurrence_oracle(tamper),
        _check_uniform_closed_forms(),
        _check_ipr_identity(),
        _check_localized_bound(),
        _check_classification(),
        _check_degeneracy_grouping(),
        _check_jacobi(),
        _check_fit_recovery(),
        _check_estimate_determinism(),
    ]


def report(results: list[CheckResult]) -> str:
    lines = [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in results]
    n_bad = sum(1 for _, ok, _ in results if not ok)
    lines.append(f"{len(results) - n_bad}/{len(results)} checks passed")
    return "\n".join(lines)
