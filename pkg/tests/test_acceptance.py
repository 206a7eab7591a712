"""End-to-end acceptance checks; each prints one PASS/FAIL line in the summary."""

import time

import numpy as np

from lattice_spectra import (
    LatticeModel,
    SolverPath,
    clustering_trend,
    count_distinct_curves,
    density_curves,
    eigs,
    eigs_general,
    ep_diagnostics,
    exact_constant_hopping,
    f12_closed_form,
    fidelity,
    pairing_check,
)

from conftest import record_criterion
from oracles import circulant_spectrum, cofactor_roots, dense_matrix, match_distance, random_certified, random_general

TIME_LIMIT = 5.0


class Criterion:
    def __init__(self, name):
        self.name = name
        self.detail = ""

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        ok = exc_type is None and elapsed < TIME_LIMIT
        reason = self.detail if exc_type is None else f"{exc_type.__name__}: {exc}"
        record_criterion(self.name, ok, f"{reason} [{elapsed:.2f}s]")
        if exc_type is None:
            assert elapsed < TIME_LIMIT, f"{self.name} took {elapsed:.2f}s"
        return False


def test_ac01_three_site_ring():
    with Criterion("AC1 three-site all-to-all spectrum and degeneracy") as c:
        m = LatticeModel.uniform(3, 1.0, 1.0, boundary="closed")
        spec = eigs(m)
        err = float(np.max(np.abs(spec.eigenvalues - np.array([-1, -1, 2]))))
        rep = ep_diagnostics(spec)
        c.detail = f"max |E - E_exact| = {err:.1e}; clusters {rep.clusters}, geometric {rep.geometric_multiplicity}"
        assert err <= 1e-10
        err_general = float(np.max(np.abs(eigs_general(m).eigenvalues - np.array([-1, -1, 2]))))
        assert err_general <= 1e-10
        assert len(rep.clusters) == 1 and abs(rep.centers[0] + 1) <= 1e-10
        assert rep.geometric_multiplicity == (2,) and not rep.ep_suspected


def test_ac02_fidelity_closed_form():
    with Criterion("AC2 fidelity of the degenerate pair vs closed form") as c:
        v1 = np.array([1.0, 1.0, -2.0])
        xs = np.random.default_rng(2).uniform(-10, 10, 1000)
        err = max(abs(fidelity(v1, np.array([1 + x, 1.0, -2 - x])) - f12_closed_form(x)) for x in xs)
        f0 = fidelity(v1, np.array([1.0, 1.0, -2.0]))
        fm2 = fidelity(v1, np.array([-1.0, 1.0, 0.0]))
        c.detail = f"max error {err:.1e} over 1000 xi; F(0) = {f0!r}, F(-2) = {fm2!r}"
        assert err <= 1e-12 and f0 == 1.0 and fm2 == 0.0


def test_ac03_reality_certificate():
    with Criterion("AC3 certified chains have real spectra (100 seeds)") as c:
        worst_im, worst_gap = 0.0, 0.0
        for seed in range(100):
            m = random_certified(seed)
            sym = eigs(m)
            assert sym.path is SolverPath.SYMMETRIC_TRIDIAGONAL
            worst_im = max(worst_im, float(np.max(np.abs(sym.eigenvalues.imag))))
            worst_gap = max(worst_gap, match_distance(sym.eigenvalues, eigs_general(m).eigenvalues))
        c.detail = f"max |Im E| = {worst_im:.1e}; symmetrized vs general {worst_gap:.1e}"
        assert worst_im <= 1e-10 and worst_gap <= 1e-10


def test_ac04_pairing_law():
    with Criterion("AC4 E <-> -E pairing and staggered eigenvectors (100 seeds)") as c:
        worst_neg, worst_defect, worst_zero = 0.0, 0.0, 0.0
        for seed in range(100):
            m = random_certified(seed)
            spec = eigs(m)
            worst_neg = max(worst_neg, match_distance(spec.eigenvalues, -spec.eigenvalues))
            rep = pairing_check(spec, tol=1e-8)
            assert rep.verdict and not rep.unpaired
            worst_defect = max(worst_defect, max(rep.alternation_defect))
            if m.n_sites % 2:
                assert rep.zero_mode_index is not None
                worst_zero = max(worst_zero, abs(spec.eigenvalues[rep.zero_mode_index]))
            else:
                assert rep.zero_mode_index is None
        c.detail = f"negation mismatch {worst_neg:.1e}; max defect {worst_defect:.1e}; max |E_zero| {worst_zero:.1e}"
        assert worst_neg <= 1e-10 and worst_defect <= 1e-8 and worst_zero <= 1e-10


def test_ac05_six_density_curves():
    with Criterion("AC5 twelve-site chain shows six distinct density curves") as c:
        spec = eigs(LatticeModel.uniform(12, 0.1, 0.05))
        dens = density_curves(spec)
        np.testing.assert_allclose(np.linalg.norm(spec.vectors, axis=1), 1, atol=1e-12)
        count = count_distinct_curves(dens, tol=1e-8)
        c.detail = f"distinct curves = {count.n_distinct}"
        assert count.n_distinct == 6


def test_ac06_constant_hopping_closed_form():
    with Criterion("AC6 closed form for constant hops matches the solver") as c:
        worst = 0.0
        for n in (3, 12, 50):
            for t, tp in ((1.0, 1.0), (0.1, 0.05)):
                exact = exact_constant_hopping(n, t, tp).eigenvalues
                got = eigs(LatticeModel.uniform(n, t, tp)).eigenvalues
                worst = max(worst, float(np.max(np.abs(exact - got))))
        c.detail = f"max per-eigenvalue error {worst:.1e}"
        assert worst <= 1e-10


def test_ac07_ep_of_order_n():
    with Criterion("AC7 one-way chain is an exceptional point of order 5") as c:
        rep = ep_diagnostics(eigs(LatticeModel.uniform(5, 1.0, 0.0)))
        c.detail = f"clusters {rep.algebraic_multiplicity} at {abs(rep.centers[0]) if rep.centers else None:.1e}, geometric {rep.geometric_multiplicity}"
        assert rep.algebraic_multiplicity == (5,) and abs(rep.centers[0]) <= 1e-8
        assert rep.geometric_multiplicity == (1,) and rep.ep_suspected


def test_ac08_clustering_trend():
    with Criterion("AC8 eigenvectors cluster as t' -> 0") as c:
        pts = clustering_trend([LatticeModel.uniform(8, 1.0, tp) for tp in (0.5, 0.1, 0.01, 0.001)])
        hi = [p.max_fidelity for p in pts]
        c.detail = "max fidelity " + ", ".join(f"{h:.5f}" for h in hi)
        assert all(a <= b for a, b in zip(hi, hi[1:])) and hi[-1] > 0.9


def test_ac09_closed_ring_complex():
    with Criterion("AC9 four-site ring has complex spectrum") as c:
        spec = eigs(LatticeModel.uniform(4, 1.0, 0.25, boundary="closed"))
        err = match_distance(spec.eigenvalues, np.array([1.25, -1.25, 0.75j, -0.75j]))
        fourier = match_distance(spec.eigenvalues, circulant_spectrum(4, 1.0, 0.25))
        c.detail = f"distance to {{+-1.25, +-0.75i}} = {err:.1e}; to Fourier modes {fourier:.1e}"
        assert err <= 1e-10 and fourier <= 1e-10


def test_ac10_cofactor_oracle():
    with Criterion("AC10 general solver vs cofactor-expansion oracle (100 seeds)") as c:
        worst = 0.0
        kinds = set()
        for seed in range(100):
            m = random_general(seed)
            assert m.n_sites <= 8
            kinds.add((m.boundary.value, m.has_gain_loss))
            worst = max(worst, match_distance(eigs_general(m).eigenvalues, cofactor_roots(dense_matrix(m))))
        c.detail = f"max matched distance {worst:.1e}; families {sorted(kinds)}"
        assert len(kinds) == 4
        assert worst <= 1e-8
