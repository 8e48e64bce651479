import math

import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp

from polaron.fock import (
    REPORT_CAVEAT,
    EvolveStats,
    FockBasis,
    FockOperator,
    annihilation_bound_sampled,
    annihilation_bound_sup,
    appendix_bound_checks,
    build_ccr,
    ccr_defect,
    coherent_vacuum,
    creation_bound_ratio,
    evolve,
    froehlich_hamiltonian,
    low_shell_projector,
    mode_expectations,
    pekar_product,
    radial_integral,
    ring_laplacian,
    sandwich_bound,
    shift_defect,
    theorem2_error,
    top_shell_population,
    vacuum_overlap,
    vacuum_overlap_exact,
    weyl,
)


@pytest.fixture(scope="module")
def basis():
    return FockBasis(4, 3, 2.0)


@pytest.fixture(scope="module")
def ccr(basis):
    return build_ccr(basis)


def small_f(basis, rng, scale=0.05):
    return scale * (rng.standard_normal(basis.sites) + 1j * rng.standard_normal(basis.sites))


def test_basis_counting_and_lookup(basis):
    assert basis.dim_fock == math.comb(3 + 4, 4)
    assert basis.dim == 4 * basis.dim_fock
    assert basis.states[0] == (0, 0, 0, 0)
    assert basis.index((1, 0, 2, 0)) == basis.states.index((1, 0, 2, 0))
    assert basis.occupation.max() == 3
    assert basis.length == pytest.approx(1.0)
    assert basis.inv_kabs[0] == 0
    g = basis.grid()
    assert g.kinetic == "stencil" and g.n == 4
    assert np.allclose(np.sort(g.axis_x), np.sort(basis.positions))


@pytest.mark.parametrize("args", [(1, 3, 2.0), (4, 0, 2.0), (4, 3, 0.0)])
def test_basis_validation(args):
    with pytest.raises(ValueError):
        FockBasis(*args)


def test_ccr_holds_below_top_shell(basis, ccr):
    assert ccr_defect(ccr) < 1e-12
    # on the top shell the truncated commutator is wrong, which is why P_low is used
    a0 = ccr.a[0]
    comm = (a0 @ a0.conj().T - a0.conj().T @ a0).toarray()
    target = 1 / (basis.alpha**2 * basis.dk)
    top = basis.occupation == basis.n_max
    assert np.abs(np.diag(comm)[top] - target).max() > 0.1 * target
    assert np.allclose(ccr.number.diagonal(), basis.occupation / basis.alpha**2)
    p = low_shell_projector(basis)
    assert np.allclose(p.diagonal(), ~top)


def test_weyl_unitary_and_vacuum_overlap(basis, ccr, rng):
    f = small_f(basis, rng, 0.01)
    w = weyl(basis, f, ccr=ccr)
    wf = w.fock_factor
    assert np.abs(wf.conj().T @ wf - np.eye(basis.dim_fock)).max() < 1e-12
    assert abs(wf[0, 0] - vacuum_overlap_exact(basis, f)) < 1e-6
    assert abs(vacuum_overlap(basis, f) - vacuum_overlap_exact(basis, f)) < 1e-8
    assert not w.leak_warning
    assert w.matrix.shape == (basis.dim, basis.dim)


def test_weyl_leakage_flag(basis, ccr):
    big = np.full(basis.sites, 3.0 + 0j)
    w = weyl(basis, big, ccr=ccr)
    assert w.leak_warning and w.leakage > 1e-8


def test_shift_property(basis, rng):
    assert shift_defect(basis, small_f(basis, rng)) < 1e-8


def test_coherent_state_expectations(basis, ccr, rng):
    phi = small_f(basis, rng, 0.01)
    psi = np.ones(basis.sites) / 2.0
    st = pekar_product(basis, psi, phi, ccr=ccr)
    assert st.norm() == pytest.approx(1.0, abs=1e-10)
    # <a_k> on W(alpha^2 phi) Omega equals phi(k)
    assert np.allclose(mode_expectations(ccr, st.vector), phi, atol=1e-8)
    chi = coherent_vacuum(basis, basis.alpha**2 * phi, ccr)
    assert np.allclose(np.kron(psi, chi), st.vector)
    assert top_shell_population(basis, st.vector) == pytest.approx(st.leakage)


def test_hamiltonian_structure(basis, ccr):
    fh = froehlich_hamiltonian(basis, ccr=ccr)
    h = fh.H.toarray()
    assert np.allclose(h, h.conj().T)
    free = froehlich_hamiltonian(basis, coupling=0.0, ccr=ccr).H.toarray()
    assert np.allclose(free, (fh.kinetic + fh.number).toarray())
    lap = ring_laplacian(basis).toarray()
    # plane waves diagonalize the stencil Laplacian with symbol 2(1 - cos(ka))/a^2
    k = basis.momenta[1]
    wave = np.exp(1j * k * basis.positions)
    assert np.allclose(lap @ wave, 2 * (1 - np.cos(k * basis.spacing)) / basis.spacing**2 * wave)


def test_fock_operator_hermitian_flag():
    with pytest.raises(ValueError):
        FockOperator(sp.csr_matrix(np.array([[0, 1], [0, 0]], complex)), hermitian=True)
    op = FockOperator(np.eye(2), hermitian=True)
    assert np.allclose((op @ op).toarray(), np.eye(2))
    assert np.allclose(op.H @ np.ones(2), np.ones(2))


def test_krylov_matches_dense(basis, ccr, rng):
    fh = froehlich_hamiltonian(basis, ccr=ccr)
    x = rng.standard_normal(basis.dim) + 1j * rng.standard_normal(basis.dim)
    x /= np.linalg.norm(x)
    stats = EvolveStats()
    for t in (0.7, -0.4):
        got = evolve(fh.H, x, t, tol=1e-11, stats=stats)
        want = sla.expm(-1j * t * fh.H.toarray()) @ x
        assert np.linalg.norm(got - want) < 1e-9
    assert stats.substeps >= 2
    assert np.array_equal(evolve(fh.H, x, 0.0), x)


def test_krylov_breakdown_on_eigenvector(basis, ccr):
    fh = froehlich_hamiltonian(basis, coupling=0.0, ccr=ccr)
    vac = np.zeros(basis.dim_fock, complex)
    vac[0] = 1.0
    # uniform electron times vacuum is a zero-energy eigenvector of the free part
    wave = np.kron(np.ones(basis.sites) / 2.0, vac)
    stats = EvolveStats()
    out = evolve(fh.H, wave, 1.0, stats=stats)
    assert stats.breakdowns >= 1
    assert np.allclose(out, wave)


def test_theorem2_error_is_zero_at_time_zero():
    b = FockBasis(4, 4, 2.0)
    phi0 = np.zeros(4, complex)
    phi0[1] = phi0[-1] = 0.01
    res = theorem2_error(b, phi0, 0.0)
    assert res.error < 1e-12
    assert res.valid and res.norm_quantum == pytest.approx(1.0)


def test_theorem2_error_decreases_with_alpha():
    phi0 = np.zeros(4, complex)
    phi0[1] = phi0[-1] = 0.01
    errs = [theorem2_error(FockBasis(4, 3, a), phi0, 0.2, dt=1e-3).error for a in (2.0, 4.0)]
    assert errs[1] < errs[0]


def test_appendix_quantities(basis):
    assert radial_integral() == pytest.approx(2 * np.pi**2, rel=1e-10)
    u = np.array([1.0, 0.5, -0.3, 0.2j])
    r = [creation_bound_ratio(basis.with_alpha(a), u) for a in (2.0, 4.0)]
    assert r[0] == pytest.approx(r[1], rel=1e-10)
    sup = annihilation_bound_sup(basis)
    best, skipped = annihilation_bound_sampled(basis, 20, np.random.default_rng(0))
    assert skipped == 1
    assert 0 < best <= sup * (1 + 1e-8)
    assert np.isfinite(sandwich_bound(basis))


def test_appendix_report_is_stable(basis):
    rep = appendix_bound_checks(basis, samples=10)
    assert rep.caveat == REPORT_CAVEAT
    assert rep.creation_alpha_spread < 1e-10
    n0, n1 = basis.n_max, basis.n_max + 1
    assert set(rep.annihilation_sup) == {n0, n1}
    assert all(np.isfinite(v) for v in rep.sandwich.values())
    assert abs(rep.radial_integral / rep.radial_target - 1) < 0.01
