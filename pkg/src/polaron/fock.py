"""Truncated Fock-space Frohlich model on a 1D ring.

The electron lives on M ring sites ``x_j = -L/2 + j*a`` (L = M*a) and couples to
the M lattice momenta ``k = 2*pi*m/L`` (FFT order, k = 0 uncoupled).  Bosons
are truncated by total occupation ``sum_j n_j <= n_max``; occupation tuples are
enumerated in lexicographic order.  The product space is ordered electron-site
major: ``index = site * dim_fock + fock_index``.

Rescaled CCR: with ``b_k`` the standard ladder operators,
``a_k = alpha^-1 dk^-1/2 b_k`` so that ``[a_k, a_k'^*] = alpha^-2 delta_kk' / dk``,
the lattice form of ``alpha^-2 delta(k - k')``.  ``N = sum_k dk a_k^* a_k``.

This is a one-dimensional stand-in for the three-dimensional model: it checks
scaling structure in alpha, not the constants of the continuum estimates.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import SpectralGrid, make_grid

log = logging.getLogger(__name__)

REPORT_CAVEAT = (
    "1D ring toy model with |k|^-1 coupling: verifies alpha-scaling structure only, "
    "not the constants or hypotheses of the three-dimensional result"
)


@dataclass(frozen=True)
class FockBasis:
    sites: int
    n_max: int
    alpha: float
    spacing: float = 0.25
    states: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.sites < 2:
            raise ValueError("need at least two ring sites")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        states = tuple(
            s
            for s in itertools.product(range(self.n_max + 1), repeat=self.sites)
            if sum(s) <= self.n_max
        )
        object.__setattr__(self, "states", states)

    @property
    def modes(self) -> int:
        return self.sites

    @property
    def length(self) -> float:
        return self.sites * self.spacing

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.length

    @property
    def momenta(self) -> np.ndarray:
        return self.dk * np.fft.fftfreq(self.sites, d=1.0 / self.sites)

    @property
    def positions(self) -> np.ndarray:
        return -0.5 * self.length + self.spacing * np.arange(self.sites)

    @property
    def inv_kabs(self) -> np.ndarray:
        k = np.abs(self.momenta)
        out = np.zeros_like(k)
        out[k > 0] = 1.0 / k[k > 0]
        return out

    @property
    def dim_fock(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.sites * self.dim_fock

    @property
    def occupation(self) -> np.ndarray:
        """Total boson count of each Fock basis state."""
        return np.array([sum(s) for s in self.states])

    def index(self, state: tuple[int, ...]) -> int:
        return self._lookup[state]

    @property
    def _lookup(self) -> dict:
        cache = self.__dict__.get("_lookup_cache")
        if cache is None:
            cache = {s: i for i, s in enumerate(self.states)}
            object.__setattr__(self, "_lookup_cache", cache)
        return cache

    def grid(self) -> SpectralGrid:
        """The d = 1 LP grid matching this ring (nearest-neighbour kinetic symbol)."""
        return make_grid(self.sites, self.length, 1, kinetic="stencil")

    def with_n_max(self, n_max: int) -> "FockBasis":
        return FockBasis(self.sites, n_max, self.alpha, self.spacing)

    def with_alpha(self, alpha: float) -> "FockBasis":
        return FockBasis(self.sites, self.n_max, alpha, self.spacing)


@dataclass
class FockOperator:
    matrix: sp.spmatrix | np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        if self.hermitian:
            defect = _norm(self.matrix - self.matrix.conj().T)
            scale = max(_norm(self.matrix), 1e-300)
            if defect > 1e-12 * scale:
                raise ValueError(f"operator flagged hermitian but ||A - A^*|| = {defect:.3e}")

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(self.matrix @ other.matrix)
        return self.matrix @ other

    @property
    def H(self) -> "FockOperator":
        return FockOperator(self.matrix.conj().T, self.hermitian)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray() if sp.issparse(self.matrix) else np.asarray(self.matrix)


def _norm(a) -> float:
    if sp.issparse(a):
        return float(spla.norm(a))
    return float(np.linalg.norm(a))


# --- ladder operators -------------------------------------------------------------


def _ladder(basis: FockBasis, mode: int) -> sp.csr_matrix:
    """Standard annihilator b on the truncated Fock space (no rescaling)."""
    rows, cols, vals = [], [], []
    for j, s in enumerate(basis.states):
        n = s[mode]
        if n == 0:
            continue
        lower = s[:mode] + (n - 1,) + s[mode + 1 :]
        rows.append(basis.index(lower))
        cols.append(j)
        vals.append(math.sqrt(n))
    d = basis.dim_fock
    return sp.csr_matrix((vals, (rows, cols)), shape=(d, d), dtype=complex)


@dataclass
class CCRSet:
    """Rescaled ladder operators on the Fock factor and on the full space."""

    basis: FockBasis
    a: list[sp.csr_matrix]  # Fock factor
    number: sp.csr_matrix  # N on the Fock factor

    def a_full(self, mode: int) -> sp.csr_matrix:
        return sp.kron(sp.identity(self.basis.sites), self.a[mode], format="csr")

    def adag_full(self, mode: int) -> sp.csr_matrix:
        return self.a_full(mode).conj().T.tocsr()

    @property
    def number_full(self) -> sp.csr_matrix:
        return sp.kron(sp.identity(self.basis.sites), self.number, format="csr")


def build_ccr(basis: FockBasis) -> CCRSet:
    scale = 1.0 / (basis.alpha * math.sqrt(basis.dk))
    a = [(scale * _ladder(basis, m)).tocsr() for m in range(basis.modes)]
    number = sum(basis.dk * (ak.conj().T @ ak) for ak in a)
    return CCRSet(basis, a, sp.csr_matrix(number))


def low_shell_projector(basis: FockBasis, below: int | None = None) -> sp.csr_matrix:
    """Projector (Fock factor) onto states with total occupation < ``below`` (default n_max)."""
    below = basis.n_max if below is None else below
    mask = (basis.occupation < below).astype(complex)
    return sp.diags(mask, format="csr")


def ccr_defect(ccr: CCRSet) -> float:
    """max_{k,k'} ||([a_k, a_k'^*] - alpha^-2 delta_kk'/dk) P_low||."""
    basis = ccr.basis
    p = low_shell_projector(basis)
    target = 1.0 / (basis.alpha**2 * basis.dk)
    eye = sp.identity(basis.dim_fock, format="csr")
    worst = 0.0
    for i, ai in enumerate(ccr.a):
        for j, aj in enumerate(ccr.a):
            comm = ai @ aj.conj().T - aj.conj().T @ ai
            if i == j:
                comm = comm - target * eye
            worst = max(worst, _norm((comm @ p).toarray()) if comm.nnz else 0.0)
    return worst


def top_shell_population(basis: FockBasis, state: np.ndarray) -> float:
    """Probability weight of ``state`` (full space) on the top occupation shell."""
    occ = np.tile(basis.occupation, basis.sites)
    return float(np.sum(np.abs(state[occ == basis.n_max]) ** 2) / np.sum(np.abs(state) ** 2))


# --- Weyl operators and product states ------------------------------------------------


@dataclass
class WeylOperator(FockOperator):
    fock_factor: np.ndarray | None = field(default=None, repr=False)
    leakage: float = 0.0
    leak_warning: bool = False


def weyl_generator(ccr: CCRSet, f: np.ndarray) -> sp.csr_matrix:
    """sum_k dk (f(k) a_k^* - conj(f(k)) a_k) on the Fock factor."""
    dk = ccr.basis.dk
    gen = sp.csr_matrix((ccr.basis.dim_fock,) * 2, dtype=complex)
    for m, ak in enumerate(ccr.a):
        if f[m] != 0:
            gen = gen + dk * (f[m] * ak.conj().T - np.conj(f[m]) * ak)
    return gen.tocsr()


def weyl(basis: FockBasis, f: np.ndarray, leak_tol: float = 1e-8, ccr: CCRSet | None = None) -> WeylOperator:
    """W(f) = exp(sum_k dk (f a^* - conj(f) a)) as a unitary on the product space.

    ``leakage`` is the top-shell population of ``W(f) Omega``; it is flagged when
    above ``leak_tol``.
    """
    ccr = ccr or build_ccr(basis)
    f = np.asarray(f, dtype=complex)
    wf = sla.expm(weyl_generator(ccr, f).toarray())
    leak = float(np.sum(np.abs(wf[basis.occupation == basis.n_max, 0]) ** 2))
    if leak > leak_tol:
        log.warning("Weyl truncation leakage %.3e exceeds %.1e", leak, leak_tol)
    full = sp.kron(sp.identity(basis.sites), sp.csr_matrix(wf), format="csr")
    return WeylOperator(full, False, wf, leak, leak > leak_tol)


def vacuum_overlap_exact(basis: FockBasis, f: np.ndarray) -> float:
    """exp(-||f||^2 alpha^-2 / 2) with ||f||^2 = sum_k dk |f(k)|^2."""
    nf2 = float(np.sum(np.abs(f) ** 2) * basis.dk)
    return math.exp(-0.5 * nf2 / basis.alpha**2)


def shift_defect(basis: FockBasis, f: np.ndarray, pad: int = 10) -> float:
    """max_k ||(W^* a_k W - a_k - alpha^-2 f(k)) P_low|| on the Fock factor.

    W is exponentiated in the enlarged truncation ``n_max + pad`` and tested on
    the states of ``basis`` below its top shell, so the result measures the
    shifting identity rather than the cutoff of the exponential.
    """
    f = np.asarray(f, complex)
    big = basis.with_n_max(basis.n_max + pad)
    ccr = build_ccr(big)
    gen = weyl_generator(ccr, f).tocsc()
    low = np.flatnonzero(big.occupation < basis.n_max)
    x = np.zeros((big.dim_fock, low.size), complex)
    x[low, np.arange(low.size)] = 1.0
    wx = spla.expm_multiply(gen, x)
    worst = 0.0
    for m, ak in enumerate(ccr.a):
        lhs = spla.expm_multiply(-gen, ak @ wx) - ak @ x - f[m] / basis.alpha**2 * x
        worst = max(worst, float(np.linalg.norm(lhs, 2)))
    return worst


def vacuum_overlap(basis: FockBasis, f: np.ndarray, pad: int = 2) -> complex:
    """<Omega, W(f) Omega> by dense exponentiation in the truncation ``n_max + pad``."""
    big = basis.with_n_max(basis.n_max + pad)
    return complex(sla.expm(weyl_generator(build_ccr(big), np.asarray(f, complex)).toarray())[0, 0])


@dataclass
class FockState:
    basis: FockBasis
    vector: np.ndarray = field(repr=False)
    leakage: float = 0.0
    leak_warning: bool = False

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


def coherent_vacuum(basis: FockBasis, f: np.ndarray, ccr: CCRSet | None = None) -> np.ndarray:
    """W(f) Omega on the Fock factor."""
    ccr = ccr or build_ccr(basis)
    vac = np.zeros(basis.dim_fock, complex)
    vac[0] = 1.0
    return spla.expm_multiply(weyl_generator(ccr, np.asarray(f, complex)), vac)


def pekar_product(
    basis: FockBasis,
    psi: np.ndarray,
    phi: np.ndarray,
    leak_tol: float = 1e-8,
    ccr: CCRSet | None = None,
) -> FockState:
    """psi (site vector, l2-normalized) tensored with W(alpha^2 phi) Omega."""
    chi = coherent_vacuum(basis, basis.alpha**2 * np.asarray(phi, complex), ccr)
    vec = np.kron(np.asarray(psi, complex), chi)
    leak = float(np.sum(np.abs(chi[basis.occupation == basis.n_max]) ** 2))
    return FockState(basis, vec, leak, leak > leak_tol)


def mode_expectations(ccr: CCRSet, state: np.ndarray) -> np.ndarray:
    """<a_k> for every mode."""
    return np.array(
        [np.vdot(state, ccr.a_full(m) @ state) for m in range(ccr.basis.modes)]
    )


# --- Hamiltonian -----------------------------------------------------------------------


def ring_laplacian(basis: FockBasis) -> sp.csr_matrix:
    """-Laplacian with the nearest-neighbour periodic stencil."""
    m, a = basis.sites, basis.spacing
    main = np.full(m, 2.0 / a**2)
    off = np.full(m, -1.0 / a**2)
    lap = sp.diags([main, off[:-1], off[:-1]], [0, 1, -1], shape=(m, m), format="lil")
    lap[0, m - 1] += -1.0 / a**2
    lap[m - 1, 0] += -1.0 / a**2
    return lap.tocsr().astype(complex)


@dataclass
class FrohlichHamiltonian:
    H: FockOperator
    phi_plus: sp.csr_matrix  # Phi_x^+ = sum_k dk |k|^-1 e^{ikx} a_k
    phi_minus: sp.csr_matrix
    kinetic: sp.csr_matrix  # -Laplacian (x) 1
    number: sp.csr_matrix  # 1 (x) N
    ccr: CCRSet


def froehlich_hamiltonian(basis: FockBasis, coupling: float = 1.0, ccr: CCRSet | None = None) -> FrohlichHamiltonian:
    """-Laplacian + Phi_x + N on the product space; ``coupling = 0`` removes Phi_x."""
    ccr = ccr or build_ccr(basis)
    m = basis.sites
    x = basis.positions
    kin = sp.kron(ring_laplacian(basis), sp.identity(basis.dim_fock), format="csr")
    num = ccr.number_full
    phi_plus = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for mode, k in enumerate(basis.momenta):
        if k == 0:
            continue
        c = basis.dk * basis.inv_kabs[mode]
        phase = sp.diags(np.exp(1j * k * x), format="csr")
        phi_plus = phi_plus + c * sp.kron(phase, ccr.a[mode], format="csr")
    phi_plus = phi_plus.tocsr()
    phi_minus = phi_plus.conj().T.tocsr()
    h = kin + num + coupling * (phi_plus + phi_minus)
    return FrohlichHamiltonian(FockOperator(h.tocsr(), hermitian=True), phi_plus, phi_minus, kin, num, ccr)


def sandwich_bound(basis: FockBasis, eps: float = 0.5) -> float:
    """Smallest eigenvalue of H - (1 - eps)(-Laplacian + N)."""
    fh = froehlich_hamiltonian(basis)
    op = fh.H.matrix - (1.0 - eps) * (fh.kinetic + fh.number)
    if basis.dim <= 3000:
        return float(sla.eigh(op.toarray(), eigvals_only=True, subset_by_index=[0, 0])[0])
    return float(spla.eigsh(op, k=1, which="SA", return_eigenvectors=False)[0])


# --- time evolution ----------------------------------------------------------------


@dataclass
class EvolveStats:
    substeps: int = 0
    max_error: float = 0.0
    breakdowns: int = 0
    rejected: int = 0


def _lanczos(h, v: np.ndarray, m: int):
    n = v.shape[0]
    beta0 = np.linalg.norm(v)
    vs = np.zeros((m + 1, n), dtype=complex)
    alphas = np.zeros(m)
    betas = np.zeros(m)
    vs[0] = v / beta0
    for j in range(m):
        w = h @ vs[j]
        if j > 0:
            w = w - betas[j - 1] * vs[j - 1]
        alphas[j] = np.real(np.vdot(vs[j], w))
        w = w - alphas[j] * vs[j]
        # full reorthogonalization keeps the basis orthonormal at this size
        w = w - vs[: j + 1].T @ (vs[: j + 1].conj() @ w)
        betas[j] = np.linalg.norm(w)
        if betas[j] < 1e-14 * max(1.0, abs(alphas[j])):
            return vs[: j + 1], alphas[: j + 1], betas[: j + 1], beta0, True
        vs[j + 1] = w / betas[j]
    return vs, alphas, betas, beta0, False


def evolve(
    H: FockOperator,
    s: FockState | np.ndarray,
    t: float,
    tol: float = 1e-10,
    krylov_dim: int = 30,
    stats: EvolveStats | None = None,
) -> np.ndarray:
    """e^{-iHt} s by Lanczos substeps with a-posteriori error control.

    Each accepted substep has estimated error ``<= tol * tau / |t|`` so the
    accumulated error stays below ``tol``.
    """
    vec = s.vector if isinstance(s, FockState) else np.asarray(s, complex)
    stats = stats if stats is not None else EvolveStats()
    if t == 0:
        return vec.copy()
    h = H.matrix
    sign = 1.0 if t > 0 else -1.0
    remaining = abs(t)
    tau = remaining
    out = vec.copy()
    while remaining > 1e-15 * abs(t):
        tau = min(tau, remaining)
        vs, al, be, b0, broke = _lanczos(h, out, krylov_dim)
        m = len(al)
        tri = np.diag(al) + np.diag(be[: m - 1], 1) + np.diag(be[: m - 1], -1)
        while True:
            e = sla.expm(-1j * sign * tau * tri)[:, 0]
            err = 0.0 if broke else float(b0 * be[m - 1] * abs(e[m - 1]))
            if err <= tol * tau / abs(t):
                break
            stats.rejected += 1
            tau *= 0.5
        if broke:
            stats.breakdowns += 1
        out = b0 * (vs[:m].T @ e)
        remaining -= tau
        stats.substeps += 1
        stats.max_error = max(stats.max_error, err)
        if err < 0.01 * tol * tau / abs(t):
            tau *= 1.5
    return out


# --- quantum vs classical comparison ---------------------------------------------------


@dataclass
class ComparisonResult:
    alpha: float
    t: float
    error: float
    leakage: float
    valid: bool
    norm_quantum: float
    phase_omega: float


def theorem2_error(
    basis: FockBasis,
    phi0: np.ndarray,
    t: float,
    dt: float = 1e-3,
    leak_tol: float = 1e-8,
    eig_tol: float = 1e-12,
    evolve_tol: float = 1e-10,
) -> ComparisonResult:
    """||e^{-iHt} psi0 (x) W(a^2 phi0) Omega - e^{-i int omega} psi_t (x) W(a^2 phi_t) Omega||.

    ``psi0`` is the ground state of h_{phi0} on the matching LP lattice and
    (psi_t, phi_t, int omega) come from the LP integrator on the same lattice.
    """
    from .dynamics import Integrator, LPState
    from .eigensolver import ground_state
    from .fields import potential_array

    grid = basis.grid()
    phi0 = np.asarray(phi0, complex)
    rec = ground_state(potential_array(grid, phi0), eig_tol, grid=grid)
    psi_grid = rec.values
    sq = math.sqrt(grid.dv)
    ccr = build_ccr(basis)
    fh = froehlich_hamiltonian(basis, ccr=ccr)
    start = pekar_product(basis, sq * psi_grid, phi0, leak_tol, ccr)
    if t == 0:
        quantum = start.vector
        traj_state = LPState(grid, psi_grid.astype(complex), phi0, 0.0, basis.alpha)
    else:
        quantum = evolve(fh.H, start, t, tol=evolve_tol)
        nsteps = max(1, int(math.ceil(abs(t) / dt)))
        integ = Integrator(abs(t) / nsteps, track="none", cadence=nsteps)
        traj_state = integ.run(LPState(grid, psi_grid.astype(complex), phi0, 0.0, basis.alpha), t).final
    classical = pekar_product(basis, sq * traj_state.psi, traj_state.phi, leak_tol, ccr)
    classical_vec = np.exp(-1j * traj_state.phase_omega) * classical.vector
    leak = max(start.leakage, classical.leakage, top_shell_population(basis, quantum))
    err = float(np.linalg.norm(quantum - classical_vec))
    return ComparisonResult(
        alpha=basis.alpha,
        t=t,
        error=err,
        leakage=leak,
        valid=leak <= leak_tol,
        norm_quantum=float(np.linalg.norm(quantum)),
        phase_omega=traj_state.phase_omega,
    )


# --- appendix operator checks --------------------------------------------------------


def _electron_power(basis: FockBasis, power: float) -> np.ndarray:
    lap = ring_laplacian(basis).toarray()
    w, u = np.linalg.eigh(lap + np.eye(basis.sites))
    return (u * w**power) @ u.conj().T


def creation_bound_ratio(basis: FockBasis, u: np.ndarray, ccr: CCRSet | None = None) -> float:
    """||(-Lap+1)^-1/2 sum_k dk |k|^-1 e^{-ikx} a_k^* u (x) Omega|| / (alpha^-1 ||u||)."""
    ccr = ccr or build_ccr(basis)
    fh = froehlich_hamiltonian(basis, ccr=ccr)
    vac = np.zeros(basis.dim_fock, complex)
    vac[0] = 1.0
    state = np.kron(np.asarray(u, complex), vac)
    out = fh.phi_minus @ state
    damp = sp.kron(sp.csr_matrix(_electron_power(basis, -0.5)), sp.identity(basis.dim_fock), format="csr")
    return float(np.linalg.norm(damp @ out) / (np.linalg.norm(u) / basis.alpha))


def annihilation_bound_sup(basis: FockBasis, fh: FrohlichHamiltonian | None = None) -> float:
    """sup_Psi ||Phi_x^+ Psi|| / ||(-Lap+1)^1/2 N^1/2 Psi|| (exact, via the largest singular value)."""
    fh = fh or froehlich_hamiltonian(basis)
    num_diag = basis.occupation / basis.alpha**2  # eigenvalues of N
    # B = (-Lap+1)^1/2 (x) N^1/2 is diagonal in (electron eigenbasis) x (occupation basis)
    lap = ring_laplacian(basis).toarray() + np.eye(basis.sites)
    w, u = np.linalg.eigh(lap)
    bdiag = np.sqrt(np.outer(w, num_diag)).ravel()
    inv = np.zeros_like(bdiag)
    inv[bdiag > 0] = 1.0 / bdiag[bdiag > 0]
    u_full = sp.kron(sp.csr_matrix(u), sp.identity(basis.dim_fock), format="csr")
    a_op = fh.phi_plus @ u_full  # Phi^+ acting on the B-eigenbasis

    def mv(x):
        return a_op @ (inv * x)

    def rmv(y):
        return inv * (a_op.conj().T @ y)

    normal = spla.LinearOperator((basis.dim, basis.dim), matvec=lambda x: rmv(mv(x)), dtype=complex)
    val = spla.eigsh(normal, k=1, which="LA", return_eigenvectors=False, tol=1e-10)[0]
    return float(math.sqrt(max(val, 0.0)))


def annihilation_bound_sampled(
    basis: FockBasis, samples: int, rng: np.random.Generator, fh: FrohlichHamiltonian | None = None
) -> tuple[float, int]:
    """Max of the Phi_x^+ ratio over random states; returns (max, skipped) where vacuum-only draws are skipped."""
    fh = fh or froehlich_hamiltonian(basis)
    lap_half = sp.kron(
        sp.csr_matrix(_electron_power(basis, 0.5)), sp.identity(basis.dim_fock), format="csr"
    )
    occ = np.tile(basis.occupation, basis.sites).astype(float)
    n_half = np.sqrt(occ / basis.alpha**2)
    best, skipped = 0.0, 0
    for i in range(samples):
        psi = rng.standard_normal(basis.dim) + 1j * rng.standard_normal(basis.dim)
        if i == 0:
            psi = psi * (occ == 0)  # Psi in the vacuum sector: both sides vanish
        denom = np.linalg.norm(lap_half @ (n_half * psi))
        num = np.linalg.norm(fh.phi_plus @ psi)
        if denom == 0.0:
            skipped += 1
            continue
        best = max(best, num / denom)
    return best, skipped


def radial_integral() -> float:
    """int d^3k 1/((k^2+1) k^2) = 4 pi int_0^inf dk/(k^2+1), by adaptive quadrature."""
    from scipy.integrate import quad

    val, _ = quad(lambda k: 1.0 / (k**2 + 1.0), 0.0, np.inf, epsabs=1e-13, epsrel=1e-13)
    return 4.0 * np.pi * val


@dataclass
class AppendixReport:
    creation_ratio_by_alpha: dict[float, float]
    creation_alpha_spread: float
    annihilation_sup: dict[int, float]
    annihilation_sampled: dict[int, float]
    sandwich: dict[int, float]
    radial_integral: float
    radial_target: float
    caveat: str = REPORT_CAVEAT


def appendix_bound_checks(
    basis: FockBasis,
    alphas=(2.0, 4.0, 8.0),
    samples: int = 50,
    seed: int = 0,
    eps: float = 0.5,
) -> AppendixReport:
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(basis.sites) + 1j * rng.standard_normal(basis.sites)
    creation = {float(a): creation_bound_ratio(basis.with_alpha(a), u) for a in alphas}
    vals = np.array(list(creation.values()))
    spread = float((vals.max() - vals.min()) / vals.mean())
    sup, sampled, sandwich = {}, {}, {}
    for n in (basis.n_max, basis.n_max + 1):
        b = basis.with_n_max(n)
        fh = froehlich_hamiltonian(b)
        sup[n] = annihilation_bound_sup(b, fh)
        sampled[n] = annihilation_bound_sampled(b, samples, rng, fh)[0]
        sandwich[n] = sandwich_bound(b, eps)
    return AppendixReport(
        creation_ratio_by_alpha=creation,
        creation_alpha_spread=spread,
        annihilation_sup=sup,
        annihilation_sampled=sampled,
        sandwich=sandwich,
        radial_integral=radial_integral(),
        radial_target=2.0 * np.pi**2,
    )
