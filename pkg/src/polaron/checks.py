"""Invariant suite behind ``polaron check``: quick property checks on the configured grid."""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .dynamics import LPState, lp_step
from .eigensolver import ResolventContext, apply_resolvent, ground_state, resolvent_residual
from .fields import hermitian_defect, inequality_report, potential_array, sigma_array
from .fock import FockBasis, build_ccr, ccr_defect, evolve, froehlich_hamiltonian, vacuum_overlap_exact, weyl
from .grid import Field, norm, transform


def _row(name: str, value: float, threshold: float, passed: bool | None = None) -> dict:
    ok = bool(value <= threshold) if passed is None else bool(passed)
    return {"name": name, "value": float(value), "threshold": float(threshold), "passed": ok}


def run_checks(cfg) -> list[dict]:
    rng = np.random.default_rng(cfg.seed)
    grid = cfg.make_grid()
    tol = cfg.tolerances
    out = []

    f = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    fx = Field(grid, f, "position")
    out.append(_row("fourier_parseval", abs(norm(transform(fx)) - norm(fx)) / norm(fx), 1e-12))

    psi = np.exp(-grid.r2 / (0.05 * grid.box_length**2)) * (1 + 0.1 * rng.standard_normal(grid.shape))
    psi = psi / np.sqrt(np.sum(psi**2) * grid.dv)
    sig = Field(grid, sigma_array(grid, psi), "momentum")
    out.append(_row("sigma_hermitian", hermitian_defect(sig), 1e-12 * max(np.abs(sig.values).max(), 1.0)))

    phi = -sigma_array(grid, psi) * (1.0 + 0.2 * rng.standard_normal(grid.shape))
    v = potential_array(grid, phi)  # raises if the imaginary part is not negligible
    out.append(_row("potential_real", 0.0, 0.0))

    state = LPState(grid, psi.astype(complex), phi.astype(complex), 0.0, 8.0)
    s = state
    for _ in range(20):
        s = lp_step(s, cfg.dt)
    drift = abs(np.sqrt(np.sum(np.abs(s.psi) ** 2) * grid.dv) - 1.0)
    out.append(_row("lp_norm_drift", drift, 1e-12))
    back = s
    for _ in range(20):
        back = lp_step(back, -cfg.dt)
    rev = max(
        float(np.sqrt(np.sum(np.abs(back.psi - state.psi) ** 2) * grid.dv)),
        float(np.sqrt(np.sum(np.abs(back.phi - state.phi) ** 2) * grid.dkv)),
    )
    out.append(_row("lp_reversibility", rev, 1e-10))

    rec = ground_state(v, tol.eig_tol, grid=grid)
    out.append(_row("ground_state_residual", rec.residual, tol.eig_tol))
    out.append(_row("gap_positive", -rec.gap, 0.0, passed=rec.gap > 0))
    ctx = ResolventContext.build(v, rec, tol.lin_tol)
    rhs = rng.standard_normal(grid.shape)
    w = apply_resolvent(ctx, rhs).values
    rnorm = float(np.sqrt(np.sum(rhs**2) * grid.dv))
    out.append(_row("resolvent_identity", resolvent_residual(ctx, rhs, w) / rnorm, 10 * tol.lin_tol))

    rep = inequality_report(cfg.samples, grid, seed=int(rng.integers(2**32)))
    worst = max(rep.maxima.values())
    out.append(_row("inequality_ratios_finite", worst, np.inf, passed=bool(np.isfinite(worst))))

    basis = FockBasis(4, 3, 2.0)
    ccr = build_ccr(basis)
    out.append(_row("ccr_defect", ccr_defect(ccr), 1e-12))
    fvec = 0.05 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
    wop = weyl(basis, fvec, ccr=ccr)
    wf = wop.fock_factor
    out.append(_row("weyl_unitarity", np.linalg.norm(wf.conj().T @ wf - np.eye(basis.dim_fock)), 1e-10))
    out.append(_row("weyl_vacuum_overlap", abs(wf[0, 0] - vacuum_overlap_exact(basis, fvec)), 1e-6))
    fh = froehlich_hamiltonian(basis, ccr=ccr)
    x0 = rng.standard_normal(basis.dim) + 1j * rng.standard_normal(basis.dim)
    x0 /= np.linalg.norm(x0)
    dense = sla.expm(-0.3j * fh.H.toarray()) @ x0
    out.append(_row("krylov_vs_dense", np.linalg.norm(evolve(fh.H, x0, 0.3) - dense), 1e-8))
    return out
