"""Adiabatic-error sweeps over the coupling alpha.

For each alpha the LP system is run from ``(psi_0, phi_0)`` with ``psi_0`` the
electron ground state for ``phi_0``, and the squared distance

    err2(t) = || psi_t - exp(-i int_0^t e(phi_u) du) psi_{phi_t} ||^2

is recorded together with the gap and the eigenvalue.  Log-log fits of err2
against alpha (fixed t) and against t (fixed alpha), and linear envelopes of the
gap and eigenvalue drift against ``|t| alpha^-2``, form the :class:`ScalingReport`.

By default the adiabatic reference is the invariant state of the discrete
electron step (see :class:`polaron.dynamics.Integrator`); ``psi_0`` is taken
from the same family so that err2(0) = 0 and the splitting error does not
masquerade as non-adiabatic motion.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Integrator, LPState, Trajectory, adiabatic_error_arrays
from .eigensolver import GroundStateRecord, assumption_check, ground_state, pekar_minimize
from .fields import ElectronField, PhononField, potential_array
from .grid import SpectralGrid, make_grid

log = logging.getLogger(__name__)

MIN_FIT_POINTS = 4


# --- configuration ------------------------------------------------------------------


@dataclass(frozen=True)
class PhiSpec:
    """Initial phonon field descriptor.

    kinds:
      ``pekar``            the self-consistent minimizer phi_P
      ``pekar_perturbed``  (1 + epsilon) e^{i phase} phi_P
      ``gaussian``         -amplitude |k|^-1 exp(-|k|^2 width^2 / 4) (real, even)
      ``coulomb_truncated`` -amplitude |k|^-1 / (4 pi^2); V_phi is the grid-truncated -amplitude/|x|
    """

    kind: str = "pekar_perturbed"
    epsilon: float = 0.2
    phase: float = 0.0
    amplitude: float = 1.0
    width: float = 1.0
    pekar_tol: float = 1e-9

    KINDS = ("pekar", "pekar_perturbed", "gaussian", "coulomb_truncated")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown phi0 kind {self.kind!r}; expected one of {self.KINDS}")
        if not self.width > 0:
            raise ValueError("width must be positive")
        if not self.pekar_tol > 0:
            raise ValueError("pekar_tol must be positive")


def pekar_field(grid: SpectralGrid, tol: float = 1e-9):
    """Pekar minimizer started from a centred Gaussian."""
    psi = ElectronField.from_array(
        grid, np.exp(-grid.r2 / (0.02 * grid.box_length**2)), normalize=True
    )
    return pekar_minimize(psi, tol=tol)


def initial_phi(grid: SpectralGrid, spec: PhiSpec) -> np.ndarray:
    if spec.kind in ("pekar", "pekar_perturbed"):
        phi_p = pekar_field(grid, spec.pekar_tol).phi.values
        if spec.kind == "pekar":
            return np.array(phi_p, complex)
        return (1.0 + spec.epsilon) * np.exp(1j * spec.phase) * phi_p
    if spec.kind == "gaussian":
        return -spec.amplitude * grid.inv_kabs * np.exp(-grid.k2 * spec.width**2 / 4.0) + 0j
    return -spec.amplitude * grid.inv_kabs / (4.0 * np.pi**2) + 0j


@dataclass(frozen=True)
class SweepConfig:
    alphas: tuple[float, ...] = (4.0, 6.0, 8.0, 12.0, 16.0)
    t_final: float = 1.0
    dt: float = 1e-3
    phi0: PhiSpec = field(default_factory=PhiSpec)
    dims: int = 3
    points: int = 32
    box: float = 4.0
    eig_tol: float = 1e-10
    cadence: int = 50
    gap_floor: float = 1e-6
    safety: float = 0.1
    short_t_max: float = 0.5
    noise_floor: float = 1e-22
    reference: str = "split_step"
    workers: int | None = None

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        object.__setattr__(self, "alphas", alphas)
        if not alphas:
            raise ValueError("alphas must be non-empty")
        if list(alphas) != sorted(alphas):
            raise ValueError("alphas must be sorted ascending")
        if min(alphas) < 1:
            raise ValueError("all alphas must be >= 1")
        for name in ("t_final", "dt", "eig_tol", "safety", "noise_floor", "short_t_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.t_final > self.safety * min(alphas) ** 2:
            raise ValueError(
                f"t_final = {self.t_final} exceeds the window {self.safety} * min(alpha)^2"
            )
        if self.cadence < 1:
            raise ValueError("cadence must be >= 1")

    @property
    def grid(self) -> SpectralGrid:
        return make_grid(self.points, self.box, self.dims)


# --- fits ----------------------------------------------------------------------------


@dataclass
class LogFit:
    slope: float
    intercept: float
    residual: float  # RMS of the log-space residuals
    points: int
    flag: str = ""

    @property
    def ok(self) -> bool:
        return not self.flag


def loglog_fit(x, y, floor: float = 0.0) -> LogFit:
    """Least-squares line through (log x, log y) for points with y > floor."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    keep = np.isfinite(y) & (y > floor) & (x > 0)
    n = int(keep.sum())
    if n < MIN_FIT_POINTS:
        flag = "degenerate" if n == 0 and len(y) >= MIN_FIT_POINTS else "insufficient data"
        return LogFit(np.nan, np.nan, np.nan, n, flag)
    lx, ly = np.log(x[keep]), np.log(y[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return LogFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))), n)


@dataclass
class DriftFit:
    """Envelope drift <= C |t| alpha^-2 with C the smallest constant that works."""

    C: float
    C_lsq: float
    residual: float
    bounded: bool
    points: int


def _drift_fit(s: np.ndarray, drift: np.ndarray) -> DriftFit:
    keep = s > 0
    if not keep.any():
        return DriftFit(0.0, 0.0, 0.0, True, 0)
    s, d = s[keep], drift[keep]
    c_env = float(np.max(d / s)) if d.size else 0.0
    c_env = max(c_env, 0.0)
    c_lsq = float(np.sum(d * s) / np.sum(s * s))
    resid = float(np.sqrt(np.mean((d - c_lsq * s) ** 2)))
    return DriftFit(c_env, c_lsq, resid, bool(np.isfinite(c_env)), int(d.size))


def gap_drift_check(trajectories: Trajectory | list[Trajectory]) -> DriftFit:
    """Fit max(0, gap(0) - gap(t)) against |t| alpha^-2 over one or more trajectories."""
    trajs = [trajectories] if isinstance(trajectories, Trajectory) else list(trajectories)
    s_all, d_all = [], []
    for tr in trajs:
        t, gap = tr.column("t"), tr.column("gap")
        s_all.append(np.abs(t - t[0]) / tr.alpha**2)
        d_all.append(np.maximum(0.0, gap[0] - gap))
    return _drift_fit(np.concatenate(s_all), np.concatenate(d_all))


def eigenvalue_drift_check(trajectories: Trajectory | list[Trajectory]) -> DriftFit:
    """Fit e(phi_t) - e(phi_0) against |t| alpha^-2 (one-sided, as in the upper bound)."""
    trajs = [trajectories] if isinstance(trajectories, Trajectory) else list(trajectories)
    s_all, d_all = [], []
    for tr in trajs:
        t, e = tr.column("t"), tr.column("e_phi")
        s_all.append(np.abs(t - t[0]) / tr.alpha**2)
        d_all.append(e - e[0])
    return _drift_fit(np.concatenate(s_all), np.concatenate(d_all))


def drift_at(tr: Trajectory, t: float, column: str = "gap") -> float:
    """|value(t) - value(0)| at the frame nearest ``t``."""
    times = tr.column("t")
    vals = tr.column(column)
    j = int(np.argmin(np.abs(times - t)))
    return float(abs(vals[j] - vals[0]))


# --- single trajectories and sweeps -----------------------------------------------


def adiabatic_error(s: LPState, gs: GroundStateRecord | np.ndarray) -> float:
    """||psi_t - e^{-i phase_e} psi_{phi_t}||_2^2 for the accumulated phase in ``s``."""
    ref = gs.values if isinstance(gs, GroundStateRecord) else np.asarray(gs)
    return adiabatic_error_arrays(s.grid, s.psi, ref, s.phase_e)


@dataclass
class InitialData:
    grid: SpectralGrid
    phi0: np.ndarray
    record: GroundStateRecord  # exact ground state and gap of h_{phi_0}
    psi0: np.ndarray  # starting electron state (reference family)


def prepare_initial_data(cfg: SweepConfig) -> InitialData:
    grid = cfg.grid
    phi0 = initial_phi(grid, cfg.phi0)
    adm = assumption_check(PhononField.from_array(grid, phi0, cfg.alphas[0]), cfg.eig_tol)
    if not adm.admissible:
        raise ValueError(f"phi0 is not admissible: lowest eigenvalue {adm.e:.3e} does not bind")
    rec = ground_state(potential_array(grid, phi0), cfg.eig_tol, grid=grid)
    if cfg.reference == "split_step":
        psi0, _ = Integrator(cfg.dt, cfg.eig_tol, reference="split_step").reference_state(
            LPState(grid, rec.values, phi0, 0.0, cfg.alphas[0]), np.real(rec.values)
        )
    else:
        psi0 = np.real(rec.values)
    return InitialData(grid, phi0, rec, psi0.astype(complex))


def run_alpha(cfg: SweepConfig, init: InitialData, alpha: float, frame_callback=None) -> Trajectory:
    integ = Integrator(
        cfg.dt,
        cfg.eig_tol,
        cadence=cfg.cadence,
        gap_floor=cfg.gap_floor,
        reference=cfg.reference,
        frame_callback=frame_callback,
    )
    state = LPState(init.grid, init.psi0.copy(), init.phi0.copy(), 0.0, float(alpha))
    return integ.run(state, cfg.t_final, init.record)


def _run_alpha_job(args) -> Trajectory:
    cfg, init, alpha = args
    return run_alpha(cfg, init, alpha)


def pool_size(requested: int | None = None) -> int:
    cap = os.environ.get("POLARON_THREADS")
    n = requested or (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


@dataclass
class ScalingReport:
    alphas: list[float]
    trajectories: dict[float, Trajectory] = field(repr=False)
    t_star: float
    slope_alpha: LogFit
    slope_alpha_envelope: LogFit
    slope_t_short: LogFit
    t_short_alpha: float
    gap_drift: DriftFit
    e_drift: DriftFit
    gap_drift_by_alpha: dict[float, DriftFit]
    e_drift_by_alpha: dict[float, DriftFit]
    flags: list[str]
    truncated: list[float]

    def err2_at_t_star(self) -> dict[float, float]:
        return {a: float(tr.column("err2")[-1]) for a, tr in self.trajectories.items() if not tr.truncated}

    def err2_envelope(self) -> dict[float, float]:
        return {a: float(np.nanmax(tr.column("err2"))) for a, tr in self.trajectories.items()}

    def summary(self) -> dict:
        """Structured summary with the fixed key names used by the CLI."""
        return {
            "slope_alpha": _nan_to_none(self.slope_alpha.slope),
            "slope_alpha_envelope": _nan_to_none(self.slope_alpha_envelope.slope),
            "slope_t_short": _nan_to_none(self.slope_t_short.slope),
            "gap_drift_C": _nan_to_none(self.gap_drift.C),
            "e_drift_C": _nan_to_none(self.e_drift.C),
            "fit_residuals": {
                "slope_alpha": _nan_to_none(self.slope_alpha.residual),
                "slope_alpha_envelope": _nan_to_none(self.slope_alpha_envelope.residual),
                "slope_t_short": _nan_to_none(self.slope_t_short.residual),
                "gap_drift": _nan_to_none(self.gap_drift.residual),
                "e_drift": _nan_to_none(self.e_drift.residual),
            },
            "t_star": self.t_star,
            "t_short_alpha": self.t_short_alpha,
            "alphas": self.alphas,
            "err2_t_star": {str(a): v for a, v in self.err2_at_t_star().items()},
            "err2_envelope": {str(a): v for a, v in self.err2_envelope().items()},
            "gap_drift_C_by_alpha": {str(a): f.C for a, f in self.gap_drift_by_alpha.items()},
            "e_drift_C_by_alpha": {str(a): f.C for a, f in self.e_drift_by_alpha.items()},
            "flags": self.flags,
            "truncated_alphas": self.truncated,
        }


def _nan_to_none(x):
    return None if x is None or not np.isfinite(x) else float(x)


def short_time_fit(tr: Trajectory, dt: float, t_max: float, noise_floor: float) -> LogFit:
    t = tr.column("t")
    e2 = tr.column("err2")
    window = (t >= 5 * dt) & (t <= t_max + 1e-12) & (e2 >= 100 * noise_floor)
    return loglog_fit(t[window], e2[window])


def build_report(cfg: SweepConfig, trajectories: dict[float, Trajectory]) -> ScalingReport:
    flags: list[str] = []
    truncated = [a for a, tr in trajectories.items() if tr.truncated]
    for a in truncated:
        flags.append(f"alpha={a:g}: {trajectories[a].note}")
    complete = [a for a in cfg.alphas if a in trajectories and not trajectories[a].truncated]
    at_star = np.array([trajectories[a].column("err2")[-1] for a in complete])
    envelope = np.array([np.nanmax(trajectories[a].column("err2")) for a in complete])
    floor = 100 * cfg.noise_floor
    if complete and np.all(envelope < floor):
        flags.append("degenerate: err2 at the noise floor for every alpha")
        nan = LogFit(np.nan, np.nan, np.nan, 0, "degenerate")
        fit_alpha = fit_env = nan
    else:
        fit_alpha = loglog_fit(complete, at_star, floor)
        fit_env = loglog_fit(complete, envelope, floor)
    for name, fit in (("slope_alpha", fit_alpha), ("slope_alpha_envelope", fit_env)):
        if fit.flag and fit.flag != "degenerate":
            flags.append(f"{name}: {fit.flag}")
    a_short = max(trajectories)
    fit_t = short_time_fit(trajectories[a_short], cfg.dt, cfg.short_t_max, cfg.noise_floor)
    if fit_t.flag:
        flags.append(f"slope_t_short: {fit_t.flag}")
    trajs = [trajectories[a] for a in sorted(trajectories)]
    return ScalingReport(
        alphas=list(cfg.alphas),
        trajectories=trajectories,
        t_star=cfg.t_final,
        slope_alpha=fit_alpha,
        slope_alpha_envelope=fit_env,
        slope_t_short=fit_t,
        t_short_alpha=a_short,
        gap_drift=gap_drift_check(trajs),
        e_drift=eigenvalue_drift_check(trajs),
        gap_drift_by_alpha={tr.alpha: gap_drift_check(tr) for tr in trajs},
        e_drift_by_alpha={tr.alpha: eigenvalue_drift_check(tr) for tr in trajs},
        flags=flags,
        truncated=truncated,
    )


def run_sweep(cfg: SweepConfig, init: InitialData | None = None) -> ScalingReport:
    """Evolve every alpha from the same initial data and fit the scaling laws.

    Trajectories run in a process pool capped by ``POLARON_THREADS``; the
    report is assembled serially from the finished trajectories.
    """
    init = init or prepare_initial_data(cfg)
    workers = min(pool_size(cfg.workers), len(cfg.alphas))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_alpha_job, [(cfg, init, a) for a in cfg.alphas]))
    else:
        results = [run_alpha(cfg, init, a) for a in cfg.alphas]
    return build_report(cfg, dict(zip(cfg.alphas, results)))


def envelope_bound_constant(report: ScalingReport) -> float:
    """Smallest C with err2(t) <= C alpha^-4 (1 + alpha^-4 t^2) at every frame of every alpha."""
    best = 0.0
    for a, tr in report.trajectories.items():
        t = tr.column("t")
        e2 = tr.column("err2")
        rhs = a**-4 * (1.0 + a**-4 * t**2)
        best = max(best, float(np.nanmax(e2 / rhs)))
    return best


def continuity_defect(tr: Trajectory) -> float:
    """max frame-to-frame |sqrt(err2)| change per unit time (phase-jump detector)."""
    t = tr.column("t")
    e = np.sqrt(np.maximum(tr.column("err2"), 0.0))
    if len(t) < 2:
        return 0.0
    return float(np.max(np.abs(np.diff(e)) / np.diff(t)))


__all__ = [
    "PhiSpec",
    "SweepConfig",
    "ScalingReport",
    "LogFit",
    "DriftFit",
    "adiabatic_error",
    "run_sweep",
    "gap_drift_check",
    "eigenvalue_drift_check",
    "initial_phi",
    "pekar_field",
    "prepare_initial_data",
    "run_alpha",
    "loglog_fit",
    "short_time_fit",
    "drift_at",
    "envelope_bound_constant",
    "continuity_defect",
]
