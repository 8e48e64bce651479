"""Command line entry point: ``polaron <command> --config <path> [--out <dir>] [--seed <u64>]``.

Commands: ``run`` (one trajectory), ``sweep`` (alpha sweep), ``pekar`` (minimizer
plus stationarity trace), ``fock`` (quantum/classical comparison and operator
checks), ``check`` (invariant suite).

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 partial
results.  Every file written carries the config hash; a ``MANIFEST.json`` lists
the artifacts and whether the run completed.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import logging
import struct
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field as PField,
    PrivateAttr,
    ValidationError,
    field_validator,
    model_validator,
)

from . import __version__
from .dynamics import (
    TRAJECTORY_COLUMNS,
    Frame,
    IntegrationError,
    Integrator,
    LPState,
    conservation_report,
)
from .eigensolver import EigensolverError, PekarError, ground_state
from .fields import ConventionError, potential_array
from .grid import SpectralGrid, make_grid

log = logging.getLogger("polaron")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_PARTIAL = 0, 2, 3, 4
COMMANDS = ("run", "sweep", "pekar", "fock", "check")
U64_MAX = 2**64 - 1


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


# --- configuration schema ------------------------------------------------------------


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridConfig(_Strict):
    dims: Literal[1, 3] = 3
    n: int = PField(32, ge=2)
    box: float = PField(16.0, gt=0)
    kinetic: Literal["spectral", "stencil"] = "spectral"

    @field_validator("n")
    @classmethod
    def _even(cls, v):
        if v % 2:
            raise ValueError("must be even")
        return v


class PhiConfig(_Strict):
    kind: Literal["gaussian", "coulomb_truncated", "pekar", "pekar_perturbed"] = "pekar_perturbed"
    epsilon: float = 0.2
    phase: float = 0.0
    amplitude: float = PField(1.0, gt=0)
    width: float = PField(1.0, gt=0)


class Tolerances(_Strict):
    eig_tol: float = PField(1e-10, gt=0)
    lin_tol: float = PField(1e-10, gt=0)
    leak_tol: float = PField(1e-8, gt=0)
    pekar_tol: float = PField(1e-9, gt=0)


class FockConfig(_Strict):
    sites: int = PField(6, ge=2)
    n_max: int = PField(4, ge=1)
    spacing: float = PField(0.25, gt=0)
    alphas: list[float] = [2.0, 3.0, 4.0]
    t: float = PField(0.5, gt=0)
    amplitude: float = PField(0.01, gt=0)
    dt: float = PField(2e-4, gt=0)
    samples: int = PField(50, ge=1)


class RunConfig(_Strict):
    command: Literal["run", "sweep", "pekar", "fock", "check"] | None = None
    grid: GridConfig = GridConfig()
    alpha: float | None = PField(None, ge=1)
    alphas: list[float] | None = None
    dt: float = PField(1e-3, gt=0)
    t_final: float = PField(1.0, gt=0)
    phi0: PhiConfig = PhiConfig()
    tolerances: Tolerances = Tolerances()
    output_dir: str = "out"
    frame_cadence: int = PField(100, ge=1)
    seed: int = PField(0, ge=0, le=U64_MAX)
    reference: Literal["exact", "split_step"] | None = None
    gap_floor: float = PField(1e-6, ge=0)
    safety: float = PField(0.1, gt=0)
    samples: int = PField(20, ge=1)
    restore: str | None = None
    fock: FockConfig = FockConfig()
    _notes: list[str] = PrivateAttr(default_factory=list)

    @field_validator("alphas")
    @classmethod
    def _alphas(cls, v):
        if v is None:
            return v
        if not v:
            raise ValueError("must contain at least one value")
        if any(a < 1 for a in v):
            raise ValueError("every alpha must be >= 1")
        return v

    @model_validator(mode="after")
    def _sorted(self):
        notes = []
        if self.alphas is not None and list(self.alphas) != sorted(self.alphas):
            self.alphas = sorted(self.alphas)
            notes.append("alphas were not sorted; sorted ascending")
        if list(self.fock.alphas) != sorted(self.fock.alphas):
            self.fock.alphas = sorted(self.fock.alphas)
            notes.append("fock.alphas were not sorted; sorted ascending")
        self._notes = notes
        return self

    @property
    def warnings(self) -> list[str]:
        return list(self._notes)

    def make_grid(self) -> SpectralGrid:
        return make_grid(self.grid.n, self.grid.box, self.grid.dims, self.grid.kinetic)

    def canonical(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True, separators=(",", ":"))

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def _format_errors(err: ValidationError) -> list[str]:
    out = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        if e["type"] == "extra_forbidden":
            out.append(f"{loc}: unknown key")
        else:
            out.append(f"{loc}: {e['msg']}")
    return out


def _command_requirements(cfg: RunConfig, command: str) -> list[str]:
    errors = []
    if command == "run" and cfg.alpha is None:
        errors.append("alpha: required for the run command")
    if command == "pekar" and cfg.alpha is None:
        errors.append("alpha: required for the pekar command")
    if command == "sweep":
        if cfg.alphas is None:
            errors.append("alphas: required for the sweep command")
        elif cfg.t_final > cfg.safety * min(cfg.alphas) ** 2:
            errors.append(
                f"t_final: {cfg.t_final} exceeds safety * min(alphas)^2 = {cfg.safety * min(cfg.alphas) ** 2}"
            )
    if cfg.command is not None and cfg.command != command:
        errors.append(f"command: file declares {cfg.command!r} but {command!r} was requested")
    return errors


def parse_config(path: str | Path, command: str | None = None, data: dict | None = None) -> RunConfig:
    """Load and validate a JSON config; raises :class:`ConfigError` listing every problem."""
    if data is None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError([f"config file not found: {p}"])
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config is not valid JSON: {exc}"]) from None
    if not isinstance(data, dict):
        raise ConfigError(["config must be a JSON object"])
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from None
    command = command or cfg.command
    if command is None:
        raise ConfigError(["command: not given on the command line or in the file"])
    errors = _command_requirements(cfg, command)
    if errors:
        raise ConfigError(errors)
    for note in cfg.warnings:
        log.warning(note)
    return cfg


# --- checkpoints -----------------------------------------------------------------------

MAGIC = b"PLRNCKPT"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    state: LPState
    config_hash: str = ""

    def to_bytes(self) -> bytes:
        s = self.state
        g = s.grid
        header = {
            "format_version": FORMAT_VERSION,
            "grid": {"dims": g.dims, "n": g.n, "box": g.box_length.hex(), "kinetic": g.kinetic},
            "alpha": float(s.alpha).hex(),
            "t": float(s.t).hex(),
            "phase_e": float(s.phase_e).hex(),
            "phase_omega": float(s.phase_omega).hex(),
            "config_hash": self.config_hash,
        }
        hb = json.dumps(header, sort_keys=True).encode()
        buf = io.BytesIO()
        buf.write(MAGIC)
        buf.write(struct.pack("<BI", FORMAT_VERSION, len(hb)))
        buf.write(hb)
        buf.write(np.ascontiguousarray(s.psi, dtype="<c16").tobytes())
        buf.write(np.ascontiguousarray(s.phi, dtype="<c16").tobytes())
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Checkpoint":
        if data[: len(MAGIC)] != MAGIC:
            raise ValueError("not a checkpoint file")
        off = len(MAGIC)
        version, hlen = struct.unpack_from("<BI", data, off)
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        off += struct.calcsize("<BI")
        header = json.loads(data[off : off + hlen])
        off += hlen
        gh = header["grid"]
        grid = make_grid(gh["n"], float.fromhex(gh["box"]), gh["dims"], gh["kinetic"])
        nbytes = grid.size * 16
        if len(data) != off + 2 * nbytes:
            raise ValueError("checkpoint payload has the wrong length")
        psi = np.frombuffer(data, "<c16", grid.size, off).reshape(grid.shape).astype(complex)
        phi = np.frombuffer(data, "<c16", grid.size, off + nbytes).reshape(grid.shape).astype(complex)
        state = LPState(
            grid,
            psi,
            phi,
            float.fromhex(header["t"]),
            float.fromhex(header["alpha"]),
            float.fromhex(header["phase_e"]),
            float.fromhex(header["phase_omega"]),
        )
        return cls(state, header.get("config_hash", ""))

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        return cls.from_bytes(Path(path).read_bytes())


# --- artifact writing -------------------------------------------------------------------


class Artifacts:
    """Tracks files written for one command and emits the MANIFEST."""

    def __init__(self, out: Path, cfg: RunConfig, command: str):
        self.out = out
        self.cfg = cfg
        self.command = command
        self.files: list[str] = []
        self.notes: list[str] = []
        out.mkdir(parents=True, exist_ok=True)

    @property
    def hash(self) -> str:
        return self.cfg.config_hash

    def _register(self, name: str) -> Path:
        if name not in self.files:
            self.files.append(name)
        return self.out / name

    def header_lines(self) -> list[str]:
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        return [f"config_hash={self.hash}", f"created={stamp}"]

    def csv(self, name: str, columns, rows) -> Path:
        path = self._register(name)
        with open(path, "w", newline="") as fh:
            for line in self.header_lines():
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        return path

    def json(self, name: str, payload: dict) -> Path:
        path = self._register(name)
        body = {"config_hash": self.hash, "command": self.command, "version": __version__}
        body.update(payload)
        path.write_text(json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n")
        return path

    def columns(self, name: str, x, y, labels: tuple[str, str]) -> Path:
        """Plot-ready two-column text file."""
        path = self._register(name)
        with open(path, "w") as fh:
            fh.write(f"# config_hash={self.hash}\n# {labels[0]} {labels[1]}\n")
            for a, b in zip(x, y):
                fh.write(f"{_fmt(a)} {_fmt(b)}\n")
        return path

    def checkpoint(self, name: str, state: LPState) -> Path:
        path = self._register(name)
        Checkpoint(state, self.hash).save(path)
        return path

    def manifest(self, complete: bool, status: int) -> Path:
        path = self.out / "MANIFEST.json"
        body = {
            "config_hash": self.hash,
            "command": self.command,
            "complete": complete,
            "exit_status": status,
            "files": self.files,
            "notes": self.notes,
        }
        path.write_text(json.dumps(body, indent=2) + "\n")
        return path


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _frame_rows(frames: list[Frame]):
    return [f.row() for f in frames]


# --- commands ----------------------------------------------------------------------------


class PartialResults(RuntimeError):
    pass


def _phi_spec(cfg: RunConfig):
    from .adiabatic import PhiSpec

    p = cfg.phi0
    return PhiSpec(p.kind, p.epsilon, p.phase, p.amplitude, p.width, cfg.tolerances.pekar_tol)


def _cmd_run(cfg: RunConfig, art: Artifacts) -> None:
    from .adiabatic import initial_phi

    grid = cfg.make_grid()
    tol = cfg.tolerances.eig_tol
    if cfg.restore:
        ck = Checkpoint.load(cfg.restore)
        state = ck.state
        if state.grid != grid:
            raise ConfigError([f"restore: checkpoint grid {state.grid} differs from the configured grid"])
        rec = None
    else:
        phi0 = initial_phi(grid, _phi_spec(cfg))
        rec = ground_state(potential_array(grid, phi0), tol, grid=grid)
        state = LPState(grid, rec.values.astype(complex), phi0, 0.0, float(cfg.alpha))
    integ = Integrator(
        cfg.dt,
        tol,
        cadence=cfg.frame_cadence,
        gap_floor=cfg.gap_floor,
        reference=cfg.reference or "exact",
    )
    traj = integ.run(state, state.t + cfg.t_final, rec)
    art.csv("trajectory.csv", TRAJECTORY_COLUMNS, _frame_rows(traj.frames))
    cons = conservation_report(traj)
    art.json("conservation.json", {"conservation": cons.__dict__, "alpha": traj.alpha})
    art.checkpoint("final.ckpt", traj.final)
    if traj.truncated:
        art.notes.append(traj.note)
        raise PartialResults(traj.note)


def _cmd_sweep(cfg: RunConfig, art: Artifacts) -> None:
    from .adiabatic import SweepConfig, build_report, pool_size, prepare_initial_data, run_alpha

    scfg = SweepConfig(
        alphas=tuple(cfg.alphas),
        t_final=cfg.t_final,
        dt=cfg.dt,
        phi0=_phi_spec(cfg),
        dims=cfg.grid.dims,
        points=cfg.grid.n,
        box=cfg.grid.box,
        eig_tol=cfg.tolerances.eig_tol,
        cadence=cfg.frame_cadence,
        gap_floor=cfg.gap_floor,
        safety=cfg.safety,
        reference=cfg.reference or "split_step",
    )
    if cfg.grid.kinetic != "spectral":
        raise ConfigError(["grid.kinetic: the sweep uses the spectral kinetic symbol"])
    init = prepare_initial_data(scfg)
    workers = min(pool_size(), len(scfg.alphas))
    trajs = {}
    failures = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {a: pool.submit(run_alpha, scfg, init, a) for a in scfg.alphas}
            for a, fut in futures.items():
                try:
                    trajs[a] = fut.result()
                except (EigensolverError, IntegrationError) as exc:
                    failures.append(f"alpha={a:g}: {exc}")
    else:
        for a in scfg.alphas:
            try:
                trajs[a] = run_alpha(scfg, init, a)
            except (EigensolverError, IntegrationError) as exc:
                failures.append(f"alpha={a:g}: {exc}")
    # per-alpha files first, then the merged summary
    for a, tr in sorted(trajs.items()):
        tag = f"{a:g}"
        art.csv(f"trajectory_alpha{tag}.csv", TRAJECTORY_COLUMNS, _frame_rows(tr.frames))
        art.columns(f"err2_vs_t_alpha{tag}.dat", tr.column("t"), tr.column("err2"), ("t", "err2"))
        art.columns(f"gap_vs_t_alpha{tag}.dat", tr.column("t"), tr.column("gap"), ("t", "gap"))
    if not trajs:
        art.notes.extend(failures)
        raise EigensolverError("every trajectory failed", np.inf)
    report = build_report(
        SweepConfig(**{**scfg.__dict__, "alphas": tuple(sorted(trajs))}), trajs
    )
    star = report.err2_at_t_star()
    art.columns("err2_vs_alpha.dat", list(star), list(star.values()), ("alpha", "err2_t_star"))
    summary = report.summary()
    summary["failures"] = failures
    summary["phi0"] = cfg.phi0.model_dump()
    summary["gap0"] = init.record.gap
    summary["e0"] = init.record.e
    art.json("summary.json", summary)
    if failures or report.truncated:
        art.notes.extend(failures + report.flags)
        raise PartialResults("; ".join(failures + [f"truncated alpha {a:g}" for a in report.truncated]))


def phase_aligned_distance(grid: SpectralGrid, psi: np.ndarray, ref: np.ndarray) -> float:
    """min over global phases theta of ||psi - e^{i theta} ref||_2."""
    ov = np.vdot(ref, psi)
    rot = ov / abs(ov) if ov != 0 else 1.0
    # explicit difference: the expanded form ||a||^2 + ||b||^2 - 2|<a,b>| cancels to rounding
    return float(np.sqrt(np.sum(np.abs(psi - rot * ref) ** 2) * grid.dv))


def _cmd_pekar(cfg: RunConfig, art: Artifacts) -> None:
    from .adiabatic import pekar_field
    from .eigensolver import discrete_pekar_pair

    grid = cfg.make_grid()
    res = pekar_field(grid, cfg.tolerances.pekar_tol)
    rec = res.record
    r2 = float(np.sum(grid.r2 * np.abs(res.psi.values) ** 2) * grid.dv)
    psi0, phi0, e_step = discrete_pekar_pair(res, cfg.dt, cfg.tolerances.eig_tol)
    state = LPState(grid, psi0, phi0, 0.0, float(cfg.alpha))
    art.checkpoint("pekar.ckpt", state)
    rows = []

    def trace(frame: Frame, s: LPState) -> None:
        dphi = float(np.sqrt(np.sum(np.abs(s.phi - phi0) ** 2) * grid.dkv))
        rows.append([s.t, phase_aligned_distance(grid, s.psi, psi0), dphi, frame.energy])

    integ = Integrator(
        cfg.dt, cfg.tolerances.eig_tol, cadence=cfg.frame_cadence, track="none", frame_callback=trace
    )
    traj = integ.run(state, cfg.t_final)
    art.csv("stationarity.csv", ("t", "dpsi", "dphi", "energy"), rows)
    art.json(
        "pekar_summary.json",
        {
            "energy": res.energy,
            "eigenvalue": rec.e,
            "gap": rec.gap,
            "fixed_point_residual": res.fixed_point_residual,
            "eigen_residual": rec.residual,
            "iterations": res.iterations,
            "tol": cfg.tolerances.pekar_tol,
            "mean_r2": r2,
            "step_eigenphase_rate": e_step,
            "max_dpsi": max(r[1] for r in rows),
            "max_dphi": max(r[2] for r in rows),
            "final_time": traj.final.t,
        },
    )


def _fock_job(args):
    from .fock import FockBasis, theorem2_error

    sites, n_max, alpha, spacing, phi0, t, dt, leak_tol, eig_tol = args
    return theorem2_error(FockBasis(sites, n_max, alpha, spacing), phi0, t, dt, leak_tol, eig_tol)


def fock_initial_phi(sites: int, amplitude: float) -> np.ndarray:
    """Deterministic small mode profile: real on the first shell, imaginary on the second."""
    phi = np.zeros(sites, complex)
    phi[1] = phi[-1] = amplitude
    if sites > 4:
        phi[2] = 0.5j * amplitude
        phi[-2] = 0.5j * amplitude
    return phi


def _cmd_fock(cfg: RunConfig, art: Artifacts) -> None:
    from .adiabatic import pool_size
    from .fock import REPORT_CAVEAT, FockBasis, appendix_bound_checks

    fc = cfg.fock
    tol = cfg.tolerances
    phi0 = fock_initial_phi(fc.sites, fc.amplitude)
    eig_tol = min(tol.eig_tol, 1e-12)
    jobs = [(fc.sites, fc.n_max, a, fc.spacing, phi0, fc.t, fc.dt, tol.leak_tol, eig_tol) for a in fc.alphas]
    workers = min(pool_size(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_fock_job, jobs))
    else:
        results = [_fock_job(j) for j in jobs]
    art.csv(
        "fock_errors.csv",
        ("alpha", "t", "error", "leakage", "valid"),
        [[r.alpha, r.t, r.error, r.leakage, int(r.valid)] for r in results],
    )
    valid = [r for r in results if r.valid]
    slope = resid = None
    if len(valid) >= 2:
        # three alphas is below the sweep fitter's minimum, so fit directly
        lx = np.log([r.alpha for r in valid])
        ly = np.log([r.error for r in valid])
        coef = np.polyfit(lx, ly, 1)
        slope = float(coef[0])
        resid = float(np.sqrt(np.mean((ly - np.polyval(coef, lx)) ** 2)))
    appendix = appendix_bound_checks(
        FockBasis(fc.sites, fc.n_max, fc.alphas[0], fc.spacing), samples=fc.samples, seed=cfg.seed
    )
    art.json(
        "fock_report.json",
        {
            "caveat": REPORT_CAVEAT,
            "slope_alpha": slope,
            "fit_residuals": {"slope_alpha": resid},
            "errors": [r.__dict__ for r in results],
            "invalid_alphas": [r.alpha for r in results if not r.valid],
        },
    )
    art.json("appendix_report.json", {"caveat": REPORT_CAVEAT, **appendix.__dict__})
    if len(valid) < len(results):
        art.notes.append("leakage above threshold for some alphas; excluded from the fit")
        raise PartialResults("leakage invalidated some runs")


def _cmd_check(cfg: RunConfig, art: Artifacts) -> None:
    from .checks import run_checks

    results = run_checks(cfg)
    art.json("check_summary.json", {"checks": results, "all_passed": all(r["passed"] for r in results)})
    if not all(r["passed"] for r in results):
        failed = [r["name"] for r in results if not r["passed"]]
        art.notes.append("failed checks: " + ", ".join(failed))
        raise NumericalCheckFailed(", ".join(failed))


class NumericalCheckFailed(RuntimeError):
    pass


HANDLERS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "pekar": _cmd_pekar,
    "fock": _cmd_fock,
    "check": _cmd_check,
}

NUMERICAL_ERRORS = (
    EigensolverError,
    PekarError,
    IntegrationError,
    ConventionError,
    FloatingPointError,
    NumericalCheckFailed,
    np.linalg.LinAlgError,
)


def execute(cfg: RunConfig, command: str, out: str | Path | None = None) -> int:
    """Run ``command``; always leaves a MANIFEST describing what was written."""
    out_dir = Path(out or cfg.output_dir)
    art = Artifacts(out_dir, cfg, command)
    art.notes.extend(cfg.warnings)
    status = EXIT_OK
    try:
        HANDLERS[command](cfg, art)
    except ConfigError as exc:
        art.notes.extend(exc.errors)
        status = EXIT_CONFIG
    except PartialResults as exc:
        log.warning("partial results: %s", exc)
        status = EXIT_PARTIAL
    except NUMERICAL_ERRORS as exc:
        log.error("numerical failure: %s", exc)
        art.notes.append(f"numerical failure: {exc}")
        status = EXIT_NUMERICAL if not art.files else EXIT_PARTIAL
        if status == EXIT_PARTIAL:
            art.notes.append("artifacts written before the failure are retained")
    art.manifest(status == EXIT_OK, status)
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polaron", description="Landau-Pekar polaron lab")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--seed", type=int, help="random seed, 0 <= seed < 2^64 (overrides seed)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.seed is not None and not 0 <= args.seed <= U64_MAX:
            raise ConfigError([f"--seed: {args.seed} is outside the unsigned 64-bit range"])
        cfg = parse_config(args.config, args.command)
        if args.seed is not None:
            cfg = cfg.model_copy(update={"seed": args.seed})
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return execute(cfg, args.command, args.out)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
