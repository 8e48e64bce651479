"""Phonon/electron coupling quantities and empirical functional-inequality ratios.

Both couplings are literal lattice quadratures of the continuum integrals with
no extra ``2 pi`` factors::

    V_phi(x)   = sum_k dk^d |k|^-1 (phi(k) e^{ikx} + conj(phi(k)) e^{-ikx})
    sigma(k)   = |k|^-1 sum_x dx^d e^{-ikx} |psi(x)|^2

The k = 0 mode is dropped from both.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import Field, SpectralGrid, norm

log = logging.getLogger(__name__)

IMAG_TOL = 1e-10


class ConventionError(RuntimeError):
    """A quantity that must be real by construction came out complex."""


@dataclass(frozen=True)
class PhononField:
    amp: Field
    alpha: float

    def __post_init__(self):
        if self.amp.space != "momentum":
            raise ValueError("phonon amplitude must live in momentum space")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    @property
    def grid(self) -> SpectralGrid:
        return self.amp.grid

    @property
    def values(self) -> np.ndarray:
        return self.amp.values

    @classmethod
    def from_array(cls, grid: SpectralGrid, values: np.ndarray, alpha: float) -> "PhononField":
        return cls(Field(grid, np.asarray(values, dtype=complex), "momentum"), alpha)

    def scaled(self, c) -> "PhononField":
        return PhononField(self.amp * c, self.alpha)

    def with_alpha(self, alpha: float) -> "PhononField":
        return PhononField(self.amp, alpha)


@dataclass(frozen=True)
class ElectronField:
    psi: Field

    def __post_init__(self):
        if self.psi.space != "position":
            raise ValueError("electron wave function must live in position space")

    @property
    def grid(self) -> SpectralGrid:
        return self.psi.grid

    @property
    def values(self) -> np.ndarray:
        return self.psi.values

    @classmethod
    def from_array(
        cls, grid: SpectralGrid, values: np.ndarray, normalize: bool = False
    ) -> "ElectronField":
        values = np.asarray(values, dtype=complex)
        if normalize:
            values = values / np.sqrt(np.sum(np.abs(values) ** 2) * grid.dv)
        return cls(Field(grid, values, "position"))

    def norm(self) -> float:
        return norm(self.psi)


def potential_array(grid: SpectralGrid, phi: np.ndarray, check: bool = True) -> np.ndarray:
    """V_phi on the position grid from raw momentum amplitudes (FFT order)."""
    c = grid.dkv * grid.inv_kabs * phi
    # sum_k c_k e^{ik.x_j}; e^{ik.x_j} = e^{-ik.L/2} e^{2 pi i m.j / N}
    first = grid.size * grid.ifft(c * np.conj(grid.shift))
    # sum_k conj(c_k) e^{-ik.x_j}
    second = grid.fft(np.conj(c) * grid.shift)
    v = first + second
    if check:
        re_norm = np.sqrt(np.sum(v.real**2) * grid.dv)
        im_max = np.abs(v.imag).max() if v.size else 0.0
        if im_max > IMAG_TOL * max(re_norm, 1e-300) and im_max > 1e-14:
            raise ConventionError(
                f"V_phi has imaginary part {im_max:.3e} against real norm {re_norm:.3e}"
            )
    return v.real.copy()


def sigma_array(grid: SpectralGrid, psi: np.ndarray) -> np.ndarray:
    """sigma_psi(k) as a raw momentum array (k = 0 entry is zero)."""
    rho = np.abs(psi) ** 2
    rho_hat = grid.dv * grid.fft(rho) * grid.shift
    return grid.inv_kabs * rho_hat


def potential_from_phonons(phi: PhononField) -> Field:
    return Field(phi.grid, potential_array(phi.grid, phi.values), "position")


def potential_i_phi(phi: PhononField) -> Field:
    """V_{i phi}: the potential generated by the rotated field ``i*phi``."""
    return Field(phi.grid, potential_array(phi.grid, 1j * phi.values), "position")


def sigma_from_electron(psi: ElectronField) -> Field:
    return Field(psi.grid, sigma_array(psi.grid, psi.values), "momentum")


def hermitian_defect(sigma: Field) -> float:
    """max_k |sigma(-k) - conj(sigma(k))| with -k taken modulo the lattice."""
    v = sigma.values
    return float(np.abs(v[sigma.grid.reflect_index] - np.conj(v)).max())


# --- empirical inequality ratios -------------------------------------------


def random_momentum_profile(
    grid: SpectralGrid, rng: np.random.Generator, width: float
) -> np.ndarray:
    z = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return z * np.exp(-grid.k2 / width**2) / math.sqrt(2.0)


def inequality_ratios(phi: Field, psi: Field) -> tuple[float, float, float] | None:
    """(||V_phi||_6/||phi||_2, ||V_phi psi||_2/(||phi||_2 ||psi||_H1), ||sigma_psi||_2/||psi||_H1^2).

    Returns ``None`` when either field vanishes (ratio 0/0).
    """
    grid = phi.grid
    phi_l2 = norm(phi)
    psi_h1 = norm(psi, "H1")
    if phi_l2 == 0.0 or psi_h1 == 0.0:
        return None
    v = Field(grid, potential_array(grid, phi.values), "position")
    vpsi = Field(grid, v.values * psi.values, "position")
    sig = Field(grid, sigma_array(grid, psi.values), "momentum")
    return (
        norm(v, "Lp", 6) / phi_l2,
        norm(vpsi) / (phi_l2 * psi_h1),
        norm(sig) / psi_h1**2,
    )


@dataclass
class InequalityReport:
    rows: list[dict]
    skipped: list[int]

    @property
    def maxima(self) -> dict[str, float]:
        keys = ("ratio_v6", "ratio_vpsi", "ratio_sigma")
        return {k: max(r[k] for r in self.rows) for k in keys}

    def to_csv(self, path: str | Path, header_lines: list[str] = ()) -> None:
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.DictWriter(fh, fieldnames=["sample_id", "ratio_v6", "ratio_vpsi", "ratio_sigma"])
            w.writeheader()
            for r in self.rows:
                w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in r.items()})


def inequality_report(
    samples: int,
    grid: SpectralGrid,
    seed: int = 0,
    reference: SpectralGrid | None = None,
    include_zero: bool = False,
) -> InequalityReport:
    """Max ratios of the three Sobolev-type bounds over random (phi, psi) draws.

    Random amplitudes are complex Gaussian times ``exp(-|k|^2/w^2)`` with ``w``
    log-uniform in [0.5, 4].  They are drawn on ``reference`` (default: ``grid``)
    and embedded, so the same functions can be compared across refinements.
    ``include_zero`` prepends a ``phi = 0`` draw, which is skipped and flagged.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    ref = reference or grid
    rng = np.random.default_rng(seed)
    rows, skipped = [], []
    for i in range(samples):
        w_phi, w_psi = np.exp(rng.uniform(np.log(0.5), np.log(4.0), size=2))
        phi_k = random_momentum_profile(ref, rng, w_phi)
        psi_k = random_momentum_profile(ref, rng, w_psi)
        if include_zero and i == 0:
            phi_k = np.zeros_like(phi_k)
        if ref is not grid:
            phi_k = grid.embed(phi_k, ref)
            psi_k = grid.embed(psi_k, ref)
        phi = Field(grid, phi_k, "momentum")
        psi = Field(grid, grid.to_position(psi_k), "position")
        ratios = inequality_ratios(phi, psi)
        if ratios is None:
            log.info("sample %d has a vanishing field; skipped", i)
            skipped.append(i)
            continue
        rows.append(
            {"sample_id": i, "ratio_v6": ratios[0], "ratio_vpsi": ratios[1], "ratio_sigma": ratios[2]}
        )
    return InequalityReport(rows, skipped)
