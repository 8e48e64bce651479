"""Periodic-box spectral grids and the continuum-normalized Fourier pair.

Position samples sit at ``x_j = -L/2 + j*dx`` on every axis, so the box is
symmetric under ``x -> -x`` (modulo L).  Momentum arrays are stored in the
standard FFT index order; :attr:`SpectralGrid.momentum_lattice` gives the
sorted lattice ``{2*pi*m/L : m = -N/2, ..., N/2 - 1}``.

Fourier convention (continuum normalization)::

    f^(k) = (2 pi)^(-d/2) sum_j dx^d f(x_j) exp(-i k.x_j)
    f(x)  = (2 pi)^(-d/2) sum_k dk^d f^(k) exp(+i k.x)

so that Parseval holds with measure weights ``dx^d`` and ``dk^d``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.fft as sfft

Space = Literal["position", "momentum"]

SUPPORTED_DIMS = (1, 3)
KINETIC_KINDS = ("spectral", "stencil")


@dataclass(frozen=True)
class SpectralGrid:
    """Cubic periodic box of side ``box_length`` with ``points_per_axis`` samples per axis.

    ``kinetic`` selects the symbol of -Laplacian: ``"spectral"`` is ``|k|^2``;
    ``"stencil"`` is the nearest-neighbour symbol ``sum_i 2(1 - cos(k_i dx))/dx^2``
    used to match a lattice Hamiltonian.
    """

    dims: int
    points_per_axis: int
    box_length: float
    kinetic: str = "spectral"

    @property
    def n(self) -> int:
        return self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dims

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dims

    @property
    def dx(self) -> float:
        return self.box_length / self.points_per_axis

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.box_length

    @property
    def dv(self) -> float:
        """Position-space cell volume ``dx^d``."""
        return self.dx**self.dims

    @property
    def dkv(self) -> float:
        """Momentum-space cell volume ``dk^d``."""
        return self.dk**self.dims

    @property
    def k_max(self) -> float:
        return np.pi * self.points_per_axis / self.box_length

    @property
    def axis_x(self) -> np.ndarray:
        return -0.5 * self.box_length + self.dx * np.arange(self.points_per_axis)

    @property
    def axis_k(self) -> np.ndarray:
        """Per-axis momenta in FFT order."""
        return self.dk * _fft_integers(self.points_per_axis)

    @property
    def momentum_lattice(self) -> np.ndarray:
        m = np.arange(-self.points_per_axis // 2, self.points_per_axis // 2)
        return self.dk * m

    @functools.cached_property
    def x(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis_x] * self.dims), indexing="ij"))

    @functools.cached_property
    def k(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis_k] * self.dims), indexing="ij"))

    @functools.cached_property
    def r2(self) -> np.ndarray:
        return sum(xi**2 for xi in self.x)

    @functools.cached_property
    def k2(self) -> np.ndarray:
        return sum(ki**2 for ki in self.k)

    @functools.cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @functools.cached_property
    def inv_kabs(self) -> np.ndarray:
        """``|k|^-1`` with the k = 0 entry set to zero (that mode never couples)."""
        out = np.zeros(self.shape)
        nz = self.k2 > 0
        out[nz] = 1.0 / np.sqrt(self.k2[nz])
        return out

    @functools.cached_property
    def kinetic_symbol(self) -> np.ndarray:
        if self.kinetic == "spectral":
            return self.k2
        h = self.dx
        return sum(2.0 * (1.0 - np.cos(ki * h)) / h**2 for ki in self.k)

    @functools.cached_property
    def shift(self) -> np.ndarray:
        """``exp(i k.L/2)``: converts a plain DFT to the centred-box phase convention."""
        ph = np.exp(0.5j * self.axis_k * self.box_length)
        out = np.ones(self.shape, dtype=complex)
        for axis in range(self.dims):
            idx = [None] * self.dims
            idx[axis] = slice(None)
            out = out * ph[tuple(idx)]
        return out

    @functools.cached_property
    def reflect_index(self) -> tuple[np.ndarray, ...]:
        """Index arrays mapping each momentum k to -k (mod the lattice)."""
        m = (-np.arange(self.points_per_axis)) % self.points_per_axis
        return np.ix_(*([m] * self.dims))

    def fft(self, values: np.ndarray) -> np.ndarray:
        return sfft.fftn(values, workers=_workers())

    def ifft(self, values: np.ndarray) -> np.ndarray:
        return sfft.ifftn(values, workers=_workers())

    def to_momentum(self, values: np.ndarray) -> np.ndarray:
        """Raw-array forward transform (position -> momentum)."""
        scale = self.dv / (2.0 * np.pi) ** (self.dims / 2)
        return scale * self.fft(values) * self.shift

    def to_position(self, values: np.ndarray) -> np.ndarray:
        """Raw-array inverse transform (momentum -> position)."""
        scale = self.dkv * self.size / (2.0 * np.pi) ** (self.dims / 2)
        return scale * self.ifft(values * np.conj(self.shift))

    def embed(self, values: np.ndarray, other: "SpectralGrid") -> np.ndarray:
        """Copy a momentum array from ``other`` (same box, fewer points) into this grid.

        Modes absent from ``other`` are zero; the Nyquist mode of the coarse grid is
        kept at ``-N/2``.
        """
        if other.box_length != self.box_length or other.dims != self.dims:
            raise ValueError("embed needs grids with the same box and dimension")
        if other.n > self.n:
            raise ValueError("target grid must be at least as fine")
        out = np.zeros(self.shape, dtype=complex)
        src = _fft_integers(other.n)
        dst = src.astype(int) % self.n
        out[np.ix_(*([dst] * self.dims))] = values
        return out


def _fft_integers(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, d=1.0 / n)


def _workers() -> int | None:
    import os

    val = os.environ.get("POLARON_THREADS")
    return int(val) if val else None


def make_grid(
    points_per_axis: int, box_length: float, dims: int, kinetic: str = "spectral"
) -> SpectralGrid:
    if int(points_per_axis) != points_per_axis or points_per_axis < 2 or points_per_axis % 2:
        raise ValueError(f"points_per_axis must be an even integer >= 2, got {points_per_axis}")
    if not box_length > 0:
        raise ValueError(f"box_length must be positive, got {box_length}")
    if dims not in SUPPORTED_DIMS:
        raise ValueError(f"dims must be one of {SUPPORTED_DIMS}, got {dims}")
    if kinetic not in KINETIC_KINDS:
        raise ValueError(f"kinetic must be one of {KINETIC_KINDS}, got {kinetic!r}")
    return SpectralGrid(dims, int(points_per_axis), float(box_length), kinetic)


@dataclass(frozen=True)
class Field:
    """Complex samples of a function on ``grid`` in either representation."""

    grid: SpectralGrid
    values: np.ndarray = field(repr=False)
    space: Space = "position"

    def __post_init__(self):
        if self.space not in ("position", "momentum"):
            raise ValueError(f"unknown space tag {self.space!r}")
        if np.shape(self.values) != self.grid.shape:
            raise ValueError(
                f"values shape {np.shape(self.values)} does not match grid {self.grid.shape}"
            )

    @property
    def weight(self) -> float:
        return self.grid.dv if self.space == "position" else self.grid.dkv

    def inner(self, other: "Field") -> complex:
        """``<self, other>``, antilinear in ``self``."""
        if other.space != self.space:
            raise ValueError("inner product of fields in different spaces")
        return complex(np.vdot(self.values, other.values) * self.weight)

    def __mul__(self, c):
        return Field(self.grid, self.values * c, self.space)

    __rmul__ = __mul__

    def __add__(self, other: "Field") -> "Field":
        if other.space != self.space:
            raise ValueError("cannot add fields in different spaces")
        return Field(self.grid, self.values + other.values, self.space)

    def __sub__(self, other: "Field") -> "Field":
        return self + (-1.0) * other


def transform(f: Field) -> Field:
    """Continuum-normalized Fourier transform; flips the space tag."""
    if f.space == "position":
        return Field(f.grid, f.grid.to_momentum(f.values), "momentum")
    return Field(f.grid, f.grid.to_position(f.values), "position")


def gradient_norm2(grid: SpectralGrid, values: np.ndarray) -> float:
    """``||grad f||_2^2`` for position samples, gradient taken spectrally."""
    fk = grid.to_momentum(values)
    return float(np.sum(grid.k2 * np.abs(fk) ** 2) * grid.dkv)


def norm(f: Field, kind: str = "L2", p: float | None = None) -> float:
    """Quadrature approximation of a continuum norm.

    ``kind`` is ``"L2"``, ``"Lp"`` (requires ``p > 0``) or ``"H1"``.  H1 is
    ``(||f||_2^2 + ||grad f||_2^2)^(1/2)`` and needs a position-space field.
    """
    vals = f.values
    if kind == "L2":
        return float(np.sqrt(np.sum(np.abs(vals) ** 2) * f.weight))
    if kind == "Lp":
        if p is None or not p > 0:
            raise ValueError(f"Lp norm needs p > 0, got {p}")
        a = np.abs(vals)
        scale = a.max()
        if scale == 0:
            return 0.0
        return float(scale * (np.sum((a / scale) ** p) * f.weight) ** (1.0 / p))
    if kind == "H1":
        if f.space != "position":
            raise ValueError("H1 norm is defined for position-space fields")
        l2sq = np.sum(np.abs(vals) ** 2) * f.weight
        return float(np.sqrt(l2sq + gradient_norm2(f.grid, vals)))
    raise ValueError(f"unknown norm kind {kind!r}")
