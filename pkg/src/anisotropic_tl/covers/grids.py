"""Uniform spatial/frequency grids and the transforms between them.

Fourier convention: f̂(ξ) = ∫ f(x) e^{-2πi ξ·x} dx. The spatial grid starts at -X with spacing
dx = 2X/n; the frequency grid is the dual one with spacing dξ = 1/(2X) in FFT order. With the
origin at -X the Riemann sum picks up the phase (-1)^k, so

    f̂_k = dx^d (-1)^k FFT(f)_k,    f_m = dx^{-d} IFFT((-1)^k f̂)_m.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..constants import MIN_GRID_POINTS


def _check_points(n_per_axis: int) -> None:
    if n_per_axis < MIN_GRID_POINTS or n_per_axis & (n_per_axis - 1):
        raise ValueError(f"n_per_axis must be a power of two >= {MIN_GRID_POINTS}, got {n_per_axis}")


@dataclass(frozen=True)
class FrequencyGrid:
    """Grid covering [-L, L)^d in frequency with n points per axis."""

    dim: int
    half_width: float
    n_per_axis: int

    def __post_init__(self) -> None:
        _check_points(self.n_per_axis)
        if self.half_width <= 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_per_axis,) * self.dim

    def dual(self) -> "SpatialGrid":
        return SpatialGrid(self.dim, self.n_per_axis / (4.0 * self.half_width), self.n_per_axis)

    def axis(self) -> np.ndarray:
        """Frequencies along one axis in FFT order."""
        return np.fft.fftfreq(self.n_per_axis, d=1.0 / (2.0 * self.half_width))

    def points(self) -> np.ndarray:
        """All frequencies as an array of shape (n, …, n, d)."""
        axes = [self.axis()] * self.dim
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


@dataclass(frozen=True)
class SpatialGrid:
    """Grid over [-X, X)^d with n points per axis."""

    dim: int
    half_width: float
    n_per_axis: int

    def __post_init__(self) -> None:
        _check_points(self.n_per_axis)
        if self.half_width <= 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n_per_axis

    @property
    def cell_volume(self) -> float:
        return float(self.spacing**self.dim)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_per_axis,) * self.dim

    def dual(self) -> FrequencyGrid:
        return FrequencyGrid(self.dim, self.n_per_axis / (4.0 * self.half_width), self.n_per_axis)

    def axis(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.n_per_axis)

    def points(self) -> np.ndarray:
        axes = [self.axis()] * self.dim
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def offsets(self, radius_cells: int) -> np.ndarray:
        """Integer offsets with every coordinate in [-radius, radius]; shape (m, d)."""
        span = np.arange(-radius_cells, radius_cells + 1)
        mesh = np.meshgrid(*([span] * self.dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @cached_property
    def frequency_points(self) -> np.ndarray:
        """Baseband frequencies of the dual grid, one row per grid point (FFT order)."""
        return self.dual().points().reshape(-1, self.dim)

    @cached_property
    def phase_signs(self) -> np.ndarray:
        """(-1)^{k₁+…+k_d} on the frequency grid in FFT order."""
        k = np.rint(np.fft.fftfreq(self.n_per_axis) * self.n_per_axis).astype(np.int64)
        sign_1d = np.where(k % 2 == 0, 1.0, -1.0)
        signs = np.ones(self.shape)
        for axis in range(self.dim):
            shape = [1] * self.dim
            shape[axis] = self.n_per_axis
            signs = signs * sign_1d.reshape(shape)
        return signs

    def to_spectrum(self, samples: np.ndarray) -> np.ndarray:
        return self.cell_volume * self.phase_signs * np.fft.fftn(samples)

    def from_spectrum(self, spectrum: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(self.phase_signs * spectrum) / self.cell_volume
