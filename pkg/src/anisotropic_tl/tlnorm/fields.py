"""Band-limited sampled fields and Triebel-Lizorkin parameters."""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from ..constants import BAND_MASS_TOL, SPECTRUM_SUPPORT_TOL
from ..covers.annulus import AnnularCover
from ..covers.grids import SpatialGrid
from ..exceptions import ScaleRangeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FieldComponent:
    """e^{2πiη·x} g(x) with g sampled on the shared spatial grid.

    ``band_radius`` δ certifies supp ĝ ⊆ B_δ(0), so the component's spectrum lies in B_δ(η).
    """

    carrier: np.ndarray
    samples: np.ndarray = field(repr=False)
    band_radius: float | None = None


@dataclass(frozen=True)
class TLParams:
    """Smoothness α, integrability p, summability q, scale window and Peetre exponent β."""

    alpha: float = 0.0
    p: float = 2.0
    q: float = 2.0
    i_range: tuple[int, int] | None = None
    beta: float | None = None

    def __post_init__(self) -> None:
        for name in ("p", "q"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must lie in (0, inf], got {value}")
        if self.i_range is not None and self.i_range[0] > self.i_range[1]:
            raise ValueError(f"empty scale range {self.i_range}")
        if self.beta is not None and self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def r_exponent(self) -> float:
        """r = min(p, q, 1) of the r-triangle inequality."""
        return min(self.p, self.q, 1.0)

    def peetre_beta(self) -> float:
        """β if given, otherwise max(1/p, 1/q) + 1."""
        if self.beta is not None:
            return self.beta
        return max(1.0 / self.p, 1.0 / self.q) + 1.0


def _fractional(value: Fraction) -> float:
    return float(value - math.floor(value))


def carrier_phase(grid: SpatialGrid, carrier: np.ndarray) -> np.ndarray:
    """e^{2πiη·x} on the grid.

    η·x is reduced modulo one exactly: along each axis x_m = -X + m·dx, so the phase is
    frac(-ηX) + m·frac(η·dx) with both fractions taken in rational arithmetic. Carriers far
    beyond float precision of the product therefore keep exact phases.
    """
    if not np.any(carrier):
        return np.ones(grid.shape, dtype=complex)
    steps = np.arange(grid.n_per_axis, dtype=float)
    spacing, origin = Fraction(grid.spacing), Fraction(-grid.half_width)
    total = np.zeros(grid.shape)
    for k in range(grid.dim):
        eta = Fraction(float(carrier[k]))
        axis_phase = np.mod(_fractional(eta * origin) + steps * _fractional(eta * spacing), 1.0)
        shape = [1] * grid.dim
        shape[k] = grid.n_per_axis
        total = total + axis_phase.reshape(shape)
    return np.exp(2j * np.pi * np.mod(total, 1.0))


@dataclass(frozen=True, eq=False)
class SampledField:
    """Finite sum of modulated band-limited components on one spatial grid."""

    grid: SpatialGrid
    components: tuple[FieldComponent, ...]

    def __post_init__(self) -> None:
        for component in self.components:
            if component.samples.shape != self.grid.shape:
                raise ValueError(f"component samples {component.samples.shape} do not match grid {self.grid.shape}")
            if component.carrier.shape != (self.grid.dim,):
                raise ValueError(f"carrier must have shape ({self.grid.dim},)")

    @cached_property
    def phases(self) -> list[np.ndarray]:
        return [carrier_phase(self.grid, c.carrier) for c in self.components]

    @cached_property
    def spectra(self) -> list[np.ndarray]:
        """Baseband spectra ĝ_k on the dual frequency grid (FFT order)."""
        return [self.grid.to_spectrum(c.samples) for c in self.components]

    @cached_property
    def samples(self) -> np.ndarray:
        total = np.zeros(self.grid.shape, dtype=complex)
        for component, phase in zip(self.components, self.phases, strict=True):
            total += phase * component.samples
        return total

    @property
    def band_certified(self) -> bool:
        return all(c.band_radius is not None for c in self.components)

    def scaled(self, factor: complex) -> "SampledField":
        return SampledField(
            self.grid,
            tuple(FieldComponent(c.carrier, factor * c.samples, c.band_radius) for c in self.components),
        )

    def __add__(self, other: "SampledField") -> "SampledField":
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")
        return SampledField(self.grid, self.components + other.components)

    def lp_norm(self, p: float) -> float:
        """‖f‖_{L^p} by Riemann sum over the grid cells."""
        return lp_norm(np.abs(self.samples), self.grid, p)


def lp_norm(values: np.ndarray, grid: SpatialGrid, p: float) -> float:
    magnitude = np.abs(values)
    if math.isinf(p):
        return float(np.max(magnitude))
    peak = float(np.max(magnitude))
    if peak == 0.0:
        return 0.0
    # scaled by the peak so small p and large values stay in range
    return float(peak * (np.sum((magnitude / peak) ** p) * grid.cell_volume) ** (1.0 / p))


def field_from_samples(grid: SpatialGrid, samples: np.ndarray) -> SampledField:
    data = np.asarray(samples, dtype=complex)
    return SampledField(grid, (FieldComponent(np.zeros(grid.dim), data),))


def field_from_spectrum(grid: SpatialGrid, spectrum: np.ndarray) -> SampledField:
    """Field whose continuous transform has the given samples on the dual grid."""
    return field_from_samples(grid, grid.from_spectrum(np.asarray(spectrum, dtype=complex)))


def band_mass_outside(f: SampledField) -> float:
    """Largest fraction of a certified component's spectral energy outside its band ball."""
    freqs = f.grid.frequency_points
    radii = np.linalg.norm(freqs, axis=1).reshape(f.grid.shape)
    worst = 0.0
    for component, spectrum in zip(f.components, f.spectra, strict=True):
        if component.band_radius is None:
            continue
        energy = np.abs(spectrum) ** 2
        total = float(np.sum(energy))
        if total == 0.0:
            continue
        worst = max(worst, float(np.sum(energy[radii > component.band_radius])) / total)
    return worst


def check_band(f: SampledField, tol: float = BAND_MASS_TOL) -> None:
    mass = band_mass_outside(f)
    if mass >= tol:
        raise ValueError(f"spectral mass {mass:.3e} outside the certified band exceeds {tol:.1e}")


def aliased_overlaps(f: SampledField) -> list[tuple[int, int]]:
    """Pairs of certified components whose bands overlap once carriers are folded onto the sampling torus.

    Sums of such components are sampled as if their carriers were closer than they are, so L^p norms
    of the sum are approximate for those pairs.
    """
    period = 1.0 / f.grid.spacing
    bands = [
        (k, c.carrier, np.mod(c.carrier, period), c.band_radius)
        for k, c in enumerate(f.components)
        if c.band_radius is not None
    ]
    pairs = []
    for a, (k, carrier_k, folded_k, radius_k) in enumerate(bands):
        for l, carrier_l, folded_l, radius_l in bands[a + 1 :]:  # noqa: E741
            if np.array_equal(carrier_k, carrier_l):
                continue
            gap = np.abs(folded_k - folded_l)
            gap = np.minimum(gap, period - gap)
            if float(np.linalg.norm(gap)) < radius_k + radius_l:
                pairs.append((k, l))
    return pairs


def _scale_window(log_low: float, log_high: float, cover: AnnularCover) -> tuple[int, int]:
    """Scales that frequencies with log-gauge in [log_low, log_high] can reach.

    One step of (A*)^{±1} moves the log-gauge by an amount between ln r and u.
    """
    t_in, t_out = cover.log_inner, cover.log_outer
    step_min, step_max = cover.log_contraction, cover.growth
    gap_high = log_high - t_in
    high = math.floor(gap_high / (step_min if gap_high >= 0 else step_max)) + 1
    gap_low = t_out - log_low
    low = -math.floor(gap_low / (step_min if gap_low >= 0 else step_max)) - 1
    return low, high


def _spectral_scales(
    component: FieldComponent, spectrum: np.ndarray, cover: AnnularCover, grid: SpatialGrid
) -> set[int]:
    magnitude = np.abs(spectrum).ravel()
    peak = float(np.max(magnitude))
    if peak == 0.0:
        return set()
    support = grid.frequency_points[magnitude > SPECTRUM_SUPPORT_TOL * peak] + component.carrier
    logs = cover.log_gauge(support)
    if np.isneginf(np.min(logs)):
        raise ScaleRangeError("field has spectral mass at the origin; the homogeneous norm needs a band away from 0")
    low, high = _scale_window(float(np.min(logs)), float(np.max(logs)), cover)
    return {i for i in range(low, high + 1) if np.any(cover.contains(support, i))}


def component_scales(f: SampledField, cover: AnnularCover) -> list[set[int]]:
    """Per component, the scales i whose dilate (A*)^i Q meets the component's spectrum."""
    scales = []
    for component, spectrum in zip(f.components, f.spectra, strict=True):
        if component.band_radius is not None:
            if not np.any(component.samples):
                scales.append(set())
                continue
            scales.append(set(cover.scales_meeting_ball(component.carrier, component.band_radius)))
        else:
            scales.append(_spectral_scales(component, spectrum, cover, f.grid))
    return scales


def required_scales(f: SampledField, cover: AnnularCover) -> list[int]:
    """All scales with possibly nonvanishing convolution f ∗ φ_i."""
    union: set[int] = set()
    for scales in component_scales(f, cover):
        union |= scales
    return sorted(union)
