"""Analyzing profiles φ̂ with an exact partition of unity over the dilates (A*)^i."""

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from ..constants import DEFAULT_COVER_BAND, MIN_CELLS_ACROSS_ANNULUS, POU_TOL
from ..exceptions import GridResolutionError, PreconditionError
from ..linalg.models import ExpansiveMatrix
from ..quasinorm.step import StepQuasiNorm, sample_shell_points
from .annulus import AnnularCover
from .bump import ProfileShape, plateau_bump
from .grids import FrequencyGrid

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FourierProfile:
    """Closed-form analyzing profile.

    The base profile is φ̂ = ĥ / Σ_{|m|≤W} ĥ((A*)^m ·) with ĥ a plateau bump of the log-gauge.
    A profile with ``index`` i and ``offsets`` M evaluates Σ_{m∈M} φ̂((A*)^{-(i+m)} ξ), so a dilate
    is (i, (0,)) and the window Φ is (0, (-N, …, N)).
    """

    grid: FrequencyGrid
    cover: AnnularCover = field(repr=False)
    shape: ProfileShape
    index: int = 0
    offsets: tuple[int, ...] = (0,)

    @property
    def matrix(self) -> ExpansiveMatrix:
        return self.cover.matrix

    @property
    def annulus(self) -> tuple[float, float]:
        """Certified (r_in, r_out) with supp ⊆ {r_in ≤ ρ_{A*} ≤ r_out}."""
        r_in, r_out = self.cover.rho_bounds
        det = self.matrix.det_abs
        lowest = self.index + min(self.offsets)
        highest = self.index + max(self.offsets)
        return r_in * det**lowest, r_out * det**highest

    def _bump(self, y: np.ndarray) -> np.ndarray:
        return plateau_bump(self.cover.log_gauge(y) / self.cover.growth, self.shape)

    def base_values(self, y: np.ndarray) -> np.ndarray:
        """φ̂(y) for the undilated profile."""
        pts = np.atleast_2d(y)
        h = self._bump(pts)
        out = np.zeros(pts.shape[0])
        support = h > 0
        if not np.any(support):
            return out
        inside = pts[support]
        norm = np.zeros(inside.shape[0])
        window = self.cover.window
        for m in range(-window, window + 1):
            norm += self._bump(inside @ self.cover.adjoint.power(m).T)
        out[support] = h[support] / norm
        return out

    def evaluate(self, xi: np.ndarray, shift: np.ndarray | None = None, index: int | None = None) -> np.ndarray:
        """Profile values at ``shift + xi`` for each row of ``xi``.

        The dilation is applied to the shift and to ``xi`` separately so that a large carrier
        frequency plus a small baseband offset keeps its relative precision.
        """
        pts = np.atleast_2d(xi)
        base_index = self.index if index is None else index
        total = np.zeros(pts.shape[0])
        for m in self.offsets:
            inverse = self.cover.adjoint.power(-(base_index + m))
            y = pts @ inverse.T
            if shift is not None:
                y = y + inverse @ np.asarray(shift, dtype=float)
            total += self.base_values(y)
        return total

    @cached_property
    def values(self) -> np.ndarray:
        points = self.grid.points().reshape(-1, self.grid.dim)
        return self.evaluate(points).reshape(self.grid.shape)

    @property
    def support_mask(self) -> np.ndarray:
        return self.values > 0


def _check_resolution(cover: AnnularCover, grid: FrequencyGrid) -> None:
    inner, outer = np.exp(cover.log_inner), np.exp(cover.log_outer)
    thickness = (outer - inner) * float(cover.gauge.semi_axes()[0])
    cells = thickness / grid.spacing
    if cells < MIN_CELLS_ACROSS_ANNULUS:
        raise GridResolutionError(
            f"grid resolves {cells:.1f} cells across the annulus, need {MIN_CELLS_ACROSS_ANNULUS}; "
            "increase n_per_axis or decrease the half width"
        )
    reach = float(np.max(cover.gauge.bounding_half_widths(scale=outer)))
    if reach > grid.half_width:
        raise GridResolutionError(f"annulus reaches {reach:.4g}, beyond the grid half width {grid.half_width:.4g}")


def _verify_annulus(profile: FourierProfile) -> None:
    points = profile.grid.points().reshape(-1, profile.grid.dim)[profile.support_mask.ravel()]
    step = StepQuasiNorm(matrix=profile.cover.adjoint, ellipsoid=profile.cover.gauge)
    values = step.rho_values(points)
    r_in, r_out = profile.annulus
    if np.any(values < r_in) or np.any(values > r_out):
        raise RuntimeError(f"profile support leaves the certified annulus [{r_in:.4g}, {r_out:.4g}]")


def dilation_sums(profile: FourierProfile, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Σ_i φ̂((A*)^i ξ) and the number of nonzero terms, for each nonzero row of ``xi``."""
    cover = profile.cover
    pts = np.atleast_2d(np.asarray(xi, dtype=float))
    step = StepQuasiNorm(matrix=cover.adjoint, ellipsoid=cover.gauge)
    scales = step.scale_indices(pts)
    sums = np.zeros(pts.shape[0])
    counts = np.zeros(pts.shape[0], dtype=np.int64)
    reach = cover.term_window
    for scale in np.unique(scales):
        rows = scales == scale
        # y lies in the unit shell A*Ω \ Ω, so only |m| ≤ term_window can contribute
        shell = pts[rows] @ cover.adjoint.power(-int(scale)).T
        for m in range(-reach, reach + 1):
            term = profile.base_values(shell @ cover.adjoint.power(m).T)
            sums[rows] += term
            counts[rows] += term > 0
    return sums, counts


def partition_of_unity_defect(
    profile: FourierProfile, band: int = DEFAULT_COVER_BAND, n_samples: int = 1000, seed: int = 0
) -> float:
    """max |Σ_i φ̂((A*)^i ξ) − 1| over random ξ with |det A|^{-band} ≤ ρ_{A*}(ξ) ≤ |det A|^{band}."""
    step = StepQuasiNorm(matrix=profile.cover.adjoint, ellipsoid=profile.cover.gauge)
    xi = sample_shell_points(step, n_samples, np.random.default_rng(seed), scale_range=band)
    sums, _ = dilation_sums(profile, xi)
    return float(np.max(np.abs(sums - 1.0)))


def build_analyzing_profile(
    A: ExpansiveMatrix,
    grid: FrequencyGrid,
    shape: ProfileShape | None = None,
    theta: float | None = None,
    band: int = DEFAULT_COVER_BAND,
    pou_tol: float = POU_TOL,
) -> FourierProfile:
    """Build the analyzing profile of A on ``grid`` and certify it.

    Args:
        A: Certified expansive matrix (the profile dilates by A*)
        grid: Frequency grid used for the cached samples and the support certificate
        shape: Bump parameters in units of one gauge growth step
        theta: Contraction parameter of the gauge ellipsoid
        band: Coverage band for the partition-of-unity check
        pou_tol: Allowed partition-of-unity defect

    Returns:
        FourierProfile with index 0

    Raises:
        GridResolutionError: If the grid cannot resolve the annulus or the identity fails on the band
    """
    if grid.dim != A.dim:
        raise ValueError(f"grid dimension {grid.dim} does not match matrix dimension {A.dim}")
    shape = shape or ProfileShape()
    cover = AnnularCover.for_matrix(A, shape, theta)
    _check_resolution(cover, grid)

    profile = FourierProfile(grid=grid, cover=cover, shape=shape)
    _verify_annulus(profile)
    defect = partition_of_unity_defect(profile, band)
    if defect > pou_tol:
        raise GridResolutionError(f"partition of unity defect {defect:.3e} exceeds {pou_tol:.1e} on band {band}")

    logger.debug(
        f"analyzing profile: growth {cover.growth:.4f}, window {cover.window}, "
        f"annulus {profile.annulus}, defect {defect:.2e}"
    )
    return profile


def dilate_profile(p: FourierProfile, A: ExpansiveMatrix, i: int) -> FourierProfile:
    """φ̂((A*)^{-i} ·) evaluated in closed form.

    Raises:
        GridResolutionError: If the dilated support misses the grid entirely
    """
    if A is not p.matrix and not np.array_equal(A.entries, p.matrix.entries):
        raise ValueError("profile was built for a different matrix")
    dilated = replace(p, index=p.index + i)
    if not np.any(dilated.support_mask):
        raise GridResolutionError(f"dilate {i} has no support on the grid; widen the grid or shrink |i|")
    return dilated


def make_window_profile(p: FourierProfile, N: int, n_samples: int = 512, seed: int = 0) -> FourierProfile:
    """Φ̂ = Σ_{|m|≤N} φ̂_{i+m}, certified equal to one on the support of ``p``.

    Raises:
        PreconditionError: If N is smaller than the neighbor bound
    """
    if N < 0:
        raise ValueError(f"N must be nonnegative, got {N}")
    window = replace(p, offsets=tuple(range(-N, N + 1)))
    points = p.cover.sample_points(n_samples, np.random.default_rng(seed), index=p.index)
    defect = float(np.max(np.abs(window.evaluate(points) - 1.0)))
    if defect > POU_TOL:
        raise PreconditionError(f"window of half-width {N} is not one on Q (defect {defect:.3e}); N is too small")
    return window
