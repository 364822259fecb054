"""Peetre maximal functions φ**_{i,β} f and the maximal quasi-norms built on them."""

import logging
import math
from functools import lru_cache

import numpy as np
from scipy.ndimage import maximum_filter1d

from ..constants import DEFAULT_LATTICE_DENSITY, WINDOW_EDGE_WEIGHT
from ..covers.grids import SpatialGrid
from ..covers.profiles import FourierProfile
from ..exceptions import PreconditionError, WindowTooSmallError
from ..linalg.models import ExpansiveMatrix
from ..quasinorm.step import StepQuasiNorm
from ..utils import parallel_map
from .fields import FieldComponent, SampledField, TLParams
from .norms import (
    average_norm,
    convolve_dilate,
    ensure_profile_matrix,
    log_terms,
    lp_lq_norm,
    scale_magnitudes,
    spatial_ellipsoid,
)

logger = logging.getLogger(__name__)


@lru_cache(maxsize=32)
def _offset_scales(A: ExpansiveMatrix, grid: SpatialGrid, reach: int) -> np.ndarray:
    """Step scale index of every grid offset in the cube of radius ``reach``; the origin gets the minimum."""
    step = StepQuasiNorm(matrix=A, ellipsoid=spatial_ellipsoid(A))
    offsets = grid.offsets(reach) * grid.spacing
    scales = np.zeros(offsets.shape[0], dtype=np.int64)
    nonzero = np.any(offsets != 0.0, axis=1)
    scales[nonzero] = step.scale_indices(offsets[nonzero])
    scales[~nonzero] = np.min(scales[nonzero]) - 1
    return scales.reshape((2 * reach + 1,) * grid.dim)


def _weight(A: ExpansiveMatrix, i: int, scale: int, beta: float) -> float:
    """(1 + ρ_A(A^i z))^{-β} for z of step scale ``scale``."""
    exponent = (i + scale) * A.log_det
    if exponent > 700.0:
        return 0.0
    return float((1.0 + math.exp(exponent)) ** -beta)


def _edge_weight(A: ExpansiveMatrix, grid: SpatialGrid, i: int, beta: float, reach: int) -> float:
    scales = _offset_scales(A, grid, reach)
    edge = np.ones(scales.shape, dtype=bool)
    edge[(slice(1, -1),) * grid.dim] = False
    return _weight(A, i, int(np.min(scales[edge])), beta)


def resolve_window(
    A: ExpansiveMatrix, grid: SpatialGrid, i: int, beta: float, window: int | None = None
) -> int:
    """Offset reach in cells for φ**_{i,β}.

    Without an explicit window the reach doubles until the edge weight drops below 1e-3; a reach of
    n - 1 cells is always exact because every further offset reads the zero extension.

    Raises:
        WindowTooSmallError: If an explicit window leaves an edge weight of 1e-3 or more
    """
    limit = grid.n_per_axis - 1
    if window is not None:
        if window < 1:
            raise ValueError(f"window must be at least one cell, got {window}")
        reach = min(window, limit)
        weight = _edge_weight(A, grid, i, beta, reach)
        if reach < limit and weight >= WINDOW_EDGE_WEIGHT:
            raise WindowTooSmallError(
                f"edge weight {weight:.3e} at window {window} is not below {WINDOW_EDGE_WEIGHT:.0e} for scale {i}"
            )
        return reach

    reach = 1
    while reach < limit and _edge_weight(A, grid, i, beta, reach) >= WINDOW_EDGE_WEIGHT:
        reach *= 2
    return min(reach, limit)


def _row_runs(footprint: np.ndarray) -> list[tuple[tuple[int, ...], int, int]]:
    """Split a footprint into runs along the last axis: (leading offsets, first, last) in cell units."""
    reach = footprint.shape[-1] // 2
    runs = []
    for lead in np.ndindex(*footprint.shape[:-1]):
        row = footprint[lead]
        if not row.any():
            continue
        padded = np.concatenate(([False], row, [False])).astype(np.int8)
        starts = np.flatnonzero(np.diff(padded) == 1)
        stops = np.flatnonzero(np.diff(padded) == -1) - 1
        offset = tuple(k - reach for k in lead)
        runs.extend((offset, int(a) - reach, int(b) - reach) for a, b in zip(starts, stops, strict=True))
    return runs


def _footprint_max(
    padded: np.ndarray, footprint: np.ndarray, n: int, cache_by_length: dict[int, np.ndarray]
) -> np.ndarray:
    """max over z in the footprint of values(x + z), with ``padded`` the values zero-padded by the reach."""
    reach = footprint.shape[-1] // 2
    dim = footprint.ndim
    out = np.zeros((n,) * dim)
    for lead, first, last in _row_runs(footprint):
        length = last - first + 1
        running = cache_by_length.get(length)
        if running is None:
            running = maximum_filter1d(padded, size=length, axis=-1, mode="constant", cval=0.0)
            cache_by_length[length] = running
        # the length-L window centered at y covers [y - L//2, y - L//2 + L - 1]
        centre = reach + first + length // 2
        index = tuple(slice(reach + o, reach + o + n) for o in lead) + (slice(centre, centre + n),)
        np.maximum(out, running[index], out=out)
    return out


def peetre_from_magnitude(
    magnitude: np.ndarray, A: ExpansiveMatrix, grid: SpatialGrid, i: int, beta: float, window: int | None = None
) -> np.ndarray:
    """sup_z |g(x+z)| / (1 + ρ_A(A^i z))^β over grid offsets z, with g zero outside the box.

    Offsets are grouped by step scale s; the weight only depends on s and decreases in it, so the
    supremum is the max over s of the weight times the max over the nested set {z : s(z) ≤ s}.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    reach = resolve_window(A, grid, i, beta, window)
    scales = _offset_scales(A, grid, reach)
    padded = np.pad(np.abs(magnitude), reach)
    lengths: dict[int, np.ndarray] = {}

    result = np.abs(magnitude).astype(float)
    nonzero_scales = np.unique(scales)[1:]
    for scale in nonzero_scales:
        weight = _weight(A, i, int(scale), beta)
        if weight == 0.0:
            break
        local = _footprint_max(padded, scales <= scale, grid.n_per_axis, lengths)
        np.maximum(result, weight * local, out=result)
    logger.debug(f"peetre scale {i}: reach {reach} cells, {nonzero_scales.size} offset scales")
    return result


def _check_beta(params: TLParams) -> float:
    beta = params.peetre_beta()
    floor = max(1.0 / params.p, 1.0 / params.q)
    if beta <= floor:
        raise PreconditionError(f"beta {beta} must exceed max(1/p, 1/q) = {floor}")
    return beta


def peetre_maximal(
    f: SampledField, A: ExpansiveMatrix, prof: FourierProfile, i: int, beta: float, window: int | None = None
) -> SampledField:
    """φ**_{i,β} f on the grid, returned as a real nonnegative field."""
    magnitude = np.abs(convolve_dilate(f, A, prof, i).samples)
    values = peetre_from_magnitude(magnitude, A, f.grid, i, beta, window)
    return SampledField(f.grid, (FieldComponent(np.zeros(f.grid.dim), values.astype(complex)),))


def _maximal_terms(
    f: SampledField, A: ExpansiveMatrix, prof: FourierProfile, params: TLParams, window: int | None, workers: int
) -> dict[int, np.ndarray]:
    ensure_profile_matrix(A, prof)
    beta = _check_beta(params)
    magnitudes = scale_magnitudes(f, prof, params, workers)
    scales = list(magnitudes)
    maxima = parallel_map(
        lambda i: peetre_from_magnitude(magnitudes[i], A, f.grid, i, beta, window), scales, workers
    )
    return log_terms(dict(zip(scales, maxima, strict=True)), A, params.alpha)


def maximal_tl_norm(
    f: SampledField,
    A: ExpansiveMatrix,
    prof: FourierProfile,
    params: TLParams,
    window: int | None = None,
    workers: int = 1,
) -> float:
    """‖(Σ_i (|det A|^{αi} φ**_{i,β} f)^q)^{1/q}‖_{L^p} for p < ∞ (sup over i when q = ∞).

    Raises:
        PreconditionError: If β ≤ max(1/p, 1/q)
    """
    if math.isinf(params.p):
        raise ValueError("maximal_tl_norm needs p < inf; use maximal_tl_norm_pinf")
    terms = _maximal_terms(f, A, prof, params, window, workers)
    return lp_lq_norm(terms, f.grid, params.p, params.q)


def maximal_tl_norm_pinf(
    f: SampledField,
    A: ExpansiveMatrix,
    prof: FourierProfile,
    params: TLParams,
    density: int = DEFAULT_LATTICE_DENSITY,
    window: int | None = None,
    workers: int = 1,
) -> float:
    """p = ∞ maximal quasi-norm: tent averages for q < ∞, sup_i ‖·‖_∞ for q = ∞."""
    terms = _maximal_terms(f, A, prof, params, window, workers)
    if math.isinf(params.q):
        return lp_lq_norm(terms, f.grid, math.inf, math.inf)
    return average_norm(terms, A, f.grid, params.q, density)
