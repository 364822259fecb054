"""Discrete homogeneous Triebel-Lizorkin quasi-norms of sampled fields.

All powers are taken in log space: per scale we keep ln(|det A|^{αi} |f ∗ φ_i|) and combine
with logaddexp, so small p, q and extreme weights neither underflow nor overflow.
"""

import logging
import math
from collections.abc import Iterable
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import logsumexp

from ..constants import DEFAULT_LATTICE_DENSITY, TRUNCATION_ERROR_FRACTION, TRUNCATION_WARN_FRACTION
from ..covers.grids import SpatialGrid
from ..covers.profiles import FourierProfile
from ..exceptions import ScaleRangeError, TruncationError
from ..linalg.expansive import build_ellipsoid
from ..linalg.models import Ellipsoid, ExpansiveMatrix
from ..utils import parallel_map
from .fields import FieldComponent, SampledField, TLParams, component_scales

logger = logging.getLogger(__name__)

AverageSets = Literal["ellipsoid", "parallelepiped"]

# ℓ sweeps stop once the averaging set is this many box widths across
_BOX_COVER_FACTOR = 2.0
_MAX_LEVELS = 400


@lru_cache(maxsize=32)
def spatial_ellipsoid(A: ExpansiveMatrix) -> Ellipsoid:
    """Ω_A for the p = ∞ averages (cached for the most recent matrices)."""
    return build_ellipsoid(A)


@lru_cache(maxsize=8)
def _rim_mask(grid: SpatialGrid) -> np.ndarray:
    """Outermost frequency cell layer of the dual grid."""
    dual = grid.dual()
    edge = dual.half_width - dual.spacing
    return np.asarray(np.any(np.abs(grid.frequency_points) >= edge, axis=1).reshape(grid.shape))


def ensure_profile_matrix(A: ExpansiveMatrix, prof: FourierProfile) -> None:
    if A is not prof.matrix and not np.array_equal(A.entries, prof.matrix.entries):
        raise ValueError("profile was built for a different matrix")


def profile_scales(f: SampledField, prof: FourierProfile) -> list[set[int]]:
    """Per component, the i with f_k ∗ φ_i possibly nonzero for this (possibly dilated or windowed) profile."""
    base = component_scales(f, prof.cover)
    return [{s - prof.index - m for s in scales for m in prof.offsets} for scales in base]


def _convolve_component(f: SampledField, k: int, prof: FourierProfile, i: int) -> np.ndarray:
    component = f.components[k]
    multiplier = prof.evaluate(f.grid.frequency_points, shift=component.carrier, index=prof.index + i)
    product = f.spectra[k] * multiplier.reshape(f.grid.shape)

    total = float(np.sum(np.abs(f.spectra[k]) ** 2))
    if total > 0.0:
        fraction = float(np.sum(np.abs(product[_rim_mask(f.grid)]) ** 2)) / total
        if fraction > TRUNCATION_ERROR_FRACTION:
            raise TruncationError(fraction, i)
        if fraction > TRUNCATION_WARN_FRACTION:
            logger.warning(f"scale {i}: {fraction:.2e} of the spectral energy sits at the frequency box edge")
    return np.asarray(f.grid.from_spectrum(product))


def convolve_dilate(f: SampledField, A: ExpansiveMatrix, prof: FourierProfile, i: int) -> SampledField:
    """f ∗ φ_i, evaluated componentwise by exact multiplication in frequency.

    Raises:
        TruncationError: If the product carries more than 1e-6 of the energy to the frequency box edge
    """
    ensure_profile_matrix(A, prof)
    scales = profile_scales(f, prof)
    components = tuple(
        FieldComponent(c.carrier, _convolve_component(f, k, prof, i), c.band_radius)
        for k, c in enumerate(f.components)
        if i in scales[k]
    )
    return SampledField(f.grid, components)


def _magnitude(f: SampledField, prof: FourierProfile, i: int, active: list[int]) -> np.ndarray:
    total = np.zeros(f.grid.shape, dtype=complex)
    for k in active:
        total += f.phases[k] * _convolve_component(f, k, prof, i)
    return np.abs(total)


def scale_magnitudes(
    f: SampledField, prof: FourierProfile, params: TLParams, workers: int = 1
) -> dict[int, np.ndarray]:
    """|f ∗ φ_i| for every scale with possibly nonzero convolution.

    Raises:
        ScaleRangeError: If an explicit ``params.i_range`` misses one of those scales
    """
    scales = profile_scales(f, prof)
    required = sorted(set().union(*scales)) if scales else []
    if params.i_range is not None:
        lo, hi = params.i_range
        missing = [i for i in required if not lo <= i <= hi]
        if missing:
            raise ScaleRangeError(f"scale range [{lo}, {hi}] misses scales {missing} with nonvanishing convolution")

    def compute(i: int) -> np.ndarray:
        active = [k for k, s in enumerate(scales) if i in s]
        return _magnitude(f, prof, i, active)

    values = parallel_map(compute, required, workers)
    logger.debug(f"computed {len(required)} scale convolutions: {required}")
    return dict(zip(required, values, strict=True))


def log_terms(magnitudes: dict[int, np.ndarray], A: ExpansiveMatrix, alpha: float) -> dict[int, np.ndarray]:
    """ln(|det A|^{αi} m_i) per scale."""
    with np.errstate(divide="ignore"):
        return {i: alpha * i * A.log_det + np.log(m) for i, m in magnitudes.items()}


def _lq_log(terms: Iterable[np.ndarray], q: float, shape: tuple[int, ...]) -> np.ndarray:
    acc = np.full(shape, -np.inf)
    for term in terms:
        acc = np.maximum(acc, term) if math.isinf(q) else np.logaddexp(acc, q * term)
    return acc if math.isinf(q) else acc / q


def _lp_log(log_values: np.ndarray, grid: SpatialGrid, p: float) -> float:
    if math.isinf(p):
        return float(np.max(log_values))
    with np.errstate(divide="ignore"):
        total = logsumexp(p * log_values) + math.log(grid.cell_volume)
    return float(total / p)


def lp_lq_norm(terms: dict[int, np.ndarray], grid: SpatialGrid, p: float, q: float) -> float:
    """‖(Σ_i e^{q·t_i})^{1/q}‖_{L^p} from per-scale log terms t_i."""
    if not terms:
        return 0.0
    inner = _lq_log(terms.values(), q, grid.shape)
    return float(np.exp(_lp_log(inner, grid, p)))


def tl_norm(
    f: SampledField, A: ExpansiveMatrix, prof: FourierProfile, params: TLParams, workers: int = 1
) -> float:
    """‖(Σ_i (|det A|^{αi}|f ∗ φ_i|)^q)^{1/q}‖_{L^p} for p < ∞ (sup over i when q = ∞)."""
    if math.isinf(params.p):
        raise ValueError("tl_norm needs p < inf; use tl_norm_pinf or tl_norm_pinf_qinf")
    ensure_profile_matrix(A, prof)
    magnitudes = scale_magnitudes(f, prof, params, workers)
    return lp_lq_norm(log_terms(magnitudes, A, params.alpha), f.grid, params.p, params.q)


def _minor_width(A: ExpansiveMatrix, level: int, sets: AverageSets) -> float:
    """Radius of a ball inside A^ℓE (the minor semi-axis for ellipsoids)."""
    inverse = A.power(-level)
    if sets == "ellipsoid":
        omega = spatial_ellipsoid(A)
        form = inverse.T @ omega.form @ inverse
        return float(np.sqrt(omega.level / np.max(np.linalg.eigvalsh(form))))
    return float(0.5 / np.linalg.norm(inverse, 2))


def _set_mask(A: ExpansiveMatrix, level: int, grid: SpatialGrid, sets: AverageSets) -> np.ndarray:
    """Indicator of A^ℓE on the grid offsets, zero outside reach n - 1."""
    power = A.power(level)
    if sets == "ellipsoid":
        half_widths = spatial_ellipsoid(A).bounding_half_widths(transform=power)
    else:
        half_widths = np.sum(np.abs(power), axis=1)
    reach = int(min(np.ceil(np.max(half_widths) / grid.spacing), grid.n_per_axis - 1))
    offsets = grid.offsets(reach) * grid.spacing
    mapped = offsets @ A.power(-level).T
    if sets == "ellipsoid":
        inside = spatial_ellipsoid(A).contains(mapped)
    else:
        inside = np.all((mapped >= 0.0) & (mapped < 1.0), axis=1)
    # the origin always counts, so a sub-cell set averages to the point value
    inside[offsets.shape[0] // 2] = True
    return np.asarray(inside.reshape((2 * reach + 1,) * grid.dim), dtype=float)


def _levels(A: ExpansiveMatrix, grid: SpatialGrid, top_scale: int, sets: AverageSets) -> list[int]:
    """ℓ from -top_scale until A^ℓE is wider than the box."""
    levels = [-top_scale]
    while len(levels) < _MAX_LEVELS and _minor_width(A, levels[-1], sets) <= _BOX_COVER_FACTOR * grid.half_width:
        levels.append(levels[-1] + 1)
    return levels


def _set_measure(A: ExpansiveMatrix, level: int, grid: SpatialGrid, sets: AverageSets) -> float:
    """|A^ℓE| in grid cells, including the part of A^ℓE the truncated mask misses."""
    base = spatial_ellipsoid(A).volume() if sets == "ellipsoid" else 1.0
    return float(np.exp(level * A.log_det) * base / grid.cell_volume)


def _best_average(values: np.ndarray, mask: np.ndarray, stride: int, measure: float) -> float:
    """max over lattice points w of the integral of ``values`` over (mask + w), zero extended, per ``measure``.

    Sub-cell sets fall back to the mask count so they average to the point value.
    """
    sums = fftconvolve(values, mask[(slice(None, None, -1),) * mask.ndim], mode="same")
    lattice = sums[(slice(None, None, stride),) * values.ndim]
    return float(max(np.max(lattice), 0.0) / max(measure, float(np.sum(mask))))


def _stride(minor: float, grid: SpatialGrid, density: int) -> int:
    return max(1, int(math.floor(minor / (density * grid.spacing))))


def average_norm(
    terms: dict[int, np.ndarray],
    A: ExpansiveMatrix,
    grid: SpatialGrid,
    q: float,
    density: int = DEFAULT_LATTICE_DENSITY,
    sets: AverageSets = "ellipsoid",
) -> float:
    """sup_{ℓ,w} (|A^ℓE|^{-1} ∫_{A^ℓE+w} Σ_{i≥-ℓ} e^{q t_i})^{1/q} from per-scale log terms t_i.

    For q = ∞ the inner sum becomes sup_{i≥-ℓ} of the averages of e^{t_i} taken separately.
    """
    if not terms:
        return 0.0
    peak = max(float(np.max(t)) for t in terms.values())
    if not np.isfinite(peak):
        return 0.0
    scales = sorted(terms)
    levels = _levels(A, grid, scales[-1], sets)

    if math.isinf(q):
        scaled = {i: np.exp(terms[i] - peak) for i in scales}
        best = 0.0
        for level in levels:
            mask = _set_mask(A, level, grid, sets)
            measure = _set_measure(A, level, grid, sets)
            stride = _stride(_minor_width(A, level, sets), grid, density)
            for i in scales:
                if i >= -level:
                    best = max(best, _best_average(scaled[i], mask, stride, measure))
        return float(np.exp(peak) * best)

    powered = {i: np.exp(q * (terms[i] - peak)) for i in scales}
    best = 0.0
    cumulative = np.zeros(grid.shape)
    included = len(scales)
    # sweep ℓ upward: the sum over i ≥ -ℓ only gains terms
    for level in levels:
        while included > 0 and scales[included - 1] >= -level:
            included -= 1
            cumulative = cumulative + powered[scales[included]]
        if included == len(scales):
            continue
        mask = _set_mask(A, level, grid, sets)
        measure = _set_measure(A, level, grid, sets)
        stride = _stride(_minor_width(A, level, sets), grid, density)
        best = max(best, _best_average(cumulative, mask, stride, measure))
    return float(np.exp(peak) * best ** (1.0 / q))


def tl_norm_pinf(
    f: SampledField,
    A: ExpansiveMatrix,
    prof: FourierProfile,
    params: TLParams,
    density: int = DEFAULT_LATTICE_DENSITY,
    sets: AverageSets = "ellipsoid",
    workers: int = 1,
) -> float:
    """The p = ∞, q < ∞ quasi-norm as a supremum of averages over A^ℓΩ_A + w (or A^ℓ[0,1]^d + w)."""
    if math.isinf(params.q):
        raise ValueError("tl_norm_pinf needs q < inf; use tl_norm_pinf_qinf")
    ensure_profile_matrix(A, prof)
    magnitudes = scale_magnitudes(f, prof, params, workers)
    return average_norm(log_terms(magnitudes, A, params.alpha), A, f.grid, params.q, density, sets)


def tl_norm_pinf_qinf(
    f: SampledField, A: ExpansiveMatrix, prof: FourierProfile, params: TLParams, workers: int = 1
) -> float:
    """sup_i |det A|^{αi} ‖f ∗ φ_i‖_{L^∞}."""
    ensure_profile_matrix(A, prof)
    magnitudes = scale_magnitudes(f, prof, params, workers)
    return lp_lq_norm(log_terms(magnitudes, A, params.alpha), f.grid, math.inf, math.inf)


def tl_norm_pinf_qinf_average(
    f: SampledField,
    A: ExpansiveMatrix,
    prof: FourierProfile,
    params: TLParams,
    density: int = DEFAULT_LATTICE_DENSITY,
    workers: int = 1,
) -> float:
    """The averaged p = q = ∞ definition sup_{ℓ,w} sup_{i≥-ℓ} mean over A^ℓΩ+w of |det A|^{αi}|f ∗ φ_i|."""
    ensure_profile_matrix(A, prof)
    magnitudes = scale_magnitudes(f, prof, params, workers)
    return average_norm(log_terms(magnitudes, A, params.alpha), A, f.grid, math.inf, density)


def norm_value(
    f: SampledField, A: ExpansiveMatrix, prof: FourierProfile, params: TLParams, workers: int = 1
) -> float:
    """Dispatch to the branch matching (p, q)."""
    if not math.isinf(params.p):
        return tl_norm(f, A, prof, params, workers)
    if not math.isinf(params.q):
        return tl_norm_pinf(f, A, prof, params, workers=workers)
    return tl_norm_pinf_qinf(f, A, prof, params, workers)


def r_triangle_defect(
    f: SampledField, g: SampledField, A: ExpansiveMatrix, prof: FourierProfile, params: TLParams
) -> float:
    """‖f+g‖^r − ‖f‖^r − ‖g‖^r with r = min(p, q, 1); nonpositive for a quasi-norm of this kind."""
    r = params.r_exponent
    joint = norm_value(f + g, A, prof, params)
    return float(joint**r - norm_value(f, A, prof, params) ** r - norm_value(g, A, prof, params) ** r)
