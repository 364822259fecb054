"""Settings and cached building blocks shared by the experiments."""

import logging
import math
from dataclasses import asdict, dataclass, replace
from functools import lru_cache
from typing import Any

import numpy as np

from ..constants import (
    DEFAULT_COVER_BAND,
    DEFAULT_LATTICE_DENSITY,
    EXPONENT_TOL,
    POU_TOL,
    RATIO_CAP,
    STABILITY_TOL,
)
from ..covers.annulus import AnnularCover
from ..covers.bump import ProfileShape
from ..covers.grids import FrequencyGrid
from ..covers.profiles import FourierProfile, build_analyzing_profile
from ..exceptions import GridResolutionError
from ..linalg.models import ExpansiveMatrix
from ..tlnorm.fields import SampledField, TLParams
from ..tlnorm.norms import norm_value, tl_norm_pinf

logger = logging.getLogger(__name__)

# frequency box around the outer gauge radius of Q
_PROFILE_BOX_FACTOR = 1.25
_PROFILE_POINTS = {1: (64, 128, 256, 512, 1024), 2: (64, 128, 256, 512), 3: (64, 128)}


@dataclass(frozen=True)
class ExperimentSettings:
    """Grid, profile and tolerance choices of one experiment run."""

    n_per_axis: int = 256
    shape: ProfileShape = ProfileShape()
    theta: float | None = None
    band: int = DEFAULT_COVER_BAND
    pou_tol: float = POU_TOL
    ratio_cap: float = RATIO_CAP
    stability_tol: float = STABILITY_TOL
    exponent_tol: float = EXPONENT_TOL
    lattice_density: int = DEFAULT_LATTICE_DENSITY
    seed: int = 0
    workers: int = 1

    def refined(self, factor: int = 2) -> "ExperimentSettings":
        return replace(self, n_per_axis=self.n_per_axis * factor)

    def to_record(self) -> dict[str, Any]:
        return asdict(self)


@lru_cache(maxsize=32)
def _cached_profile(
    A: ExpansiveMatrix, shape: ProfileShape, theta: float | None, band: int, pou_tol: float
) -> FourierProfile:
    cover = AnnularCover.for_matrix(A, shape, theta)
    reach = float(np.max(cover.gauge.bounding_half_widths(scale=math.exp(cover.log_outer))))
    sizes = _PROFILE_POINTS.get(A.dim, (64,))
    for n in sizes:
        grid = FrequencyGrid(A.dim, _PROFILE_BOX_FACTOR * reach, n)
        try:
            return build_analyzing_profile(A, grid, shape, theta, band, pou_tol)
        except GridResolutionError as e:
            if n == sizes[-1]:
                raise
            logger.debug(f"profile grid with n={n} rejected: {e}")
    raise AssertionError("unreachable")


def analyzing_profile(A: ExpansiveMatrix, settings: ExperimentSettings) -> FourierProfile:
    """The certified analyzing profile of A, on the smallest frequency grid that resolves its annulus."""
    return _cached_profile(A, settings.shape, settings.theta, settings.band, settings.pou_tol)


def measure(
    f: SampledField, A: ExpansiveMatrix, prof: FourierProfile, params: TLParams, settings: ExperimentSettings
) -> float:
    """‖f‖ in Ḟ^α_{p,q}(A), with the tent-average branch for p = ∞ > q."""
    if math.isinf(params.p) and not math.isinf(params.q):
        return tl_norm_pinf(f, A, prof, params, density=settings.lattice_density, workers=settings.workers)
    return norm_value(f, A, prof, params, settings.workers)


def envelope(values: list[float]) -> float:
    """max / min of positive values; infinite when the list holds a zero."""
    low = min(values)
    return math.inf if low <= 0 else max(values) / low


def relative_change(before: float, after: float) -> float:
    return abs(after - before) / abs(before) if before else math.inf


def params_record(alpha: float, p: float, q: float) -> dict[str, Any]:
    return {"alpha": alpha, "p": p, "q": q}
