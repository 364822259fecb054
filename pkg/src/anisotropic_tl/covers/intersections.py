"""Intersection index sets of two families of dilated annuli.

(A*)^i Q meets (B*)^j P exactly when some u with α_A < |u|² < β_A has α_B < |Ku|² < β_B, where
K = L_B (B*)^{-j} (A*)^i L_A^{-1} √(c_A/c_B) maps normalized A-gauge coordinates to normalized B-gauge
coordinates. Along a direction with |Ku|²/|u|² = κ this needs κ ∈ (α_B/β_A, β_B/α_A), and κ sweeps the
whole interval [σ_min², σ_max²] of K. The test is therefore exact and grid free.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..utils import parallel_map
from .annulus import AnnularCover

logger = logging.getLogger(__name__)

# extra j range on each side beyond the spectral estimate
_J_PAD = 4


@dataclass
class IndexSets:
    """J(i) = {j : (A*)^iQ ∩ (B*)^jP ≠ ∅} and its transpose I(j)."""

    i_range: tuple[int, int]
    j_range: tuple[int, int]
    J: dict[int, list[int]] = field(default_factory=dict)
    I: dict[int, list[int]] = field(default_factory=dict)  # noqa: E741

    def max_J(self) -> int:
        return max((len(js) for js in self.J.values()), default=0)

    def max_I(self, interior: bool = True) -> int:
        """max_j |I(j)|; with ``interior`` only j whose I(j) stays off the ends of i_range count."""
        lo, hi = self.i_range
        sizes = [len(i_s) for i_s in self.I.values() if i_s and (not interior or (i_s[0] > lo and i_s[-1] < hi))]
        return max(sizes, default=0)

    def to_record(self) -> dict[str, object]:
        return {
            "i_range": list(self.i_range),
            "j_range": list(self.j_range),
            "J": {str(i): js for i, js in self.J.items()},
            "I": {str(j): i_s for j, i_s in self.I.items()},
            "maxJ": self.max_J(),
            "maxI": self.max_I(),
        }


def _normalizer(cover: AnnularCover) -> tuple[np.ndarray, np.ndarray]:
    scale = 1.0 / np.sqrt(cover.gauge.level)
    return cover.gauge.cholesky_upper * scale, cover.gauge.cholesky_upper_inv / scale


def singular_bounds(
    cover_a: AnnularCover, i: int, cover_b: AnnularCover, js: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(σ_min², σ_max²) of the coordinate change K_{ij} for every j in ``js``."""
    to_a, from_a = _normalizer(cover_a)
    to_b, from_b = _normalizer(cover_b)
    a_pos = cover_a.adjoint.power(i)
    a_neg = cover_a.adjoint.power(-i)
    forward = np.stack([to_b @ cover_b.adjoint.power(-int(j)) @ a_pos @ from_a for j in js])
    backward = np.stack([to_a @ a_neg @ cover_b.adjoint.power(int(j)) @ from_b for j in js])
    with np.errstate(over="ignore", invalid="ignore"):
        sigma_max = np.linalg.svd(forward, compute_uv=False)[:, 0]
        sigma_min = 1.0 / np.linalg.svd(backward, compute_uv=False)[:, 0]
    return sigma_min**2, sigma_max**2


def _meets_row(cover_a: AnnularCover, i: int, cover_b: AnnularCover, js: np.ndarray) -> np.ndarray:
    alpha_a, beta_a = cover_a.squared_radii
    alpha_b, beta_b = cover_b.squared_radii
    low, high = singular_bounds(cover_a, i, cover_b, js)
    return np.asarray((low < beta_b / alpha_a) & (high > alpha_b / beta_a))


def default_j_range(cover_a: AnnularCover, cover_b: AnnularCover, i_range: tuple[int, int]) -> tuple[int, int]:
    """j range containing every J(i), estimated from the eigenvalue moduli and padded."""
    a_lo, a_hi = (math.log(m) for m in (min(cover_a.matrix.eig_moduli), max(cover_a.matrix.eig_moduli)))
    b_lo, b_hi = (math.log(m) for m in (min(cover_b.matrix.eig_moduli), max(cover_b.matrix.eig_moduli)))
    ends = [i * a / b for i in i_range for a in (a_lo, a_hi) for b in (b_lo, b_hi)]
    pad = _J_PAD + math.ceil(0.25 * max(abs(i) for i in i_range))
    return math.floor(min(ends)) - pad, math.ceil(max(ends)) + pad


def intersection_sets(
    cover_a: AnnularCover,
    cover_b: AnnularCover,
    i_range: tuple[int, int],
    j_range: tuple[int, int] | None = None,
    workers: int = 1,
) -> IndexSets:
    """Compute J(i) for i in ``i_range`` and I(j) from the same relation.

    Without an explicit ``j_range`` the range is estimated and widened until no J(i) touches its ends.

    Raises:
        ValueError: If a range is empty or the covers act on different dimensions
    """
    if cover_a.dim != cover_b.dim:
        raise ValueError("covers act on different dimensions")
    if i_range[0] > i_range[1] or (j_range is not None and j_range[0] > j_range[1]):
        raise ValueError(f"empty range: i {i_range}, j {j_range}")

    explicit = j_range is not None
    j_lo, j_hi = j_range if j_range is not None else default_j_range(cover_a, cover_b, i_range)
    indices = list(range(i_range[0], i_range[1] + 1))
    while True:
        js = np.arange(j_lo, j_hi + 1)
        rows = parallel_map(lambda i: _meets_row(cover_a, i, cover_b, js), indices, workers)
        relation = np.stack(rows)
        if explicit or not (relation[:, 0].any() or relation[:, -1].any()):
            break
        width = j_hi - j_lo
        logger.debug(f"J(i) touches the j range [{j_lo}, {j_hi}], widening")
        j_lo, j_hi = j_lo - width // 2 - 1, j_hi + width // 2 + 1

    sets = IndexSets(i_range=i_range, j_range=(j_lo, j_hi))
    for row, i in enumerate(indices):
        sets.J[i] = [int(j) for j in js[relation[row]]]
    for col, j in enumerate(js):
        members = [indices[row] for row in np.flatnonzero(relation[:, col])]
        if members:
            sets.I[int(j)] = members
    logger.debug(f"intersection sets over i in {i_range}: max|J| {sets.max_J()}, max|I| {sets.max_I()}")
    return sets


def neighbor_bound(cover: AnnularCover, i_range: tuple[int, int] = (-5, 5)) -> int:
    """Smallest N with N_i = {k : (A*)^iQ ∩ (A*)^kQ ≠ ∅} ⊆ [i − N, i + N].

    Computed at i = 0 and checked to be translation invariant at three more indices from ``i_range``.
    """
    reach = 2 * cover.window + 2
    ks = np.arange(-reach, reach + 1)
    base = ks[_meets_row(cover, 0, cover, ks)]
    bound = int(np.max(np.abs(base)))

    candidates = [i_range[0], i_range[1], (i_range[0] + i_range[1]) // 2, 3, -3]
    trial_scales = list(dict.fromkeys(i for i in candidates if i != 0))[:3]
    for i in trial_scales:
        shifted = ks + i
        neighbors = shifted[_meets_row(cover, i, cover, shifted)] - i
        if not np.array_equal(neighbors, base):
            raise RuntimeError(f"neighbor set at i={i} differs from i=0: {neighbors.tolist()} vs {base.tolist()}")
    return bound


def cell_ball(
    cover_a: AnnularCover,
    i: int,
    cover_b: AnnularCover | None = None,
    j: int | None = None,
    centered: bool = False,
) -> tuple[np.ndarray, float] | None:
    """A ball B_r(η) inside (A*)^iQ, or inside (A*)^iQ ∩ (B*)^jP when a second cover is given.

    With ``centered`` the centre sits at the middle of the log-gauge range of (A*)^iQ whenever that
    keeps at least a quarter of the best radius. Returns None when the two dilates do not meet.
    """
    alpha_a, beta_a = cover_a.squared_radii
    middle = float((alpha_a * beta_a) ** 0.25)
    _, from_a = _normalizer(cover_a)
    lip_a = cover_a.lipschitz(i)
    a_pos = cover_a.adjoint.power(i)

    if cover_b is None or j is None:
        # largest Lipschitz margin sits at the arithmetic midpoint of the gauge radii
        s = middle if centered else 0.5 * (np.sqrt(alpha_a) + np.sqrt(beta_a))
        direction = np.zeros(cover_a.dim)
        direction[0] = 1.0
        eta = a_pos @ (from_a @ (s * direction))
        return eta, float(min(s - np.sqrt(alpha_a), np.sqrt(beta_a) - s) / lip_a)

    alpha_b, beta_b = cover_b.squared_radii
    kappa_lo, kappa_hi = singular_bounds(cover_a, i, cover_b, np.array([j]))
    low = max(float(kappa_lo[0]), alpha_b / beta_a)
    high = min(float(kappa_hi[0]), beta_b / alpha_a)
    if low >= high:
        return None
    kappa = float(np.sqrt(low * high))

    kernel = _normalizer(cover_b)[0] @ cover_b.adjoint.power(-j) @ a_pos @ from_a
    _, singular, vt = np.linalg.svd(kernel)
    v_max, v_min = vt[0], vt[-1]
    s_max2, s_min2 = singular[0] ** 2, singular[-1] ** 2
    if s_max2 - s_min2 <= 0:
        u = v_max
    else:
        weight = np.clip((kappa - s_min2) / (s_max2 - s_min2), 0.0, 1.0)
        u = np.sqrt(1.0 - weight) * v_min + np.sqrt(weight) * v_max
    kappa = float(np.sum((kernel @ u) ** 2))

    lip_b = cover_b.lipschitz(j)
    root_k = np.sqrt(kappa)
    # margins in s: (s - √α_A)/ℓ_A, (√β_A - s)/ℓ_A, (√κ s - √α_B)/ℓ_B, (√β_B - √κ s)/ℓ_B
    rising = [(1.0 / lip_a, -np.sqrt(alpha_a) / lip_a), (root_k / lip_b, -np.sqrt(alpha_b) / lip_b)]
    falling = [(-1.0 / lip_a, np.sqrt(beta_a) / lip_a), (-root_k / lip_b, np.sqrt(beta_b) / lip_b)]
    lines = rising + falling

    def margin(s: float) -> float:
        return min(slope * s + offset for slope, offset in lines)

    candidates = [(o2 - o1) / (s1 - s2) for s1, o1 in rising for s2, o2 in falling]
    s = max(candidates, key=margin)
    if centered and margin(middle) >= 0.25 * margin(s):
        s = middle
    radius = margin(s)
    if radius <= 0:
        return None
    eta = a_pos @ (from_a @ (s * u))
    return eta, float(radius)
