"""Step homogeneous quasi-norm ρ_A and its sampled property checks."""

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from ..constants import SCALE_BRACKET_LIMIT
from ..exceptions import ScaleBracketError
from ..linalg.expansive import build_ellipsoid
from ..linalg.models import DilationExponents, Ellipsoid, ExpansiveMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StepQuasiNorm:
    """ρ_A(x) = |det A|^i on the shell A^{i+1}Ω \\ A^iΩ, and 0 at the origin."""

    matrix: ExpansiveMatrix
    ellipsoid: Ellipsoid = field(repr=False)

    @classmethod
    def for_matrix(cls, A: ExpansiveMatrix, theta: float | None = None) -> "StepQuasiNorm":
        return cls(matrix=A, ellipsoid=build_ellipsoid(A, theta))

    def _member(self, points: np.ndarray, scales: np.ndarray) -> np.ndarray:
        """x ∈ A^iΩ  ⇔  (A^{-i}x)ᵀ S (A^{-i}x) < c, evaluated row by row."""
        inside = np.empty(points.shape[0], dtype=bool)
        for scale in np.unique(scales):
            rows = scales == scale
            with np.errstate(over="ignore", invalid="ignore"):
                mapped = points[rows] @ self.matrix.power(-int(scale)).T
                quad = self.ellipsoid.quadratic(mapped)
            if np.any(np.isnan(quad)):
                raise ScaleBracketError(f"non-finite quadratic form at scale {int(scale)}")
            inside[rows] = quad < self.ellipsoid.level
        return inside

    def scale_indices(self, points: ArrayLike) -> np.ndarray:
        """Scale index of every row of ``points`` (all rows must be nonzero).

        Exponential bracketing followed by bisection over the nested sets A^iΩ; the answer is the
        largest i with x ∉ A^iΩ.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.matrix.dim:
            raise ValueError(f"points have dimension {pts.shape[1]}, matrix has {self.matrix.dim}")
        if np.any(np.all(pts == 0.0, axis=1)):
            raise ValueError("scale index is undefined at the origin")

        n = pts.shape[0]
        inside_zero = self._member(pts, np.zeros(n, dtype=np.int64))
        # invariant: lo is never a member, hi always is
        lo = np.where(inside_zero, -1, 0).astype(np.int64)
        hi = np.where(inside_zero, 0, 1).astype(np.int64)
        step = np.ones(n, dtype=np.int64)

        pending = np.ones(n, dtype=bool)
        while np.any(pending):
            idx = np.flatnonzero(pending)
            downward = inside_zero[idx]
            trial = np.where(downward, lo[idx], hi[idx])
            if np.any(np.abs(trial) > SCALE_BRACKET_LIMIT):
                raise ScaleBracketError(f"scale bracketing left |i| <= {SCALE_BRACKET_LIMIT}")
            member = self._member(pts[idx], trial)

            grow_down = downward & member
            grow_up = ~downward & ~member
            step[idx] = np.where(grow_down | grow_up, step[idx] * 2, step[idx])
            hi[idx] = np.where(grow_down, lo[idx], hi[idx])
            lo[idx] = np.where(grow_down, hi[idx] - step[idx], lo[idx])
            lo[idx] = np.where(grow_up, hi[idx], lo[idx])
            hi[idx] = np.where(grow_up, lo[idx] + step[idx], hi[idx])
            pending[idx] = grow_down | grow_up

        while True:
            open_rows = np.flatnonzero(hi - lo > 1)
            if open_rows.size == 0:
                break
            mid = (lo[open_rows] + hi[open_rows]) // 2
            member = self._member(pts[open_rows], mid)
            hi[open_rows] = np.where(member, mid, hi[open_rows])
            lo[open_rows] = np.where(member, lo[open_rows], mid)

        return lo

    def scale_index(self, x: ArrayLike) -> int:
        return int(self.scale_indices(np.asarray(x, dtype=float)[None, :])[0])

    def rho_values(self, points: ArrayLike) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        values = np.zeros(pts.shape[0])
        nonzero = ~np.all(pts == 0.0, axis=1)
        if np.any(nonzero):
            values[nonzero] = self.matrix.det_abs ** self.scale_indices(pts[nonzero]).astype(float)
        return values

    def rho(self, x: ArrayLike) -> float:
        return float(self.rho_values(np.asarray(x, dtype=float)[None, :])[0])


def scale_index(q: StepQuasiNorm, x: ArrayLike) -> int:
    return q.scale_index(x)


def rho(q: StepQuasiNorm, x: ArrayLike) -> float:
    return q.rho(x)


def sample_shell_points(q: StepQuasiNorm, n: int, rng: np.random.Generator, scale_range: int = 20) -> np.ndarray:
    """Points log-uniform over scales: x = A^i z with i uniform in [-scale_range, scale_range], z ∈ AΩ \\ Ω.

    z is drawn uniformly from the shell by rejection from the bounding box of AΩ.
    """
    A = q.matrix
    half_widths = q.ellipsoid.bounding_half_widths(transform=A.entries)
    shell: list[np.ndarray] = []
    collected = 0
    while collected < n:
        batch = rng.uniform(-half_widths, half_widths, size=(max(64, 4 * (n - collected)), A.dim))
        in_outer = q.ellipsoid.contains(batch @ A.inverse.T)
        in_inner = q.ellipsoid.contains(batch)
        accepted = batch[in_outer & ~in_inner]
        shell.append(accepted)
        collected += accepted.shape[0]
    z = np.concatenate(shell)[:n]
    scales = rng.integers(-scale_range, scale_range + 1, size=n)
    points = np.empty_like(z)
    for scale in np.unique(scales):
        rows = scales == scale
        points[rows] = z[rows] @ A.power(int(scale)).T
    return points


def quasi_triangle_constant(q: StepQuasiNorm, n_samples: int, seed: int, scale_range: int = 20) -> float:
    """Empirical constant C in ρ(x+y) ≤ C(ρ(x) + ρ(y)), including the diagonal pairs y = x."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = np.random.default_rng(seed)
    x = sample_shell_points(q, n_samples, rng, scale_range)
    y = sample_shell_points(q, n_samples, rng, scale_range)
    x = np.concatenate([x, x])
    y = np.concatenate([y, x[:n_samples]])
    sums = x + y
    keep = ~np.all(sums == 0.0, axis=1)
    ratios = q.rho_values(sums[keep]) / (q.rho_values(x[keep]) + q.rho_values(y[keep]))
    estimate = float(np.max(ratios))
    logger.debug(f"quasi-triangle constant estimate {estimate:.4g} from {n_samples} pairs")
    return estimate


def equivalence_ratio(
    qa: StepQuasiNorm, qb: StepQuasiNorm, n_samples: int, seed: int, scale_range: int = 20
) -> tuple[float, float]:
    """Empirical (min, max) of ρ_B(x)/ρ_A(x) over points log-uniform in the scales of both norms."""
    if qa.matrix.dim != qb.matrix.dim:
        raise ValueError("quasi-norms act on different dimensions")
    rng = np.random.default_rng(seed)
    half = max(1, n_samples // 2)
    points = np.concatenate(
        [
            sample_shell_points(qa, half, rng, scale_range),
            sample_shell_points(qb, max(1, n_samples - half), rng, scale_range),
        ]
    )
    ratios = qb.rho_values(points) / qa.rho_values(points)
    return float(np.min(ratios)), float(np.max(ratios))


def expansive_consequence_constant(
    q: StepQuasiNorm, exponents: DilationExponents, n_samples: int, seed: int
) -> float:
    """Smallest C with C⁻¹ρ^{ζ₋} ≤ |x| ≤ Cρ^{ζ₊} for ρ ≥ 1 (exponents swapped for ρ ≤ 1) on a sample.

    Points have log-uniform Euclidean norm in [1e-4, 1e4] and uniform directions.
    """
    rng = np.random.default_rng(seed)
    d = q.matrix.dim
    directions = rng.standard_normal((n_samples, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = np.exp(rng.uniform(np.log(1e-4), np.log(1e4), size=n_samples))
    points = directions * radii[:, None]
    values = q.rho_values(points)

    big = values >= 1.0
    small = values <= 1.0
    bounds = [
        radii[big] / values[big] ** exponents.zeta_plus,
        values[big] ** exponents.zeta_minus / radii[big],
        radii[small] / values[small] ** exponents.zeta_minus,
        values[small] ** exponents.zeta_plus / radii[small],
    ]
    return float(max(np.max(b) for b in bounds if b.size))
