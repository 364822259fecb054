"""Gauge annuli and their dilates under the adjoint of an expansive matrix."""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..linalg.expansive import build_ellipsoid, contraction_norm
from ..linalg.models import Ellipsoid, ExpansiveMatrix
from .bump import ProfileShape

logger = logging.getLogger(__name__)

# hard stop for scale scans around a frequency ball
_SCAN_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class AnnularCover:
    """Q = {ξ : t_in < ln‖ξ‖_* < t_out} in the gauge of Ω_{A*}, together with its dilates (A*)^i Q.

    ``matrix`` is A; every dilation here uses A* = Aᵀ.
    """

    matrix: ExpansiveMatrix
    gauge: Ellipsoid = field(repr=False)
    log_inner: float
    log_outer: float
    growth: float
    log_contraction: float

    @classmethod
    def for_matrix(cls, A: ExpansiveMatrix, shape: ProfileShape, theta: float | None = None) -> "AnnularCover":
        adjoint = A.transpose
        gauge = build_ellipsoid(adjoint, theta)
        growth = float(np.log(contraction_norm(adjoint, gauge, power=1)))
        log_contraction = float(-np.log(contraction_norm(adjoint, gauge, power=-1)))
        return cls(
            matrix=A,
            gauge=gauge,
            log_inner=shape.support_inner * growth,
            log_outer=shape.support_outer * growth,
            growth=growth,
            log_contraction=log_contraction,
        )

    @property
    def adjoint(self) -> ExpansiveMatrix:
        return self.matrix.transpose

    @property
    def dim(self) -> int:
        return self.matrix.dim

    @property
    def squared_radii(self) -> tuple[float, float]:
        """(α, β): Q is α < ‖ξ‖_*² < β."""
        return float(np.exp(2.0 * self.log_inner)), float(np.exp(2.0 * self.log_outer))

    @property
    def window(self) -> int:
        """W such that ĥ((A*)^m y) ≠ 0 and ĥ(y) ≠ 0 force |m| ≤ W."""
        return math.ceil((self.log_outer - self.log_inner) / self.log_contraction) + 1

    @property
    def term_window(self) -> int:
        """Half-width of the dilation range meeting Q from a point of the unit gauge shell."""
        span = max(self.log_outer, self.growth) - min(self.log_inner, 0.0)
        return math.ceil(span / self.log_contraction) + 1

    @cached_property
    def rho_bounds(self) -> tuple[float, float]:
        """(r_in, r_out) with Q ⊆ {r_in ≤ ρ_{A*} ≤ r_out}."""
        outer = math.ceil(self.log_outer / self.log_contraction)
        inner = max(0, math.ceil(-self.log_inner / self.log_contraction))
        det = self.matrix.det_abs
        return float(det ** (-inner)), float(det ** (outer - 1))

    def to_base(self, points: np.ndarray, index: int) -> np.ndarray:
        """(A*)^{-index} applied to each row."""
        return np.atleast_2d(points) @ self.adjoint.power(-index).T

    def log_gauge(self, points: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 0.5 * np.log(self.gauge.quadratic(points) / self.gauge.level)

    def contains(self, points: np.ndarray, index: int = 0) -> np.ndarray:
        t = self.log_gauge(self.to_base(points, index))
        return (t > self.log_inner) & (t < self.log_outer)

    def lipschitz(self, index: int) -> float:
        """Lipschitz constant of ξ ↦ ‖(A*)^{-index} ξ‖_* in the Euclidean metric."""
        upper = self.gauge.cholesky_upper @ self.adjoint.power(-index)
        return float(np.linalg.norm(upper, 2) / np.sqrt(self.gauge.level))

    def ball_margin(self, eta: np.ndarray, index: int) -> float:
        """Radius of a ball around η certified inside (A*)^{index} Q (nonpositive when none is)."""
        g = float(np.exp(self.log_gauge(self.to_base(eta, index))[0]))
        slack = min(np.exp(self.log_outer) - g, g - np.exp(self.log_inner))
        return float(slack / self.lipschitz(index))

    def sample_points(self, n: int, rng: np.random.Generator, index: int = 0) -> np.ndarray:
        """Points of (A*)^{index} Q: uniform gauge direction, log-uniform gauge radius."""
        directions = rng.standard_normal((n, self.dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        unit = np.sqrt(self.gauge.level) * directions @ self.gauge.cholesky_upper_inv.T
        radii = np.exp(rng.uniform(self.log_inner, self.log_outer, size=n))
        return (unit * radii[:, None]) @ self.adjoint.power(index).T

    def scales_meeting_ball(self, eta: np.ndarray, delta: float) -> list[int]:
        """All i for which (A*)^i Q may meet the closed ball B_δ(η), a certified superset.

        Raises:
            ValueError: If the ball reaches the origin in gauge terms
        """
        eta = np.asarray(eta, dtype=float)
        spread = delta * self.lipschitz(0)
        center = float(np.exp(self.log_gauge(eta)[0]))
        low, high = center - spread, center + spread
        if low <= 0:
            raise ValueError(f"ball of radius {delta:.3g} around a frequency of gauge {center:.3g} reaches the origin")

        t_out, t_in = np.exp(self.log_outer), np.exp(self.log_inner)
        contraction = np.exp(self.log_contraction)
        scales = []
        for index in range(0, _SCAN_LIMIT):
            # gauges on (A*)^{-index} B stay below high · r^{-index}
            if high / contraction**index <= t_in:
                break
            if self._meets(eta, delta, index):
                scales.append(index)
        for index in range(-1, -_SCAN_LIMIT, -1):
            if low * contraction ** (-index) >= t_out:
                break
            if self._meets(eta, delta, index):
                scales.append(index)
        return sorted(scales)

    def _meets(self, eta: np.ndarray, delta: float, index: int) -> bool:
        g = float(np.exp(self.log_gauge(self.to_base(eta, index))[0]))
        spread = delta * self.lipschitz(index)
        return g + spread > np.exp(self.log_inner) and g - spread < np.exp(self.log_outer)
