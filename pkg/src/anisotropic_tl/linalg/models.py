"""Data models for certified dilation matrices and their ellipsoids."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import gammaln


@dataclass(frozen=True, eq=False)
class ExpansiveMatrix:
    """A real invertible matrix whose eigenvalues all have modulus > 1."""

    entries: np.ndarray = field(repr=False)
    det_abs: float
    eig_moduli: tuple[float, ...]

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @property
    def log_det(self) -> float:
        return float(np.log(self.det_abs))

    @cached_property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.entries)

    @cached_property
    def transpose(self) -> "ExpansiveMatrix":
        """The adjoint A* (real transpose); same spectrum, same determinant."""
        return ExpansiveMatrix(entries=self.entries.T.copy(), det_abs=self.det_abs, eig_moduli=self.eig_moduli)

    @cached_property
    def powers(self) -> "MatrixPowers":
        return MatrixPowers(self.entries, self.inverse)

    def power(self, k: int) -> np.ndarray:
        """A^k for any integer k (negative powers use the cached inverse)."""
        return self.powers.get(k)

    def to_record(self) -> dict[str, object]:
        return {
            "entries": self.entries.tolist(),
            "det_abs": self.det_abs,
            "eig_moduli": list(self.eig_moduli),
        }


class MatrixPowers:
    """Memoized integer powers of one matrix."""

    def __init__(self, matrix: np.ndarray, inverse: np.ndarray):
        self._matrix = matrix
        self._inverse = inverse
        self._cache: dict[int, np.ndarray] = {0: np.eye(matrix.shape[0])}

    def get(self, k: int) -> np.ndarray:
        k = int(k)
        cached = self._cache.get(k)
        if cached is None:
            base = self._matrix if k > 0 else self._inverse
            with np.errstate(over="ignore", invalid="ignore"):
                cached = np.array(np.linalg.matrix_power(base, abs(k)), dtype=float)
            cached.setflags(write=False)
            self._cache[k] = cached
        return cached


@dataclass(frozen=True)
class DilationExponents:
    """Bounds λ₋ < min|λ| and λ₊ > max|λ| with their logarithmic exponents."""

    lambda_minus: float
    lambda_plus: float
    zeta_minus: float
    zeta_plus: float


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """Volume-one ellipsoid Ω = {x : xᵀSx < c} with Ω ⊆ rΩ ⊆ AΩ."""

    form: np.ndarray = field(repr=False)
    level: float
    r: float
    theta: float

    @property
    def dim(self) -> int:
        return int(self.form.shape[0])

    @cached_property
    def cholesky_upper(self) -> np.ndarray:
        """Upper factor L with S = LᵀL."""
        return np.linalg.cholesky(self.form).T

    @cached_property
    def cholesky_upper_inv(self) -> np.ndarray:
        return np.linalg.inv(self.cholesky_upper)

    def quadratic(self, points: np.ndarray) -> np.ndarray:
        """xᵀSx for each row of ``points``."""
        pts = np.atleast_2d(points)
        return np.einsum("ij,jk,ik->i", pts, self.form, pts)

    def gauge(self, points: np.ndarray) -> np.ndarray:
        """Normalized gauge (xᵀSx / c)^{1/2}; Ω is the open unit gauge ball."""
        return np.sqrt(self.quadratic(points) / self.level)

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.quadratic(points) < self.level

    def volume(self) -> float:
        d = self.dim
        log_unit_ball = 0.5 * d * np.log(np.pi) - gammaln(0.5 * d + 1.0)
        sign, logdet = np.linalg.slogdet(self.form)
        return float(np.exp(0.5 * d * np.log(self.level) + log_unit_ball - 0.5 * logdet))

    def semi_axes(self) -> np.ndarray:
        """Semi-axis lengths in ascending order."""
        eigs = np.linalg.eigvalsh(self.form)
        return np.sort(np.sqrt(self.level / eigs))

    def bounding_half_widths(self, transform: np.ndarray | None = None, scale: float = 1.0) -> np.ndarray:
        """Per-axis half widths of the box around ``scale · transform(Ω)``.

        For the ellipsoid {y : yᵀMy < C} the half width along axis j is sqrt(C (M⁻¹)_jj); with
        y = T x this gives M⁻¹ = T S⁻¹ Tᵀ.
        """
        inv_form = np.linalg.inv(self.form)
        if transform is not None:
            inv_form = transform @ inv_form @ transform.T
        return scale * np.sqrt(self.level * np.diag(inv_form))

    def to_record(self) -> dict[str, object]:
        return {"S": self.form.tolist(), "c": self.level, "r": self.r, "theta": self.theta}
