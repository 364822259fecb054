"""Dilated cubes D = A^i([0,1]^d + k) and finitely supported sequences over them."""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..linalg.models import ExpansiveMatrix


@dataclass(frozen=True, order=True)
class DilatedCube:
    """D = A^i([0,1]^d + k); the matrix is supplied by the sequence the cube belongs to."""

    scale: int
    offset: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.offset)

    def measure(self, A: ExpansiveMatrix) -> float:
        """m(D) = |det A|^scale."""
        return math.exp(self.scale * A.log_det)

    def corners(self, A: ExpansiveMatrix) -> np.ndarray:
        """The 2^d vertices of D, one per row."""
        unit = np.array(list(itertools.product((0.0, 1.0), repeat=self.dim)))
        return (unit + np.asarray(self.offset, dtype=float)) @ A.power(self.scale).T

    def translate(self, shift: tuple[int, ...]) -> "DilatedCube":
        return DilatedCube(self.scale, tuple(k + n for k, n in zip(self.offset, shift, strict=True)))


@dataclass
class CubeSequence:
    """Complex coefficients c_D on finitely many dilated cubes of one matrix.

    Zero coefficients are dropped on construction, so ``support`` holds exactly the nonzero entries.
    """

    matrix: ExpansiveMatrix
    coefficients: dict[DilatedCube, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for cube in self.coefficients:
            if cube.dim != self.matrix.dim:
                raise ValueError(f"cube {cube} does not match dimension {self.matrix.dim}")
        self.coefficients = {cube: complex(c) for cube, c in sorted(self.coefficients.items()) if c != 0}

    @property
    def support(self) -> list[DilatedCube]:
        return list(self.coefficients)

    @property
    def scale_bounds(self) -> tuple[int, int] | None:
        if not self.coefficients:
            return None
        scales = [cube.scale for cube in self.coefficients]
        return min(scales), max(scales)

    def __len__(self) -> int:
        return len(self.coefficients)

    def magnitudes(self) -> np.ndarray:
        """|c_D| in support order."""
        return np.array([abs(c) for c in self.coefficients.values()])

    def measures(self) -> np.ndarray:
        return np.array([cube.measure(self.matrix) for cube in self.coefficients])

    def scaled(self, factor: complex) -> "CubeSequence":
        return CubeSequence(self.matrix, {cube: factor * c for cube, c in self.coefficients.items()})

    def pairing(self, other: "CubeSequence") -> complex:
        """Σ_D c_D conj(c′_D)."""
        shared = [cube for cube in self.coefficients if cube in other.coefficients]
        return complex(sum(self.coefficients[cube] * other.coefficients[cube].conjugate() for cube in shared))


def random_sequence(
    A: ExpansiveMatrix,
    n_cubes: int,
    rng: np.random.Generator,
    scales: tuple[int, int] = (-2, 1),
    spread: int = 1,
) -> CubeSequence:
    """Up to ``n_cubes`` distinct cubes clustered near the origin, with complex Gaussian coefficients."""
    coefficients: dict[DilatedCube, complex] = {}
    for _ in range(n_cubes):
        scale = int(rng.integers(scales[0], scales[1] + 1))
        # cubes of every scale land in the box A^{scales[1]}[-spread, spread]^d
        reach = A.power(scales[1] - scale)
        box = np.ceil(spread * np.abs(reach).sum(axis=1)).astype(np.int64)
        offset = tuple(int(k) for k in rng.integers(-box, box + 1))
        coefficients[DilatedCube(scale, offset)] = complex(rng.standard_normal(), rng.standard_normal())
    return CubeSequence(A, coefficients)
