"""Overlap predicates, intersection volumes and cell decompositions for unions of dilated cubes.

Every piecewise-constant integrand over finitely many cubes is integrated on an arrangement: a list of
cells, each with its volume and the set of cubes containing it. For diagonal matrices the cubes are
boxes and the cells are exact products of intervals. In d = 2 a vertical-slab sweep is exact for any
matrix: no edges cross inside a slab, so every cell is a trapezoid whose area is the slab width times
its midline length. Other cases fall back to midpoint quadrature with an error estimate.
"""

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection

from ..constants import OVERLAP_TOL
from ..linalg.models import ExpansiveMatrix
from .models import DilatedCube

logger = logging.getLogger(__name__)

DEFAULT_MESH = 64


def is_diagonal(A: ExpansiveMatrix) -> bool:
    return not np.any(A.entries - np.diag(np.diag(A.entries)))


def halfspaces(A: ExpansiveMatrix, cube: DilatedCube) -> tuple[np.ndarray, np.ndarray]:
    """Unit-normal rows (G, h) with D = {x : Gx ≤ h}, from k ≤ A^{-i}x ≤ k + 1."""
    M = A.power(-cube.scale)
    k = np.asarray(cube.offset, dtype=float)
    G = np.vstack([M, -M])
    h = np.concatenate([k + 1.0, -k])
    norms = np.linalg.norm(G, axis=1)
    return G / norms[:, None], h / norms


def _box(A: ExpansiveMatrix, cube: DilatedCube) -> tuple[np.ndarray, np.ndarray]:
    corners = cube.corners(A)
    return corners.min(axis=0), corners.max(axis=0)


def _tolerance(A: ExpansiveMatrix, *cubes: DilatedCube) -> float:
    return OVERLAP_TOL * min(c.measure(A) for c in cubes) ** (1.0 / A.dim)


def chebyshev_ball(A: ExpansiveMatrix, cubes: list[DilatedCube]) -> tuple[np.ndarray, float] | None:
    """Centre and radius of the largest ball inside ∩ cubes; None when the intersection is empty."""
    rows, bounds = zip(*(halfspaces(A, c) for c in cubes), strict=True)
    G, h = np.vstack(rows), np.concatenate(bounds)
    d = A.dim
    result = linprog(
        c=np.concatenate([np.zeros(d), [-1.0]]),
        A_ub=np.hstack([G, np.ones((G.shape[0], 1))]),
        b_ub=h,
        bounds=[(None, None)] * d + [(0.0, None)],
        method="highs",
    )
    if result.status != 0:
        return None
    return result.x[:d], float(result.x[d])


def overlaps(A: ExpansiveMatrix, first: DilatedCube, second: DilatedCube) -> bool:
    """m(D ∩ D′) > 0; boundary contact does not count."""
    lo_a, hi_a = _box(A, first)
    lo_b, hi_b = _box(A, second)
    tol = _tolerance(A, first, second)
    if np.any(np.minimum(hi_a, hi_b) - np.maximum(lo_a, lo_b) <= tol):
        return False
    if is_diagonal(A):
        return True
    ball = chebyshev_ball(A, [first, second])
    return ball is not None and ball[1] > tol


def overlap_measure(A: ExpansiveMatrix, first: DilatedCube, second: DilatedCube) -> float:
    """m(D ∩ D′)."""
    if first == second:
        return first.measure(A)
    lo_a, hi_a = _box(A, first)
    lo_b, hi_b = _box(A, second)
    widths = np.minimum(hi_a, hi_b) - np.maximum(lo_a, lo_b)
    if np.any(widths <= 0):
        return 0.0
    if is_diagonal(A):
        return float(np.prod(widths))
    ball = chebyshev_ball(A, [first, second])
    if ball is None or ball[1] <= _tolerance(A, first, second):
        return 0.0
    G, h = zip(halfspaces(A, first), halfspaces(A, second), strict=True)
    spaces = np.hstack([np.vstack(G), -np.concatenate(h)[:, None]])
    vertices = HalfspaceIntersection(spaces, ball[0]).intersections
    return float(ConvexHull(vertices).volume)


def cubes_meeting(A: ExpansiveMatrix, cube: DilatedCube, scale: int) -> list[DilatedCube]:
    """All cubes of the given scale overlapping ``cube`` in positive measure."""
    image = cube.corners(A) @ A.power(-scale).T
    low = np.floor(image.min(axis=0)).astype(np.int64) - 1
    high = np.ceil(image.max(axis=0)).astype(np.int64) + 1
    candidates = (
        DilatedCube(scale, tuple(int(k) for k in offset))
        for offset in itertools.product(*(range(lo, hi + 1) for lo, hi in zip(low, high, strict=True)))
    )
    return [c for c in candidates if overlaps(A, cube, c)]


@dataclass
class Arrangement:
    """Cells of a union of cubes: ``members[c, m]`` says cube m contains cell c, of volume ``volumes[c]``."""

    members: np.ndarray
    volumes: np.ndarray
    exact: bool = True
    mesh_error: float = 0.0

    def sup_integral(self, weights: np.ndarray) -> float:
        """∫ sup_m w_m 1_{D_m}(x) dx for nonnegative weights."""
        if not self.volumes.size:
            return 0.0
        return float(self.volumes @ np.max(self.members * np.asarray(weights)[None, :], axis=1))

    def union_measure(self, selection: np.ndarray | None = None) -> float:
        """m(∪_{m ∈ selection} D_m); the whole union when ``selection`` is None."""
        if selection is None:
            return float(np.sum(self.volumes))
        return float(self.volumes @ np.any(self.members[:, selection], axis=1))

    def mask_volumes(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct membership bitmasks with their total volume (at most 62 cubes)."""
        n = self.members.shape[1]
        if n > 62:
            raise ValueError(f"bitmasks hold at most 62 cubes, got {n}")
        masks = self.members.astype(np.int64) @ (np.int64(1) << np.arange(n, dtype=np.int64))
        distinct, inverse = np.unique(masks, return_inverse=True)
        return distinct, np.bincount(inverse, weights=self.volumes)


def _box_arrangement(A: ExpansiveMatrix, cubes: list[DilatedCube]) -> Arrangement:
    boxes = [_box(A, c) for c in cubes]
    lows = np.array([b[0] for b in boxes])
    highs = np.array([b[1] for b in boxes])
    axis_members, axis_widths = [], []
    for axis in range(A.dim):
        points = np.unique(np.concatenate([lows[:, axis], highs[:, axis]]))
        widths = np.diff(points)
        mids = 0.5 * (points[:-1] + points[1:])
        keep = widths > OVERLAP_TOL * max(1.0, float(points[-1] - points[0]))
        mids, widths = mids[keep], widths[keep]
        axis_members.append((lows[None, :, axis] < mids[:, None]) & (mids[:, None] < highs[None, :, axis]))
        axis_widths.append(widths)
    members = axis_members[0]
    volumes = axis_widths[0]
    for inside, widths in zip(axis_members[1:], axis_widths[1:], strict=True):
        members = (members[:, None, :] & inside[None, :, :]).reshape(-1, len(cubes))
        volumes = (volumes[:, None] * widths[None, :]).ravel()
    occupied = np.any(members, axis=1)
    return Arrangement(members=members[occupied], volumes=volumes[occupied])


def _edges(A: ExpansiveMatrix, cubes: list[DilatedCube]) -> tuple[np.ndarray, np.ndarray]:
    """Start points and direction vectors of the four edges of each parallelogram, shape (n, 4, 2)."""
    unit = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    starts, directions = [], []
    for cube in cubes:
        P = A.power(cube.scale)
        vertices = (unit + np.asarray(cube.offset, dtype=float)) @ P.T
        starts.append(vertices)
        directions.append(np.roll(vertices, -1, axis=0) - vertices)
    return np.array(starts), np.array(directions)


def _crossings(starts: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """x-coordinates of proper crossings between any two edges."""
    P = starts.reshape(-1, 2)
    R = directions.reshape(-1, 2)
    cross = R[:, None, 0] * R[None, :, 1] - R[:, None, 1] * R[None, :, 0]
    offset = P[None, :, :] - P[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (offset[..., 0] * R[None, :, 1] - offset[..., 1] * R[None, :, 0]) / cross
        u = (offset[..., 0] * R[:, None, 1] - offset[..., 1] * R[:, None, 0]) / cross
    proper = (np.abs(cross) > 0) & (t > 0) & (t < 1) & (u > 0) & (u < 1)
    rows, _ = np.nonzero(proper)
    return P[rows, 0] + t[proper] * R[rows, 0]


def _sweep_arrangement(A: ExpansiveMatrix, cubes: list[DilatedCube]) -> Arrangement:
    starts, directions = _edges(A, cubes)
    xs = np.unique(np.concatenate([starts[..., 0].ravel(), _crossings(starts, directions)]))
    span = float(xs[-1] - xs[0])
    xs = xs[np.concatenate([[True], np.diff(xs) > OVERLAP_TOL * max(1.0, span)])]

    x0, dx = starts[..., 0], directions[..., 0]
    y0, dy = starts[..., 1], directions[..., 1]
    edge_low, edge_high = np.minimum(x0, x0 + dx), np.maximum(x0, x0 + dx)
    cells, volumes = [], []
    for left, right in zip(xs[:-1], xs[1:], strict=True):
        mid = 0.5 * (left + right)
        hit = (edge_low < mid) & (mid < edge_high)
        y = y0 + (mid - x0) / np.where(hit, dx, 1.0) * dy
        present = np.sum(hit, axis=1) >= 2
        if not np.any(present):
            continue
        low = np.where(present, np.min(np.where(hit, y, np.inf), axis=1), np.inf)
        high = np.where(present, np.max(np.where(hit, y, -np.inf), axis=1), -np.inf)
        ys = np.unique(np.concatenate([low[present], high[present]]))
        lengths = np.diff(ys)
        mids = 0.5 * (ys[:-1] + ys[1:])
        inside = (low[None, :] < mids[:, None]) & (mids[:, None] < high[None, :])
        occupied = np.any(inside, axis=1) & (lengths > 0)
        cells.append(inside[occupied])
        volumes.append((right - left) * lengths[occupied])
    if not cells:
        return Arrangement(members=np.zeros((0, len(cubes)), dtype=bool), volumes=np.zeros(0))
    return Arrangement(members=np.vstack(cells), volumes=np.concatenate(volumes))


def _mesh_cells(A: ExpansiveMatrix, cubes: list[DilatedCube], mesh: int) -> Arrangement:
    corners = np.vstack([c.corners(A) for c in cubes])
    low, high = corners.min(axis=0), corners.max(axis=0)
    step = (high - low) / mesh
    axes = [low[k] + step[k] * (np.arange(mesh) + 0.5) for k in range(A.dim)]
    points = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, A.dim)
    members = np.zeros((points.shape[0], len(cubes)), dtype=bool)
    for m, cube in enumerate(cubes):
        coords = points @ A.power(-cube.scale).T - np.asarray(cube.offset, dtype=float)
        members[:, m] = np.all((coords > 0) & (coords < 1), axis=1)
    occupied = np.any(members, axis=1)
    volumes = np.full(int(np.sum(occupied)), float(np.prod(step)))
    return Arrangement(members=members[occupied], volumes=volumes, exact=False)


def _quadrature_arrangement(A: ExpansiveMatrix, cubes: list[DilatedCube], mesh: int) -> Arrangement:
    fine = _mesh_cells(A, cubes, mesh)
    coarse = _mesh_cells(A, cubes, max(2, mesh // 2))
    fine.mesh_error = abs(fine.union_measure() - coarse.union_measure())
    logger.info(f"quadrature arrangement on mesh {mesh}: union measure error estimate {fine.mesh_error:.3e}")
    return fine


def arrangement(A: ExpansiveMatrix, cubes: list[DilatedCube], mesh: int = DEFAULT_MESH) -> Arrangement:
    """Cell decomposition of ∪ cubes; exact for diagonal A and for d ≤ 2."""
    if not cubes:
        return Arrangement(members=np.zeros((0, 0), dtype=bool), volumes=np.zeros(0))
    if is_diagonal(A):
        return _box_arrangement(A, cubes)
    if A.dim == 2:
        return _sweep_arrangement(A, cubes)
    return _quadrature_arrangement(A, cubes, mesh)


def lattice_reach(A: ExpansiveMatrix, cube: DilatedCube, member: DilatedCube) -> int:
    """Smallest N with ``member`` ⊆ ∪_{|n|_∞ ≤ N}(D + A^{scale(D)}n) = A^{scale(D)}(k + [-N, N+1]^d)."""
    coords = member.corners(A) @ A.power(-cube.scale).T - np.asarray(cube.offset, dtype=float)
    slack = OVERLAP_TOL * max(1.0, float(np.max(np.abs(coords))))
    need = max(float(np.max(-coords)), float(np.max(coords - 1.0)))
    return max(0, math.ceil(need - slack))
