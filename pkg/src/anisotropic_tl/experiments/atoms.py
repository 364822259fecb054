"""Bump atoms c·M_η φ_δ, trains of them planted in dilated annuli, and random band-limited fields."""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import cache, lru_cache
from typing import Literal

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad
from scipy.optimize import brentq
from scipy.special import gammaln, jv

from ..constants import BALL_MARGIN, BAND_MASS_TOL
from ..covers.annulus import AnnularCover
from ..covers.bump import ProfileShape, smooth_step
from ..covers.grids import SpatialGrid
from ..covers.intersections import cell_ball, intersection_sets, neighbor_bound
from ..exceptions import GridResolutionError, PlantingError
from ..linalg.models import ExpansiveMatrix
from ..tlnorm.fields import FieldComponent, SampledField
from ..tlnorm.norms import spatial_ellipsoid

logger = logging.getLogger(__name__)

PlantMode = Literal["separated", "spread"]

# radial samples for the tail scan of φ
_TAIL_SCAN_LIMIT = 96.0
_TAIL_SCAN_STEP = 0.125
# largest |j| scanned for a B-cell holding enough A-indices
_J_SCAN_LIMIT = 256
_MAX_STEP_RETRIES = 64


def _radial_spectrum(radius: np.ndarray) -> np.ndarray:
    """φ̂ as a function of |ξ|: one on [0, 1/2], a smooth step down to zero at 1."""
    return 1.0 - smooth_step(2.0 * np.asarray(radius, dtype=float) - 1.0)


def _sphere_area(dim: int) -> float:
    return float(2.0 * math.exp(0.5 * dim * math.log(math.pi) - gammaln(0.5 * dim)))


def _radial_value(r: float, dim: int) -> float:
    """φ at |x| = r by the Hankel transform of the radial spectrum."""
    if r == 0.0:
        integral, _ = quad(lambda s: float(_radial_spectrum(s)) * s ** (dim - 1), 0.0, 1.0)
        return _sphere_area(dim) * integral
    order = 0.5 * dim - 1.0
    integral, _ = quad(
        lambda s: float(_radial_spectrum(s)) * jv(order, 2.0 * math.pi * r * s) * s ** (0.5 * dim),
        0.0,
        1.0,
        limit=400,
    )
    return 2.0 * math.pi * r ** (1.0 - 0.5 * dim) * integral


@dataclass(frozen=True)
class BumpProfile:
    """The radial φ with φ̂ ≥ 0, φ̂ = 1 on B_{1/2}(0) and supp φ̂ ⊆ B_1(0)."""

    dim: int
    value_at_zero: float
    half_drop_radius: float
    tail_radius: float

    def spectrum(self, xi: np.ndarray, delta: float = 1.0) -> np.ndarray:
        """φ̂_δ(ξ) = φ̂(ξ/δ) for each row of ``xi``."""
        return _radial_spectrum(np.linalg.norm(np.atleast_2d(xi), axis=1) / delta)

    def value(self, r: float) -> float:
        return _radial_value(r, self.dim)


@cache
def build_bump(dim: int = 2) -> BumpProfile:
    """Build the base bump φ and certify φ(0) = ∫φ̂ > 0.

    ``half_drop_radius`` is the first r with φ(r) = φ(0)/2, so |φ| ≥ φ(0)/2 on that ball.
    ``tail_radius`` is the smallest r with at most 1e-8 of the L² mass of φ outside B_r(0).
    """
    if dim < 1:
        raise ValueError(f"dimension must be positive, got {dim}")
    at_zero = _radial_value(0.0, dim)
    if not at_zero > 0:
        raise RuntimeError(f"bump has φ(0) = {at_zero:.3e}")

    radii = np.arange(0.0, _TAIL_SCAN_LIMIT + _TAIL_SCAN_STEP, _TAIL_SCAN_STEP)
    values = np.array([_radial_value(float(r), dim) for r in radii])
    crossing = int(np.argmax(values < 0.5 * at_zero))
    half_drop = brentq(
        lambda r: _radial_value(r, dim) - 0.5 * at_zero, float(radii[crossing - 1]), float(radii[crossing])
    )

    total, _ = quad(lambda s: float(_radial_spectrum(s)) ** 2 * s ** (dim - 1), 0.0, 1.0)
    total *= _sphere_area(dim)
    density = _sphere_area(dim) * values**2 * radii ** (dim - 1)
    inside = cumulative_trapezoid(density, radii, initial=0.0)
    outside = np.clip(total - inside, 0.0, None) / total
    below = np.flatnonzero(outside < BAND_MASS_TOL)
    if below.size:
        tail = float(radii[below[0]])
    else:
        tail = float(radii[-1])
        logger.warning(f"bump tail mass {outside[-1]:.2e} at r = {tail} is above {BAND_MASS_TOL:.0e}")

    logger.debug(f"bump in d={dim}: φ(0)={at_zero:.6g}, half drop {half_drop:.4g}, tail radius {tail}")
    return BumpProfile(dim=dim, value_at_zero=at_zero, half_drop_radius=float(half_drop), tail_radius=tail)


def atom_grid(profile: BumpProfile, delta: float, n_per_axis: int, padding: float = 0.0) -> SpatialGrid:
    """Spatial grid holding φ_δ (shifted by up to ``padding``/δ) with its band inside the frequency box.

    Raises:
        GridResolutionError: If n_per_axis is too small to hold both the tail and the band
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    reach = profile.tail_radius + padding
    needed = 4.0 * BALL_MARGIN * reach
    if n_per_axis < needed:
        raise GridResolutionError(
            f"grid cannot resolve the atom: n_per_axis={n_per_axis}, need at least {math.ceil(needed)}"
        )
    return SpatialGrid(profile.dim, reach / delta, n_per_axis)


@lru_cache(maxsize=64)
def atom_samples(profile: BumpProfile, grid: SpatialGrid, delta: float) -> np.ndarray:
    """φ_δ on the grid, by inverse transform of φ̂_δ on the dual grid."""
    spectrum = profile.spectrum(grid.frequency_points, delta).reshape(grid.shape)
    samples = grid.from_spectrum(spectrum)
    samples.setflags(write=False)
    return samples


@dataclass(frozen=True)
class BumpAtom:
    """c·M_η φ_δ, band certified in B_δ(η)."""

    delta: float
    eta: np.ndarray = field(compare=False)
    coeff: complex = 1.0

    def component(self, profile: BumpProfile, grid: SpatialGrid, scale: complex = 1.0) -> FieldComponent:
        samples = (scale * self.coeff) * atom_samples(profile, grid, self.delta)
        return FieldComponent(np.asarray(self.eta, dtype=float), samples, band_radius=self.delta)


def atom_field(atoms: list[BumpAtom], profile: BumpProfile, grid: SpatialGrid) -> SampledField:
    return SampledField(grid, tuple(atom.component(profile, grid) for atom in atoms))


@dataclass(frozen=True)
class AtomTrain:
    """Atoms at A-scales i_1 < … < i_K with gaps above 2N, optionally sharing one B-cell j₀."""

    atoms: tuple[BumpAtom, ...]
    scale_indices: tuple[int, ...]
    neighbor_bound: int
    delta: float
    j0: int | None = None
    residue: int | None = None
    b_indices: tuple[int, ...] = ()

    @property
    def size(self) -> int:
        return len(self.atoms)

    def field(self, profile: BumpProfile, grid: SpatialGrid, coeffs: np.ndarray | None = None) -> SampledField:
        """Σ_k c_k M_{η_k} φ_δ; unit coefficients when ``coeffs`` is None."""
        values = np.ones(self.size, dtype=complex) if coeffs is None else np.asarray(coeffs, dtype=complex)
        if values.shape != (self.size,):
            raise ValueError(f"expected {self.size} coefficients, got shape {values.shape}")
        return SampledField(
            grid, tuple(atom.component(profile, grid, c) for atom, c in zip(self.atoms, values, strict=True))
        )

    def head(self, K: int) -> "AtomTrain":
        """The first K atoms, which keep every planting condition."""
        if not 1 <= K <= self.size:
            raise ValueError(f"K must lie in [1, {self.size}], got {K}")
        return replace(
            self,
            atoms=self.atoms[:K],
            scale_indices=self.scale_indices[:K],
            b_indices=self.b_indices[:K],
        )

    def with_delta(self, delta: float) -> "AtomTrain":
        """The same train with a smaller common band radius."""
        if not 0 < delta <= self.delta:
            raise ValueError(f"delta must lie in (0, {self.delta}], got {delta}")
        return replace(self, delta=delta, atoms=tuple(replace(a, delta=delta) for a in self.atoms))

    def to_record(self) -> dict[str, object]:
        return {
            "scale_indices": list(self.scale_indices),
            "neighbor_bound": self.neighbor_bound,
            "delta": self.delta,
            "j0": self.j0,
            "residue": self.residue,
            "b_indices": list(self.b_indices),
            "carriers": [np.asarray(a.eta).tolist() for a in self.atoms],
        }


def spatial_drop_radius(A: ExpansiveMatrix, profile: BumpProfile, index: int) -> float:
    """Largest δ with |φ| ≥ φ(0)/2 on δ·A^{-index}Ω_A."""
    omega = spatial_ellipsoid(A)
    power = A.power(index)
    form = power.T @ omega.form @ power
    reach = math.sqrt(omega.level / float(np.min(np.linalg.eigvalsh(form))))
    return profile.half_drop_radius / reach


def _cell_atoms(
    cover_a: AnnularCover, indices: list[int], cover_b: AnnularCover | None, b_indices: list[int] | None
) -> tuple[list[np.ndarray], list[float]]:
    carriers, radii = [], []
    for k, i in enumerate(indices):
        j = b_indices[k] if b_indices is not None else None
        ball = cell_ball(cover_a, i, cover_b, j, centered=True)
        if ball is None:
            raise PlantingError(f"cells i={i}, j={j} do not meet")
        carriers.append(ball[0])
        radii.append(ball[1])
    return carriers, radii


def _verify_train(
    train: AtomTrain, cover_a: AnnularCover, cover_b: AnnularCover | None, A: ExpansiveMatrix, profile: BumpProfile
) -> None:
    gap = 2 * train.neighbor_bound + 1
    steps = np.diff(train.scale_indices)
    if np.any(steps < gap):
        raise PlantingError(f"scale gaps {steps.tolist()} below 2N+1 = {gap}")
    for k, (atom, i) in enumerate(zip(train.atoms, train.scale_indices, strict=True)):
        if cover_a.ball_margin(atom.eta, i) < train.delta:
            raise PlantingError(f"atom {k} leaves (A*)^{i}Q")
        if cover_b is not None and train.b_indices:
            j = train.b_indices[k]
            if cover_b.ball_margin(atom.eta, j) < train.delta:
                raise PlantingError(f"atom {k} leaves (B*)^{j}P")
    if train.delta > spatial_drop_radius(A, profile, train.scale_indices[0]) * (1.0 + 1e-12):
        raise PlantingError("half-drop condition on δ·A^{-i_1}Ω_A fails")


def validate_train(
    train: AtomTrain,
    A: ExpansiveMatrix,
    B: ExpansiveMatrix | None = None,
    profile: BumpProfile | None = None,
    shape: ProfileShape | None = None,
    theta: float | None = None,
) -> None:
    """Re-check the planting conditions of a train built elsewhere.

    Raises:
        PlantingError: If a gap, ball or half-drop condition fails
    """
    shape = shape or ProfileShape()
    cover_b = AnnularCover.for_matrix(B, shape, theta) if B is not None else None
    _verify_train(train, AnnularCover.for_matrix(A, shape, theta), cover_b, A, profile or build_bump(A.dim))


def _separated_cell(
    cover_a: AnnularCover, cover_b: AnnularCover, needed: int, workers: int
) -> tuple[int, list[int]]:
    """Smallest |j| whose I_j = {i : (A*)^iQ ∩ (B*)^jP ≠ ∅} has at least ``needed`` members."""
    span = 8
    while span <= _J_SCAN_LIMIT:
        sets = intersection_sets(cover_b, cover_a, (-span, span), workers=workers)
        for j in sorted(sets.J, key=lambda j: (abs(j), -j)):
            if len(sets.J[j]) >= needed:
                return j, sets.J[j]
        span *= 2
    raise PlantingError(f"no B-cell with |I_j| >= {needed} for |j| <= {_J_SCAN_LIMIT}; the pair looks equivalent")


def plant_atoms(
    A: ExpansiveMatrix,
    B: ExpansiveMatrix | None,
    K: int,
    mode: PlantMode = "separated",
    profile: BumpProfile | None = None,
    shape: ProfileShape | None = None,
    theta: float | None = None,
    workers: int = 1,
) -> AtomTrain:
    """Plant K atoms for the A-cover, inside one B-cell, along increasing B-cells, or for A alone.

    ``separated``: find j₀ with |I_{j₀}| ≥ (2N+1)K, keep the indices of one residue class modulo
    2N+1, and centre one ball in each (A*)^{i_k}Q ∩ (B*)^{j₀}P.
    ``spread``: i_k and j_k both increase, every atom in its own intersection cell.
    Without B the atoms sit at i_k = k(2N+1), centred in (A*)^{i_k}Q.

    The common band radius is min(δ₁/2, δ₂), with δ₁ the smallest ball radius and δ₂ the half-drop
    radius over A^{-i_1}Ω_A. Every condition is re-verified on the result.

    Raises:
        PlantingError: If no admissible configuration exists in the sweep range
    """
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    profile = profile or build_bump(A.dim)
    shape = shape or ProfileShape()
    cover_a = AnnularCover.for_matrix(A, shape, theta)
    cover_b = AnnularCover.for_matrix(B, shape, theta) if B is not None else None
    N = neighbor_bound(cover_a)
    gap = 2 * N + 1

    j0: int | None = None
    residue: int | None = None
    b_indices: list[int] | None = None
    if cover_b is None:
        indices = [k * gap for k in range(K)]
    elif mode == "separated":
        needed = gap * K if K > 1 else 1
        j0, members = _separated_cell(cover_a, cover_b, needed, workers)
        residue, indices = 0, members[:1]
        for n in range(gap):
            in_class = [i for i in members if (i - n) % gap == 0]
            if len(in_class) >= K:
                residue, indices = n, in_class[:K]
                break
        b_indices = [j0] * K
    elif mode == "spread":
        indices, b_indices = _spread_indices(cover_a, cover_b, K, gap, workers)
    else:
        raise ValueError(f"unknown planting mode {mode!r}")

    carriers, radii = _cell_atoms(cover_a, indices, cover_b, b_indices)
    delta = min(0.5 * min(radii), spatial_drop_radius(A, profile, indices[0]))
    train = AtomTrain(
        atoms=tuple(BumpAtom(delta=delta, eta=eta) for eta in carriers),
        scale_indices=tuple(indices),
        neighbor_bound=N,
        delta=delta,
        j0=j0,
        residue=residue,
        b_indices=tuple(b_indices or ()),
    )
    _verify_train(train, cover_a, cover_b, A, profile)
    logger.info(f"planted {K} atoms ({mode}): i={indices}, j={b_indices}, delta={delta:.4g}")
    return train


def _spread_indices(
    cover_a: AnnularCover, cover_b: AnnularCover, K: int, gap: int, workers: int
) -> tuple[list[int], list[int]]:
    N_b = neighbor_bound(cover_b)
    for step in range(gap, gap + _MAX_STEP_RETRIES):
        indices = [k * step for k in range(K)]
        sets = intersection_sets(cover_a, cover_b, (indices[0], indices[-1]), workers=workers)
        chosen: list[int] = []
        for i in indices:
            options = [j for j in sets.J[i] if not chosen or j > chosen[-1] + 2 * N_b]
            best = max(options, key=lambda j: _ball_radius(cover_a, i, cover_b, j), default=None)
            if best is None:
                break
            chosen.append(best)
        if len(chosen) == K:
            return indices, chosen
    raise PlantingError(f"no spread train of {K} atoms with index step below {gap + _MAX_STEP_RETRIES}")


def _ball_radius(cover_a: AnnularCover, i: int, cover_b: AnnularCover, j: int) -> float:
    ball = cell_ball(cover_a, i, cover_b, j)
    return -math.inf if ball is None else ball[1]


def single_atom(
    A: ExpansiveMatrix, i0: int, shape: ProfileShape | None = None, theta: float | None = None
) -> BumpAtom:
    """One atom centred in (A*)^{i0}Q with δ the certified radius halved once."""
    cover = AnnularCover.for_matrix(A, shape or ProfileShape(), theta)
    ball = cell_ball(cover, i0, centered=True)
    if ball is None:
        raise PlantingError(f"no ball inside (A*)^{i0}Q")
    return BumpAtom(delta=0.5 * ball[1], eta=ball[0])


def random_band_field(
    profile: BumpProfile,
    grid: SpatialGrid,
    center: np.ndarray,
    radius: float,
    rng: np.random.Generator,
    n_terms: int = 4,
    shift: float = 2.0,
) -> SampledField:
    """e^{2πiη·x} g(x) with ĝ = φ̂(·/radius)·Σ_m a_m e^{-2πi ·x_m}: random, band certified in B_radius(η).

    a_m are complex Gaussian and x_m uniform with |x_m|_∞ ≤ shift/radius.
    """
    coeffs = rng.standard_normal(n_terms) + 1j * rng.standard_normal(n_terms)
    shifts = rng.uniform(-shift / radius, shift / radius, size=(n_terms, grid.dim))
    freqs = grid.frequency_points
    spectrum = profile.spectrum(freqs, radius) * (np.exp(-2j * np.pi * freqs @ shifts.T) @ coeffs)
    samples = grid.from_spectrum(spectrum.reshape(grid.shape))
    return SampledField(grid, (FieldComponent(np.asarray(center, dtype=float), samples, band_radius=radius),))
