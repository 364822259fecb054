"""Tents, the ḟ⁰_{1,∞} and ḟ⁰_{∞,1} sequence norms, and Carleson constants of finite sequences."""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from ..constants import BRUTEFORCE_MAX_SUPPORT, SCALE_MARGIN
from ..linalg.models import ExpansiveMatrix
from ..output.report import ExperimentReport, Table
from .geometry import DEFAULT_MESH, arrangement, cubes_meeting, lattice_reach, overlap_measure, overlaps
from .models import CubeSequence, DilatedCube

logger = logging.getLogger(__name__)

CarlesonMethod = Literal["bruteforce", "greedy"]
# subcollections evaluated per block in the exhaustive search
_SUBSET_BLOCK = 4096


def tent(A: ExpansiveMatrix, cube: DilatedCube, scale_floor: int) -> list[DilatedCube]:
    """𝒯(D) truncated below: cubes D′ with scale_floor ≤ scale(D′) ≤ scale(D) and m(D′ ∩ D) > 0."""
    if scale_floor > cube.scale:
        raise ValueError(f"scale_floor {scale_floor} lies above scale(D) = {cube.scale}")
    members = []
    for scale in range(scale_floor, cube.scale + 1):
        members.extend(cubes_meeting(A, cube, scale))
    return members


def tent_containment_radius(A: ExpansiveMatrix, cubes: list[DilatedCube], depth: int) -> int:
    """Smallest N with ∪𝒯(D) ⊆ ∪_{|n|_∞ ≤ N}(D + A^{scale(D)}n) for every D, tents cut ``depth`` scales down."""
    radius = 0
    for cube in cubes:
        for member in tent(A, cube, cube.scale - depth):
            radius = max(radius, lattice_reach(A, cube, member))
    return radius


def f1inf_norm(c: CubeSequence, mesh: int = DEFAULT_MESH) -> float:
    """∫ sup_D m(D)^{-1/2}|c_D| 1_D(x) dx on the arrangement of the support."""
    if not len(c):
        return 0.0
    cells = arrangement(c.matrix, c.support, mesh)
    return cells.sup_integral(c.magnitudes() / np.sqrt(c.measures()))


@lru_cache(maxsize=4096)
def _meeting(A: ExpansiveMatrix, cube: DilatedCube, scale: int) -> tuple[DilatedCube, ...]:
    return tuple(cubes_meeting(A, cube, scale))


def _candidates(
    c: CubeSequence, margin: int, scale_floor: int | None
) -> tuple[list[DilatedCube], dict[DilatedCube, list[DilatedCube]]]:
    """Support cubes above the floor, and per candidate D′ the support cubes D with scale(D) ≤ scale(D′)
    that meet it. Cubes D′ meeting no such D contribute nothing to either sup."""
    bounds = c.scale_bounds
    if bounds is None:
        return [], {}
    floor = bounds[0] if scale_floor is None else scale_floor
    support = [cube for cube in c.support if cube.scale >= floor]
    meeting: dict[DilatedCube, list[DilatedCube]] = {}
    for scale in range(floor, bounds[1] + margin + 1):
        for cube in support:
            if cube.scale > scale:
                continue
            for outer in _meeting(c.matrix, cube, scale):
                meeting.setdefault(outer, []).append(cube)
    return support, meeting


def finf1_norm_def(c: CubeSequence, scale_floor: int | None = None, margin: int = SCALE_MARGIN) -> float:
    """sup_{D′} m(D′)^{-1} Σ_{scale(D) ≤ scale(D′)} m(D)^{-1/2}|c_D| m(D ∩ D′), over D′ up to ``margin``
    scales above the support."""
    _, meeting = _candidates(c, margin, scale_floor)
    A = c.matrix
    best = 0.0
    for outer, inner in meeting.items():
        total = sum(
            abs(c.coefficients[cube]) / np.sqrt(cube.measure(A)) * overlap_measure(A, cube, outer) for cube in inner
        )
        best = max(best, float(total) / outer.measure(A))
    return best


def finf1_norm_tent(c: CubeSequence, scale_floor: int | None = None, margin: int = SCALE_MARGIN) -> float:
    """sup_{D′} m(D′)^{-1} Σ_{D ∈ 𝒯(D′)} m(D)^{1/2}|c_D|."""
    _, meeting = _candidates(c, margin, scale_floor)
    A = c.matrix
    best = 0.0
    for outer, inner in meeting.items():
        total = sum(abs(c.coefficients[cube]) * np.sqrt(cube.measure(A)) for cube in inner)
        best = max(best, float(total) / outer.measure(A))
    return best


@dataclass
class CarlesonEstimate:
    """Bounds on the best C with Σ_{D∈𝒟′} a_D ≤ C m(∪𝒟′); equal for the exhaustive search."""

    lower: float
    upper: float
    method: CarlesonMethod
    subcollections: int

    @property
    def value(self) -> float:
        return self.upper


def _bruteforce(A: ExpansiveMatrix, cubes: list[DilatedCube], weights: np.ndarray) -> CarlesonEstimate:
    n = len(cubes)
    if n > BRUTEFORCE_MAX_SUPPORT:
        raise ValueError(f"exhaustive Carleson search supports at most {BRUTEFORCE_MAX_SUPPORT} cubes, got {n}")
    masks, volumes = arrangement(A, cubes).mask_volumes()
    bits = np.int64(1) << np.arange(n, dtype=np.int64)
    best = 0.0
    total = 2**n - 1
    for start in range(1, total + 1, _SUBSET_BLOCK):
        subsets = np.arange(start, min(start + _SUBSET_BLOCK, total + 1), dtype=np.int64)
        chosen = (subsets[:, None] & bits[None, :]) != 0
        sums = chosen @ weights
        unions = ((subsets[:, None] & masks[None, :]) != 0) @ volumes
        best = max(best, float(np.max(sums / unions)))
    return CarlesonEstimate(lower=best, upper=best, method="bruteforce", subcollections=total)


def _greedy(A: ExpansiveMatrix, cubes: list[DilatedCube], weights: np.ndarray) -> CarlesonEstimate:
    """Scale-descending decomposition into maximal layers and their tents.

    Every subcollection 𝒟′ is covered by the tents of pairwise disjoint cubes selected from 𝒟′ itself,
    so the largest tent sum over measure among all cubes bounds the constant from above. The lower bound
    is the best ratio over the subcollections the decomposition of the full support inspects.
    """
    n = len(cubes)
    cells = arrangement(A, cubes)
    index = {cube: m for m, cube in enumerate(cubes)}

    def tent_rows(outer: DilatedCube) -> np.ndarray:
        rows = np.zeros(n, dtype=bool)
        for m, cube in enumerate(cubes):
            rows[m] = cube.scale <= outer.scale and overlaps(A, cube, outer)
        return rows

    tents = {cube: tent_rows(cube) for cube in cubes}
    upper = max(float(weights[tents[cube]].sum()) / cube.measure(A) for cube in cubes)

    def ratio(selection: np.ndarray) -> float:
        union = cells.union_measure(selection)
        return float(weights[selection].sum()) / union if union > 0 else 0.0

    inspected = [np.ones(n, dtype=bool)]
    remaining = list(cubes)
    selected = np.zeros(n, dtype=bool)
    while remaining:
        top = max(cube.scale for cube in remaining)
        layer = [cube for cube in remaining if cube.scale == top]
        for cube in layer:
            selected[index[cube]] = True
            inspected.append(tents[cube])
        inspected.append(selected.copy())
        remaining = [cube for cube in remaining if not any(tents[outer][index[cube]] for outer in layer)]
    lower = max(ratio(selection) for selection in inspected)
    return CarlesonEstimate(lower=lower, upper=max(upper, lower), method="greedy", subcollections=len(inspected))


def carleson_bounds(
    A: ExpansiveMatrix, cubes: list[DilatedCube], weights: np.ndarray, method: CarlesonMethod = "bruteforce"
) -> CarlesonEstimate:
    """Carleson constant of the nonnegative sequence a_D = ``weights`` on ``cubes``."""
    if not cubes:
        return CarlesonEstimate(lower=0.0, upper=0.0, method=method, subcollections=0)
    if method == "bruteforce":
        return _bruteforce(A, cubes, np.asarray(weights, dtype=float))
    if method == "greedy":
        return _greedy(A, cubes, np.asarray(weights, dtype=float))
    raise ValueError(f"unknown Carleson method {method!r}")


def carleson_constant(c: CubeSequence, method: CarlesonMethod = "bruteforce") -> CarlesonEstimate:
    """Best C with Σ_{D∈𝒟′}|c_D| m(D)^{1/2} ≤ C m(∪𝒟′) over subcollections of the support.

    Raises:
        ValueError: If the exhaustive search is asked for more than 14 cubes
    """
    return carleson_bounds(c.matrix, c.support, c.magnitudes() * np.sqrt(c.measures()), method)


def _shared_support(a: CubeSequence, b: CubeSequence) -> list[DilatedCube]:
    if a.matrix is not b.matrix and not np.array_equal(a.matrix.entries, b.matrix.entries):
        raise ValueError("sequences belong to different matrices")
    return sorted(set(a.support) | set(b.support))


def carleson_embedding_check(
    a: CubeSequence, b: CubeSequence, method: CarlesonMethod = "bruteforce"
) -> tuple[float, float]:
    """(Σ a_D b_D, C(a)·∫ sup_D b_D 1_D) for the magnitudes of a and b; the first never exceeds the second."""
    cubes = _shared_support(a, b)
    weights_a = np.array([abs(a.coefficients.get(cube, 0.0)) for cube in cubes])
    weights_b = np.array([abs(b.coefficients.get(cube, 0.0)) for cube in cubes])
    lhs = float(weights_a @ weights_b)
    if not cubes:
        return lhs, 0.0
    constant = carleson_bounds(a.matrix, cubes, weights_a, method).upper
    return lhs, constant * arrangement(a.matrix, cubes).sup_integral(weights_b)


def pairing_bound_check(
    c: CubeSequence,
    c_prime: CubeSequence,
    bound: float | None = None,
    method: CarlesonMethod = "bruteforce",
) -> ExperimentReport:
    """|Σ c_D conj(c′_D)| against ‖c‖_{ḟ⁰_{1,∞}}‖c′‖_{ḟ⁰_{∞,1}}.

    The Carleson form ‖c‖_{ḟ⁰_{1,∞}}·C(c′) bounds the pairing with constant one and is always checked;
    the ratio against the definition-form norm product must stay below ``bound`` when one is given.
    """
    _shared_support(c, c_prime)
    pairing = abs(c.pairing(c_prime))
    f1 = f1inf_norm(c)
    finf = finf1_norm_def(c_prime)
    carleson = carleson_constant(c_prime, method).upper if len(c_prime) else 0.0
    product = f1 * finf
    ratio = pairing / product if product > 0 else 0.0

    report = ExperimentReport(
        name="pairing_bound",
        params={"bound": bound, "method": method, "support": [len(c), len(c_prime)]},
        provenance={"A": c.matrix.to_record()},
    )
    table = Table(name="pairing", columns=["pairing", "f1inf", "finf1_def", "carleson", "ratio"])
    table.add(pairing, f1, finf, carleson, ratio)
    report.tables.append(table)
    ok = pairing <= f1 * carleson * (1.0 + 1e-9) + 1e-12
    if bound is not None:
        ok = ok and ratio <= bound
    report.verdict = "PASS" if ok else "FAIL"
    return report
