"""Numerical equivalence decision for pairs of expansive matrices.

Two independent criteria are evaluated over a sweep depth K:

* power norms s_k = ‖A^{-k} B^{⌊ck⌋}‖₂, c = ln|det A| / ln|det B|, which stay bounded exactly for
  equivalent pairs;
* intersection counts max|J_i| + max|I_j| of the default annular covers, which stay bounded exactly
  for equivalent pairs.

The verdict is a contract, not a proof: a confident answer needs both criteria to point the same way.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from ..constants import COVER_CAP, RANGE_DOUBLINGS, SLOPE_TOL
from ..covers.annulus import AnnularCover
from ..covers.bump import ProfileShape
from ..covers.intersections import IndexSets, intersection_sets
from ..exceptions import HypothesisError
from ..linalg.models import ExpansiveMatrix
from ..utils import linear_slope, log_runtime

logger = logging.getLogger(__name__)

Verdict = Literal["equivalent", "inequivalent", "inconclusive"]
Trend = Literal["bounded", "growing", "unclear"]

# sup s_k must grow at least this much per range doubling to count as growth
_NORM_GROWTH_FACTOR = 1.25
# det-quotient maxima must grow at least this much overall to be flagged unbounded
_DET_GROWTH_FACTOR = 2.0


@dataclass
class EquivalenceVerdict:
    """Outcome of :func:`decide_equivalence` with the data behind it."""

    verdict: Verdict
    c_exponent: float
    power_norm_table: list[tuple[int, float]]
    growth_slope: float
    cover_stats: tuple[int, int]
    sweep_range: int
    half_slopes: tuple[float, float] = (0.0, 0.0)
    norm_levels: list[tuple[int, float]] = field(default_factory=list)
    cover_levels: list[tuple[int, int, int]] = field(default_factory=list)
    norm_trend: Trend = "unclear"
    cover_trend: Trend = "unclear"
    diagnostics: list[str] = field(default_factory=list)

    def to_record(self) -> dict[str, object]:
        return asdict(self)


@dataclass
class DetQuotient:
    """max |det A|^{±i} |det B|^{∓j} over intersecting pairs, per sweep level."""

    value: float
    unbounded: bool
    levels: list[tuple[int, float]]


@dataclass
class SpaceComparison:
    """Whether Ḟ^{α₁}_{p₁,q₁}(A) and Ḟ^{α₂}_{p₂,q₂}(B) coincide; ``coincide`` is None when undecided."""

    coincide: bool | None
    reason: str
    equivalence: EquivalenceVerdict | None = None


def c_exponent(A: ExpansiveMatrix, B: ExpansiveMatrix) -> float:
    return A.log_det / B.log_det


def power_norm_table(A: ExpansiveMatrix, B: ExpansiveMatrix, K: int) -> list[tuple[int, float]]:
    """(k, ‖A^{-k} B^{⌊ck⌋}‖₂) for k ∈ [-K, K], floor toward -∞."""
    c = c_exponent(A, B)
    table = []
    for k in range(-K, K + 1):
        j = math.floor(c * k)
        with np.errstate(over="ignore"):
            value = float(np.linalg.norm(A.power(-k) @ B.power(j), 2))
        table.append((k, value))
    return table


def default_covers(
    A: ExpansiveMatrix, B: ExpansiveMatrix, shape: ProfileShape | None = None
) -> tuple[AnnularCover, AnnularCover]:
    shape = shape or ProfileShape()
    return AnnularCover.for_matrix(A, shape), AnnularCover.for_matrix(B, shape)


def _doubling_levels(K: int) -> list[int]:
    levels = [max(1, K // 2**step) for step in range(RANGE_DOUBLINGS, -1, -1)]
    return sorted(set(levels))


def _norm_trend(
    table: list[tuple[int, float]], K: int, slope_tol: float
) -> tuple[Trend, tuple[float, float], list[tuple[int, float]]]:
    ks = np.array([k for k, _ in table])
    logs = np.log(np.array([v for _, v in table]))
    positive, negative = ks >= 0, ks <= 0
    half_slopes = (
        linear_slope(ks[positive], logs[positive]),
        linear_slope(-ks[negative], logs[negative]),
    )
    levels = [(level, float(np.exp(np.max(logs[np.abs(ks) <= level])))) for level in _doubling_levels(K)]
    sups = [value for _, value in levels]
    doubling_growth = len(sups) > 1 and all(b >= _NORM_GROWTH_FACTOR * a for a, b in zip(sups, sups[1:], strict=False))

    if min(half_slopes) > slope_tol or doubling_growth:
        return "growing", half_slopes, levels
    if max(half_slopes) < slope_tol:
        return "bounded", half_slopes, levels
    return "unclear", half_slopes, levels


def _cover_counts(
    covers: tuple[AnnularCover, AnnularCover], level: int, workers: int
) -> tuple[int, int, IndexSets]:
    sets = intersection_sets(covers[0], covers[1], (-level, level), workers=workers)
    return sets.max_J(), sets.max_I(), sets


def _cover_levels(
    covers: tuple[AnnularCover, AnnularCover], K: int, workers: int
) -> list[tuple[int, int, int]]:
    """(level, max_J, max_I) per doubling level, from the first level with both index sets populated."""
    counts: list[tuple[int, int, int]] = []
    for level in _doubling_levels(K):
        max_j, max_i, _ = _cover_counts(covers, level, workers)
        if counts or (max_j > 0 and max_i > 0) or level == K:
            counts.append((level, max_j, max_i))
    return counts


def _cover_trend(counts: list[tuple[int, int, int]], cover_cap: int) -> Trend:
    totals = [j + i for _, j, i in counts]
    increasing = len(totals) > 1 and all(b > a for a, b in zip(totals, totals[1:], strict=False))
    if increasing or totals[-1] > cover_cap:
        return "growing"
    # saturated: the last doubling added nothing
    if len(totals) > 1 and totals[-1] <= totals[-2]:
        return "bounded"
    return "unclear"


@log_runtime(budget_seconds=30.0)
def decide_equivalence(
    A: ExpansiveMatrix,
    B: ExpansiveMatrix,
    K: int = 40,
    slope_tol: float = SLOPE_TOL,
    cover_cap: int = COVER_CAP,
    shape: ProfileShape | None = None,
    workers: int = 1,
) -> EquivalenceVerdict:
    """Decide whether A and B are equivalent from sweeps over k, i ∈ [-K, K].

    Args:
        A: First certified expansive matrix
        B: Second certified expansive matrix
        K: Sweep depth
        slope_tol: Growth slope threshold for ln s_k against |k|
        cover_cap: Largest intersection count still treated as bounded
        shape: Annulus parameters of the default covers
        workers: Thread workers for the intersection sweeps

    Returns:
        EquivalenceVerdict; ``inconclusive`` whenever the criteria do not agree
    """
    if A.dim != B.dim:
        raise ValueError(f"matrices act on different dimensions ({A.dim} and {B.dim})")
    if K < 1:
        raise ValueError(f"sweep depth must be positive, got {K}")

    table = power_norm_table(A, B, K)
    norm_trend, half_slopes, norm_levels = _norm_trend(table, K, slope_tol)

    covers = default_covers(A, B, shape)
    cover_levels = _cover_levels(covers, K, workers)
    cover_trend = _cover_trend(cover_levels, cover_cap)

    diagnostics = []
    if norm_trend == "bounded" and cover_trend == "bounded":
        verdict: Verdict = "equivalent"
    elif norm_trend == "growing" and cover_trend == "growing":
        verdict = "inequivalent"
    else:
        verdict = "inconclusive"
        diagnostics.append(f"power norms {norm_trend}, cover counts {cover_trend}")
        if {norm_trend, cover_trend} == {"bounded", "growing"}:
            logger.warning(f"equivalence criteria contradict each other: {diagnostics[-1]}")

    result = EquivalenceVerdict(
        verdict=verdict,
        c_exponent=c_exponent(A, B),
        power_norm_table=table,
        growth_slope=max(half_slopes),
        cover_stats=(cover_levels[-1][1], cover_levels[-1][2]),
        sweep_range=K,
        half_slopes=half_slopes,
        norm_levels=norm_levels,
        cover_levels=cover_levels,
        norm_trend=norm_trend,
        cover_trend=cover_trend,
        diagnostics=diagnostics,
    )
    logger.info(f"equivalence verdict at depth {K}: {verdict} (slope {result.growth_slope:.4f}, covers {cover_levels})")
    return result


def adjoint_consistency(
    A: ExpansiveMatrix, B: ExpansiveMatrix, K: int = 40, shape: ProfileShape | None = None, workers: int = 1
) -> bool:
    """True when (A, B) and (Aᵀ, Bᵀ) get the same verdict; vacuously true if either is inconclusive."""
    direct = decide_equivalence(A, B, K, shape=shape, workers=workers)
    adjoint = decide_equivalence(A.transpose, B.transpose, K, shape=shape, workers=workers)
    if "inconclusive" in (direct.verdict, adjoint.verdict):
        logger.info("adjoint consistency skipped: inconclusive verdict")
        return True
    return direct.verdict == adjoint.verdict


def _det_quotient(A: ExpansiveMatrix, B: ExpansiveMatrix, sets: IndexSets, level: int) -> float:
    worst = 0.0
    for i, js in sets.J.items():
        if abs(i) > level:
            continue
        for j in js:
            worst = max(worst, abs(i * A.log_det - j * B.log_det))
    return float(np.exp(worst))


def det_quotient_bound(
    A: ExpansiveMatrix, B: ExpansiveMatrix, K: int = 40, shape: ProfileShape | None = None, workers: int = 1
) -> DetQuotient:
    """Smallest C with C⁻¹|det B|^j ≤ |det A|^i ≤ C|det B|^j over intersecting (i, j), |i| ≤ K.

    The bound is flagged unbounded when the per-level maxima grow strictly across the range
    doublings and by more than a factor of two overall.
    """
    covers = default_covers(A, B, shape)
    sets = intersection_sets(covers[0], covers[1], (-K, K), workers=workers)
    levels = [(level, _det_quotient(A, B, sets, level)) for level in _doubling_levels(K)]
    values = [value for _, value in levels]
    strictly = all(b > a for a, b in zip(values, values[1:], strict=False))
    unbounded = len(values) > 1 and strictly and values[-1] > _DET_GROWTH_FACTOR * values[0]
    return DetQuotient(value=values[-1], unbounded=unbounded, levels=levels)


def inclusion_window_size(A: ExpansiveMatrix, B: ExpansiveMatrix, alpha: float, beta: float, C: float) -> int:
    """N = max(⌈ln C/(|α| ln|det A|)⌉ + 1, ⌈ln C/(|β| ln|det B|)⌉ + 1)."""
    if alpha == 0 or beta == 0:
        raise ValueError("alpha and beta must be nonzero")
    if C < 1:
        raise ValueError(f"the weight comparison constant must be at least 1, got {C}")
    n_a = math.ceil(math.log(C) / (abs(alpha) * A.log_det)) + 1
    n_b = math.ceil(math.log(C) / (abs(beta) * B.log_det)) + 1
    return max(n_a, n_b)


def inclusion_window(
    A: ExpansiveMatrix,
    B: ExpansiveMatrix,
    alpha: float,
    beta: float,
    C: float,
    K: int = 40,
    shape: ProfileShape | None = None,
) -> int:
    """Window N with J_i ⊆ {j : |j − ⌊(α/β)ci⌋| ≤ N}, verified over |i| ≤ K.

    Raises:
        HypothesisError: If |det A|^{αi} and |det B|^{βj} differ by more than C on some intersecting pair
    """
    N = inclusion_window_size(A, B, alpha, beta, C)
    covers = default_covers(A, B, shape)
    sets = intersection_sets(covers[0], covers[1], (-K, K))
    log_c = math.log(C)
    ratio = (alpha / beta) * c_exponent(A, B)
    for i, js in sets.J.items():
        for j in js:
            if abs(alpha * i * A.log_det - beta * j * B.log_det) > log_c + 1e-12:
                raise HypothesisError(f"weights of intersecting dilates differ by more than C={C:g}", (i, j))
            if abs(j - math.floor(ratio * i)) > N:
                raise RuntimeError(f"inclusion window {N} violated at (i={i}, j={j})")
    logger.info(f"inclusion window N={N} verified for |i| <= {K}")
    return N


def classify_spaces(
    A: ExpansiveMatrix,
    B: ExpansiveMatrix,
    params_a: tuple[float, float, float],
    params_b: tuple[float, float, float],
    K: int = 40,
    slope_tol: float = SLOPE_TOL,
    cover_cap: int = COVER_CAP,
    workers: int = 1,
) -> SpaceComparison:
    """Decide whether Ḟ^{α₁}_{p₁,q₁}(A) = Ḟ^{α₂}_{p₂,q₂}(B).

    The spaces coincide exactly when the triples agree and either A and B are equivalent or
    α = 0, 1 < p < ∞, q = 2 (then both are L^p).
    """
    if tuple(params_a) != tuple(params_b):
        return SpaceComparison(coincide=False, reason=f"parameters differ: {params_a} vs {params_b}")
    alpha, p, q = params_a
    if alpha == 0 and 1 < p < math.inf and q == 2:
        return SpaceComparison(coincide=True, reason="alpha = 0, 1 < p < inf, q = 2: both spaces are L^p")

    verdict = decide_equivalence(A, B, K, slope_tol=slope_tol, cover_cap=cover_cap, workers=workers)
    if verdict.verdict == "equivalent":
        return SpaceComparison(coincide=True, reason="matrices are equivalent", equivalence=verdict)
    if verdict.verdict == "inequivalent":
        return SpaceComparison(coincide=False, reason="matrices are not equivalent", equivalence=verdict)
    return SpaceComparison(coincide=None, reason="equivalence is inconclusive", equivalence=verdict)
