"""Norm experiments on bump atoms: single atoms, det quotients, atom trains, coincidence and maximal forms."""

import logging
import math
from dataclasses import replace

import numpy as np

from ..covers.intersections import cell_ball, intersection_sets
from ..equivalence.decider import decide_equivalence
from ..exceptions import PreconditionError
from ..linalg.models import ExpansiveMatrix
from ..output.report import ExperimentReport, Table
from ..tlnorm.fields import SampledField, TLParams
from ..tlnorm.maximal import maximal_tl_norm, maximal_tl_norm_pinf, peetre_from_magnitude
from ..tlnorm.norms import convolve_dilate, scale_magnitudes, tl_norm_pinf
from ..utils import log_runtime, loglog_slope, spawn_generators
from .atoms import (
    AtomTrain,
    BumpAtom,
    atom_field,
    atom_grid,
    build_bump,
    plant_atoms,
    random_band_field,
    single_atom,
    validate_train,
)
from .context import ExperimentSettings, analyzing_profile, envelope, measure, params_record, relative_change

logger = logging.getLogger(__name__)

# ratios across δ-halvings may drift by this much
_DELTA_DRIFT_TOL = 0.2
# frequency shifts of random fields, in units of 1/radius
_FIELD_SHIFT = 2.0
# pointwise samples below this fraction of the peak are left out of ratio checks
_NOISE_FLOOR = 1e-9


def _report(
    name: str, params: dict[str, object], settings: ExperimentSettings, **matrices: ExpansiveMatrix
) -> ExperimentReport:
    return ExperimentReport(
        name=name,
        params=params,
        seeds=[settings.seed],
        grid={"n_per_axis": settings.n_per_axis, "lattice_density": settings.lattice_density},
        provenance={"settings": settings.to_record(), **{k: m.to_record() for k, m in matrices.items()}},
    )


def _weight(A: ExpansiveMatrix, alpha: float, i: int) -> float:
    return math.exp(alpha * i * A.log_det)


@log_runtime(budget_seconds=300.0)
def experiment_single_atom(
    A: ExpansiveMatrix,
    alpha: float = 0.0,
    p: float = 2.0,
    q: float = 2.0,
    i0_range: tuple[int, int] = (-4, 4),
    settings: ExperimentSettings | None = None,
    coeff: complex = 1.0,
    refine: bool = True,
    halvings: int = 2,
) -> ExperimentReport:
    """‖f‖_{Ḟ^α_{p,q}(A)} / (|det A|^{αi₀}‖f‖_{L^p}) for one atom per cell i₀.

    PASS when the ratio envelope over i₀ stays below the ratio cap, the ratios move by at most the
    stability tolerance under grid doubling, and shrinking δ at i₀ = 0 moves them by at most 20%.
    """
    settings = settings or ExperimentSettings()
    params = TLParams(alpha, p, q)
    prof = analyzing_profile(A, settings)
    bump = build_bump(A.dim)
    report = _report(
        "single_atom",
        {**params_record(alpha, p, q), "i0_range": list(i0_range), "coeff": coeff, "halvings": halvings},
        settings,
        A=A,
    )
    table = Table(name="ratios", columns=["i0", "delta", "n_per_axis", "tl_norm", "lp_norm", "ratio"])
    sizes = [settings.n_per_axis, 2 * settings.n_per_axis] if refine else [settings.n_per_axis]

    def ratio_for(i0: int, n: int, delta: float | None = None) -> tuple[float, float, float, float] | None:
        atom = replace(single_atom(A, i0, settings.shape, settings.theta), coeff=coeff)
        if delta is not None:
            atom = replace(atom, delta=delta)
        f = atom_field([atom], bump, atom_grid(bump, atom.delta, n))
        lp = f.lp_norm(p)
        if lp == 0.0:
            report.notes.append(f"i0={i0}: f = 0, ratio undefined, excluded")
            return None
        norm = measure(f, A, prof, params, settings)
        return atom.delta, norm, lp, norm / (_weight(A, alpha, i0) * lp)

    ratios: dict[tuple[int, int], float] = {}
    for i0 in range(i0_range[0], i0_range[1] + 1):
        for n in sizes:
            value = ratio_for(i0, n)
            if value is not None:
                delta, norm, lp, ratio = value
                table.add(i0, delta, n, norm, lp, ratio)
                ratios[(i0, n)] = ratio
    report.tables.append(table)
    if not ratios:
        report.verdict = "INCONCLUSIVE"
        return report

    base = [r for (_, n), r in ratios.items() if n == sizes[0]]
    spread = envelope(base)
    changes = [relative_change(ratios[(i0, sizes[0])], r) for (i0, n), r in ratios.items() if n != sizes[0]]
    worst_change = max(changes, default=0.0)

    delta_table = Table(name="delta_sweep", columns=["delta", "ratio"])
    delta0 = single_atom(A, 0, settings.shape, settings.theta).delta
    sweep = []
    for m in range(halvings + 1):
        value = ratio_for(0, settings.n_per_axis, delta0 / 2**m)
        if value is not None:
            sweep.append(value[3])
            delta_table.add(value[0], value[3])
    report.tables.append(delta_table)
    drift = envelope(sweep) - 1.0 if sweep else 0.0

    report.notes.append(f"ratio envelope {spread:.4g} (cap {settings.ratio_cap})")
    report.notes.append(f"largest change under grid doubling {worst_change:.3g}")
    report.notes.append(f"drift across delta halvings {drift:.3g}")
    ok = spread < settings.ratio_cap and worst_change <= settings.stability_tol and drift <= _DELTA_DRIFT_TOL
    report.verdict = "PASS" if ok else "FAIL"
    logger.info(f"single_atom {params_record(alpha, p, q)}: envelope {spread:.4g}, verdict {report.verdict}")
    return report


@log_runtime(budget_seconds=300.0)
def experiment_detquotient(
    A: ExpansiveMatrix,
    B: ExpansiveMatrix,
    alpha: float = 0.0,
    beta: float = 0.0,
    p1: float = 2.0,
    p2: float = 2.0,
    q: float = 2.0,
    i_values: tuple[int, ...] = (-1, 0, 1),
    halvings: int = 3,
    settings: ExperimentSettings | None = None,
) -> ExperimentReport:
    """Atoms in (A*)^iQ ∩ (B*)^jP measured in Ḟ^α_{p₁,q}(A) and Ḟ^β_{p₂,q}(B) while δ shrinks.

    The ratio of the two norms behaves like |det A|^{αi}|det B|^{-βj} δ^{d(1/p₂ − 1/p₁)}; the fitted
    exponent in δ must match within the exponent tolerance, and for p₁ = p₂ the det-quotient
    normalized ratios must stay within the ratio cap.

    Raises:
        PreconditionError: If no (A*)^iQ meets any (B*)^jP for the requested i
    """
    settings = settings or ExperimentSettings()
    prof_a, prof_b = analyzing_profile(A, settings), analyzing_profile(B, settings)
    bump = build_bump(A.dim)
    expected = A.dim * (1.0 / p2 - 1.0 / p1)
    report = _report(
        "detquotient",
        {"alpha": alpha, "beta": beta, "p1": p1, "p2": p2, "q": q, "i_values": list(i_values), "halvings": halvings},
        settings,
        A=A,
        B=B,
    )
    sets = intersection_sets(prof_a.cover, prof_b.cover, (min(i_values), max(i_values)), workers=settings.workers)
    ratios = Table(name="ratios", columns=["i", "j", "delta", "norm_a", "norm_b", "ratio", "normalized"])
    fits = Table(name="exponents", columns=["i", "j", "slope", "expected"])
    normalized: list[float] = []
    slopes: list[float] = []

    for i in i_values:
        candidates = [(j, cell_ball(prof_a.cover, i, prof_b.cover, j, centered=True)) for j in sets.J.get(i, [])]
        balls = [(j, ball) for j, ball in candidates if ball is not None]
        if not balls:
            continue
        j, (eta, radius) = max(balls, key=lambda item: item[1][1])
        deltas, values = [], []
        for m in range(halvings + 1):
            delta = 0.5 * radius / 2**m
            f = atom_field([BumpAtom(delta=delta, eta=eta)], bump, atom_grid(bump, delta, settings.n_per_axis))
            norm_a = measure(f, A, prof_a, TLParams(alpha, p1, q), settings)
            norm_b = measure(f, B, prof_b, TLParams(beta, p2, q), settings)
            ratio = norm_a / norm_b
            scaled = ratio * _weight(B, beta, j) / _weight(A, alpha, i)
            ratios.add(i, j, delta, norm_a, norm_b, ratio, scaled)
            deltas.append(delta)
            values.append(ratio)
            normalized.append(scaled)
        slope = loglog_slope(deltas, values)
        fits.add(i, j, slope, expected)
        slopes.append(slope)

    if not slopes:
        raise PreconditionError(f"no intersecting cells for i in {list(i_values)}")
    report.tables.extend([ratios, fits])
    slopes_ok = all(abs(s - expected) <= settings.exponent_tol for s in slopes)
    bounded = expected != 0.0 or envelope(normalized) < settings.ratio_cap
    report.notes.append(f"expected delta exponent {expected:.4g}, fitted {[round(s, 4) for s in slopes]}")
    report.verdict = "PASS" if slopes_ok and bounded else "FAIL"
    return report


def _lq(values: np.ndarray, q: float) -> float:
    return float(np.linalg.norm(values, ord=q))


def train_rhs(train: AtomTrain, A: ExpansiveMatrix, alpha: float, p: float, q: float, coeffs: np.ndarray) -> float:
    """δ^{d(1−1/p)} ‖(|det A|^{αi_k}|c_k|)_k‖_{ℓ^q}."""
    weights = np.array([_weight(A, alpha, i) for i in train.scale_indices])
    exponent = A.dim * (1.0 - (0.0 if math.isinf(p) else 1.0 / p))
    return float(train.delta**exponent * _lq(weights * np.abs(coeffs), q))


@log_runtime(budget_seconds=300.0)
def experiment_atom_train(
    A: ExpansiveMatrix,
    alpha: float = 0.0,
    p: float = 2.0,
    q: float = 2.0,
    Ks: tuple[int, ...] = (2, 4, 8),
    n_draws: int = 3,
    train: AtomTrain | None = None,
    coeffs: np.ndarray | None = None,
    settings: ExperimentSettings | None = None,
) -> ExperimentReport:
    """‖Σ_k c_k M_{η_k}φ_δ‖_{Ḟ^α_{p,q}(A)} against δ^{d(1−1/p)}‖(|det A|^{αi_k}|c_k|)‖_{ℓ^q}.

    Coefficients are all ones plus ``n_draws`` complex Gaussian draws per K, or exactly ``coeffs``
    when given. PASS when the ratio envelope stays below the ratio cap.

    Raises:
        PlantingError: If a supplied train violates a planting condition
    """
    settings = settings or ExperimentSettings()
    params = TLParams(alpha, p, q)
    prof = analyzing_profile(A, settings)
    bump = build_bump(A.dim)
    if coeffs is not None:
        Ks = (len(coeffs),)
    if train is None:
        train = plant_atoms(A, None, max(Ks), profile=bump, shape=settings.shape, theta=settings.theta)
    else:
        validate_train(train, A, profile=bump, shape=settings.shape, theta=settings.theta)
    grid = atom_grid(bump, train.delta, settings.n_per_axis)
    report = _report(
        "atom_train", {**params_record(alpha, p, q), "Ks": list(Ks), "n_draws": n_draws}, settings, A=A
    )
    report.params["train"] = train.to_record()
    table = Table(name="ratios", columns=["K", "draw", "lhs", "rhs", "ratio"])
    generators = spawn_generators(settings.seed, n_draws)
    ratios = []

    for K in Ks:
        sub = train.head(K)
        draws: list[tuple[str, np.ndarray]]
        if coeffs is not None:
            draws = [("given", np.asarray(coeffs, dtype=complex))]
        else:
            draws = [("unit", np.ones(K, dtype=complex))]
            draws += [
                (f"random{r}", rng.standard_normal(K) + 1j * rng.standard_normal(K))
                for r, rng in enumerate(generators)
            ]
        for label, c in draws:
            rhs = train_rhs(sub, A, alpha, p, q, c)
            if rhs == 0.0:
                report.notes.append(f"K={K}, {label}: all coefficients vanish, excluded")
                continue
            lhs = measure(sub.field(bump, grid, c), A, prof, params, settings)
            table.add(K, label, lhs, rhs, lhs / rhs)
            ratios.append(lhs / rhs)

    report.tables.append(table)
    if not ratios:
        report.verdict = "INCONCLUSIVE"
        return report
    spread = envelope(ratios)
    report.notes.append(f"ratio envelope {spread:.4g} (cap {settings.ratio_cap})")
    report.verdict = "PASS" if spread < settings.ratio_cap else "FAIL"
    return report


def _battery_member(band: tuple[np.ndarray, float], n: int, seed: np.random.SeedSequence) -> SampledField:
    eta, radius = band
    bump = build_bump(eta.size)
    grid = atom_grid(bump, radius, n, padding=_FIELD_SHIFT)
    return random_band_field(bump, grid, eta, radius, np.random.default_rng(seed), shift=_FIELD_SHIFT)


def _sample_bands(
    A: ExpansiveMatrix, settings: ExperimentSettings, count: int, rng: np.random.Generator
) -> list[tuple[np.ndarray, float]]:
    """Random (η, r) with B_r(η) inside (A*)^iQ for i in [-2, 2], r at least an eighth of the best radius."""
    cover = analyzing_profile(A, settings).cover
    bands = []
    while len(bands) < count:
        i = int(rng.integers(-2, 3))
        best = cell_ball(cover, i)
        eta = cover.sample_points(1, rng, index=i)[0]
        margin = cover.ball_margin(eta, i)
        if best is not None and margin >= 0.25 * best[1]:
            bands.append((eta, 0.5 * margin))
    return bands


def ab_swap_constant(
    f: SampledField,
    A: ExpansiveMatrix,
    B: ExpansiveMatrix,
    settings: ExperimentSettings,
    params: TLParams,
    n_points: int,
    rng: np.random.Generator,
) -> float:
    """Smallest C with |det A|^{αi}|f ∗ φ_i(x)| ≤ C Σ_{j∈J_i} |det B|^{αj} ψ**_{j,β}f(x) at sampled x."""
    prof_a, prof_b = analyzing_profile(A, settings), analyzing_profile(B, settings)
    magnitudes = scale_magnitudes(f, prof_a, params, settings.workers)
    if not magnitudes:
        return 0.0
    scales = sorted(magnitudes)
    sets = intersection_sets(prof_a.cover, prof_b.cover, (scales[0], scales[-1]))
    beta = params.peetre_beta()
    size = f.grid.n_per_axis**f.grid.dim
    points = rng.choice(size, size=min(n_points, size), replace=False)
    peak = max(float(np.max(m)) * _weight(A, params.alpha, i) for i, m in magnitudes.items())
    constant = 0.0
    maxima: dict[int, np.ndarray] = {}
    for i in scales:
        lhs = _weight(A, params.alpha, i) * magnitudes[i].ravel()[points]
        rhs = np.zeros(points.size)
        for j in sets.J[i]:
            if j not in maxima:
                magnitude = np.abs(convolve_dilate(f, B, prof_b, j).samples)
                maxima[j] = peetre_from_magnitude(magnitude, B, f.grid, j, beta).ravel()
            rhs += _weight(B, params.alpha, j) * maxima[j][points]
        live = lhs > _NOISE_FLOOR * peak
        if not np.any(live):
            continue
        if np.any(rhs[live] == 0.0):
            return math.inf
        constant = max(constant, float(np.max(lhs[live] / rhs[live])))
    return constant


@log_runtime(budget_seconds=600.0)
def experiment_coincidence(
    A: ExpansiveMatrix,
    B: ExpansiveMatrix,
    alpha: float = 0.0,
    p: float = 2.0,
    q: float = 2.0,
    n_fields: int = 20,
    refinements: int = 3,
    n_points: int = 1000,
    settings: ExperimentSettings | None = None,
    depth: int = 40,
) -> ExperimentReport:
    """Norm ratios ‖f‖_{Ḟ(A)} / ‖f‖_{Ḟ(B)} over random band-limited fields and a spread atom train.

    PASS when the ratio envelope stays below the ratio cap on every grid refinement and moves by at
    most the stability tolerance between refinements, and the pointwise A-to-B maximal bound holds
    with a finite constant on the first battery field.

    Raises:
        PreconditionError: If A and B are not judged equivalent
    """
    settings = settings or ExperimentSettings()
    verdict = decide_equivalence(A, B, depth, shape=settings.shape, workers=settings.workers)
    if verdict.verdict != "equivalent":
        raise PreconditionError(f"coincidence needs an equivalent pair, decider says {verdict.verdict}")
    params = TLParams(alpha, p, q)
    prof_a, prof_b = analyzing_profile(A, settings), analyzing_profile(B, settings)
    bump = build_bump(A.dim)
    rng = np.random.default_rng(settings.seed)
    bands = _sample_bands(A, settings, n_fields, rng)
    seeds = np.random.SeedSequence(settings.seed).spawn(n_fields)
    train = plant_atoms(A, B, 2, "spread", profile=bump, shape=settings.shape, theta=settings.theta)

    report = _report(
        "coincidence",
        {**params_record(alpha, p, q), "n_fields": n_fields, "refinements": refinements},
        settings,
        A=A,
        B=B,
    )
    table = Table(name="ratios", columns=["n_per_axis", "member", "norm_a", "norm_b", "ratio"])
    envelopes = Table(name="envelopes", columns=["n_per_axis", "min_ratio", "max_ratio", "envelope"])
    spreads = []
    for level in range(refinements):
        n = settings.n_per_axis * 2**level
        members = [(f"field{k}", _battery_member(band, n, seeds[k])) for k, band in enumerate(bands)]
        members.append(("train", train.field(bump, atom_grid(bump, train.delta, n))))
        ratios = []
        for label, f in members:
            norm_a = measure(f, A, prof_a, params, settings)
            norm_b = measure(f, B, prof_b, params, settings)
            table.add(n, label, norm_a, norm_b, norm_a / norm_b)
            ratios.append(norm_a / norm_b)
        spreads.append(envelope(ratios))
        envelopes.add(n, min(ratios), max(ratios), spreads[-1])

    first = _battery_member(bands[0], settings.n_per_axis, seeds[0])
    constant = ab_swap_constant(first, A, B, settings, params, n_points, np.random.default_rng(settings.seed))
    report.tables.extend([table, envelopes])
    report.params["ab_swap_constant"] = constant

    stable = all(relative_change(spreads[0], s) <= settings.stability_tol for s in spreads[1:])
    bounded = all(s < settings.ratio_cap for s in spreads)
    report.notes.append(f"envelopes per refinement {[round(s, 4) for s in spreads]}")
    report.notes.append(f"pointwise A-to-B maximal constant {constant:.4g}")
    report.verdict = "PASS" if stable and bounded and math.isfinite(constant) else "FAIL"
    return report


@log_runtime(budget_seconds=300.0)
def experiment_maximal(
    A: ExpansiveMatrix,
    alpha: float = 0.0,
    p: float = 2.0,
    q: float = 2.0,
    beta: float | None = None,
    i0_range: tuple[int, int] = (-2, 2),
    settings: ExperimentSettings | None = None,
) -> ExperimentReport:
    """Maximal quasi-norms against the plain ones, and parallelepiped against ellipsoid averages at p = ∞.

    φ**_{i,β}f ≥ |f ∗ φ_i| pointwise, so the maximal form may not fall below the plain one. PASS when
    that holds on every atom and both ratio envelopes stay below the ratio cap.

    Raises:
        PreconditionError: If β ≤ max(1/p, 1/q)
    """
    settings = settings or ExperimentSettings()
    params = TLParams(alpha, p, q, beta=beta)
    prof = analyzing_profile(A, settings)
    bump = build_bump(A.dim)
    record = {**params_record(alpha, p, q), "beta": params.peetre_beta(), "i0_range": list(i0_range)}
    report = _report("maximal", record, settings, A=A)
    table = Table(name="ratios", columns=["i0", "plain", "maximal", "maximal_ratio", "box_ratio"])
    maximal_ratios, box_ratios = [], []
    dominated = True
    for i0 in range(i0_range[0], i0_range[1] + 1):
        atom = single_atom(A, i0, settings.shape, settings.theta)
        f = atom_field([atom], bump, atom_grid(bump, atom.delta, settings.n_per_axis))
        plain = measure(f, A, prof, params, settings)
        if math.isinf(p):
            maximal = maximal_tl_norm_pinf(f, A, prof, params, settings.lattice_density, workers=settings.workers)
        else:
            maximal = maximal_tl_norm(f, A, prof, params, workers=settings.workers)
        box_ratio = math.nan
        if math.isinf(p) and not math.isinf(q):
            box = tl_norm_pinf(f, A, prof, params, settings.lattice_density, "parallelepiped", settings.workers)
            box_ratio = box / plain
            box_ratios.append(box_ratio)
        table.add(i0, plain, maximal, maximal / plain, box_ratio)
        maximal_ratios.append(maximal / plain)
        dominated = dominated and maximal >= plain * (1.0 - 1e-9)

    report.tables.append(table)
    spread = envelope(maximal_ratios)
    box_spread = envelope(box_ratios) if box_ratios else 1.0
    report.notes.append(f"maximal/plain envelope {spread:.4g}, parallelepiped/ellipsoid envelope {box_spread:.4g}")
    ok = dominated and spread < settings.ratio_cap and box_spread < settings.ratio_cap
    report.verdict = "PASS" if ok else "FAIL"
    return report
