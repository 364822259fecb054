"""The acceptance battery: every criterion in dependency order, one suite entry each."""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..constants import POU_TOL, VOLUME_TOL
from ..covers.profiles import partition_of_unity_defect
from ..equivalence.decider import adjoint_consistency, decide_equivalence
from ..linalg.expansive import build_ellipsoid, certify_expansive, contraction_norm
from ..linalg.models import ExpansiveMatrix
from ..output.report import ExperimentReport, SuiteEntry, SuiteReport, Table, Verdict, write_report
from ..quasinorm.step import StepQuasiNorm, sample_shell_points
from ..utils import log_runtime
from .context import ExperimentSettings, analyzing_profile
from .convolution import experiment_convolution_battery, experiment_convolution_envelope
from .khintchine import experiment_khintchine_battery, experiment_q_detection
from .norm_experiments import experiment_atom_train, experiment_coincidence, experiment_single_atom
from .sequences import experiment_pairing_battery, experiment_sequence_oracles

logger = logging.getLogger(__name__)

BATTERY_ROWS: dict[str, list[list[float]]] = {
    "two_id": [[2.0, 0.0], [0.0, 2.0]],
    "three_id": [[3.0, 0.0], [0.0, 3.0]],
    "diag24": [[2.0, 0.0], [0.0, 4.0]],
    "jordan2": [[2.0, 1.0], [0.0, 2.0]],
    "two_rot": [[0.0, -2.0], [2.0, 0.0]],
    "diag42_rot": [[0.0, -4.0], [2.0, 0.0]],
    "diag235": [[2.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 5.0]],
}
IDENTITY_MATRICES = ("two_id", "three_id", "diag24", "jordan2", "two_rot", "diag235")
EQUIVALENT_PAIRS = (("two_id", "three_id"), ("two_id", "two_rot"))
INEQUIVALENT_PAIRS = (("two_id", "diag24"), ("two_id", "jordan2"), ("diag24", "diag42_rot"))

SINGLE_ATOM_PARAMS = (
    (0.0, 2.0, 2.0),
    (1.0, 2.0, 2.0),
    (0.0, 1.0, math.inf),
    (0.0, math.inf, math.inf),
    (1.0, math.inf, 2.0),
)
TRAIN_QS = (1.0, 2.0, math.inf)
DETECTION_QS = (1.0, 2.0)
COINCIDENCE_PARAMS = ((0.0, 2.0, 2.0), (1.0, 1.0, 1.0), (0.0, math.inf, math.inf))

_IDENTITY_POINTS = 1000


def battery_matrices() -> dict[str, ExpansiveMatrix]:
    return {name: certify_expansive(rows) for name, rows in BATTERY_ROWS.items()}


def combine_reports(name: str, reports: list[ExperimentReport]) -> ExperimentReport:
    """One report holding the tables of several runs; FAIL beats INCONCLUSIVE beats PASS."""
    combined = ExperimentReport(name=name, params={"runs": [r.name for r in reports]})
    for index, report in enumerate(reports):
        for table in report.tables:
            label = f"{index}.{report.name}.{table.name}"
            combined.tables.append(Table(name=label, columns=table.columns, rows=table.rows))
        combined.seeds.extend(s for s in report.seeds if s not in combined.seeds)
        combined.notes.extend(f"[{index}] {note}" for note in report.notes)
        combined.notes.append(f"[{index}] {report.name} {report.params}: {report.verdict}")
    verdicts = {r.verdict for r in reports}
    combined.verdict = "FAIL" if "FAIL" in verdicts else "INCONCLUSIVE" if "INCONCLUSIVE" in verdicts else "PASS"
    return combined


def check_quasinorm_identities(matrices: dict[str, ExpansiveMatrix], seed: int = 0) -> ExperimentReport:
    """ρ_A(0) = 0 and the exact index shift ρ_A(Ax) = |det A|ρ_A(x) on sampled points."""
    report = ExperimentReport(name="quasinorm_identities", params={"points": _IDENTITY_POINTS}, seeds=[seed])
    table = Table(name="identities", columns=["matrix", "rho_at_zero", "shift_mismatches"])
    ok = True
    for name, A in matrices.items():
        q = StepQuasiNorm.for_matrix(A)
        points = sample_shell_points(q, _IDENTITY_POINTS, np.random.default_rng(seed))
        shifted = q.scale_indices(points @ A.entries.T)
        mismatches = int(np.sum(shifted != q.scale_indices(points) + 1))
        at_zero = q.rho(np.zeros(A.dim))
        table.add(name, at_zero, mismatches)
        ok = ok and at_zero == 0.0 and mismatches == 0
    report.tables.append(table)
    report.verdict = "PASS" if ok else "FAIL"
    return report


def check_ellipsoid_certificates(matrices: dict[str, ExpansiveMatrix]) -> ExperimentReport:
    """vol(Ω) = 1 and ‖A⁻¹‖_S ≤ θ < 1 for every matrix."""
    report = ExperimentReport(name="ellipsoid_certificates", params={"volume_tol": VOLUME_TOL})
    table = Table(name="certificates", columns=["matrix", "volume", "contraction", "theta"])
    ok = True
    for name, A in matrices.items():
        omega = build_ellipsoid(A)
        contraction = contraction_norm(A, omega)
        table.add(name, omega.volume(), contraction, omega.theta)
        ok = ok and abs(omega.volume() - 1.0) <= VOLUME_TOL and contraction <= omega.theta + 1e-12 and omega.theta < 1.0
    report.tables.append(table)
    report.verdict = "PASS" if ok else "FAIL"
    return report


def check_equivalence_battery(
    matrices: dict[str, ExpansiveMatrix], depth: int = 40, workers: int = 1
) -> ExperimentReport:
    """Known equivalent and inequivalent pairs, each with its adjoint consistency."""
    report = ExperimentReport(name="equivalence_battery", params={"depth": depth})
    table = Table(name="pairs", columns=["A", "B", "expected", "verdict", "norm_trend", "cover_trend", "adjoint"])
    ok = True
    expectations = [(pair, "equivalent") for pair in EQUIVALENT_PAIRS]
    expectations += [(pair, "inequivalent") for pair in INEQUIVALENT_PAIRS]
    for (a, b), expected in expectations:
        verdict = decide_equivalence(matrices[a], matrices[b], depth, workers=workers)
        consistent = adjoint_consistency(matrices[a], matrices[b], depth, workers=workers)
        table.add(a, b, expected, verdict.verdict, verdict.norm_trend, verdict.cover_trend, consistent)
        ok = ok and verdict.verdict == expected and consistent
    report.tables.append(table)
    report.verdict = "PASS" if ok else "FAIL"
    return report


def check_partitions_of_unity(matrices: dict[str, ExpansiveMatrix], settings: ExperimentSettings) -> ExperimentReport:
    report = ExperimentReport(name="partition_of_unity", params={"pou_tol": POU_TOL}, seeds=[settings.seed])
    table = Table(name="defects", columns=["matrix", "defect"])
    ok = True
    for name, A in matrices.items():
        defect = partition_of_unity_defect(analyzing_profile(A, settings), settings.band, 1000, settings.seed)
        table.add(name, defect)
        ok = ok and defect <= settings.pou_tol
    report.tables.append(table)
    report.verdict = "PASS" if ok else "FAIL"
    return report


@dataclass
class Criterion:
    """One acceptance criterion: a label and the callable producing its report."""

    label: str
    run: Callable[[], ExperimentReport]


def acceptance_criteria(settings: ExperimentSettings, depth: int = 40) -> list[Criterion]:
    """The battery in dependency order."""
    m = battery_matrices()
    identity = {name: m[name] for name in IDENTITY_MATRICES}
    two_id, diag24, two_rot = m["two_id"], m["diag24"], m["two_rot"]

    def single_atoms() -> ExperimentReport:
        return combine_reports(
            "single_atom",
            [experiment_single_atom(two_id, a, p, q, settings=settings) for a, p, q in SINGLE_ATOM_PARAMS],
        )

    def trains() -> ExperimentReport:
        reports = [experiment_atom_train(two_id, 0.0, 2.0, q, settings=settings) for q in TRAIN_QS]
        return combine_reports("atom_train", reports)

    def detection() -> ExperimentReport:
        reports = [
            experiment_q_detection(two_id, diag24, 2.0, q, settings=settings, depth=depth) for q in DETECTION_QS
        ]
        return combine_reports("q_detection", reports)

    def coincidence() -> ExperimentReport:
        reports = [
            experiment_coincidence(two_rot, two_id, a, p, q, settings=settings, depth=depth)
            for a, p, q in COINCIDENCE_PARAMS
        ]
        return combine_reports("coincidence", reports)

    def convolution() -> ExperimentReport:
        return combine_reports(
            "convolution",
            [
                experiment_convolution_battery(settings=settings),
                experiment_convolution_envelope(two_id, settings=settings),
            ],
        )

    def sequences() -> ExperimentReport:
        return combine_reports(
            "cube_sequences",
            [
                experiment_sequence_oracles([two_id, diag24], seed=settings.seed, workers=settings.workers),
                experiment_pairing_battery(two_id, seed=settings.seed, workers=settings.workers),
            ],
        )

    def determinism() -> ExperimentReport:
        """Repeat the cheap criteria and compare the deterministic payloads."""
        def cheap() -> list[ExperimentReport]:
            return [
                check_quasinorm_identities(identity, settings.seed),
                experiment_khintchine_battery(seed=settings.seed),
            ]

        first, second = cheap(), cheap()
        report = ExperimentReport(name="determinism", seeds=[settings.seed])
        table = Table(name="repeats", columns=["report", "identical"])
        for a, b in zip(first, second, strict=True):
            table.add(a.name, a.payload() == b.payload())
        report.tables.append(table)
        report.verdict = "PASS" if all(row[1] for row in table.rows) else "FAIL"
        return report

    return [
        Criterion("1 quasi-norm identities", lambda: check_quasinorm_identities(identity, settings.seed)),
        Criterion("2 ellipsoid certificates", lambda: check_ellipsoid_certificates(identity)),
        Criterion("3 equivalence classification", lambda: check_equivalence_battery(m, depth, settings.workers)),
        Criterion("4 partition of unity", lambda: check_partitions_of_unity(identity, settings)),
        Criterion("5 single atoms", single_atoms),
        Criterion("6 atom trains", trains),
        Criterion("7 khintchine", lambda: experiment_khintchine_battery(seed=settings.seed)),
        Criterion("8 summability detection", detection),
        Criterion("9 coincidence", coincidence),
        Criterion("10 convolution inequalities", convolution),
        Criterion("11 sequence oracles", sequences),
        Criterion("12 determinism", determinism),
    ]


@log_runtime(budget_seconds=2400.0)
def run_suite(
    settings: ExperimentSettings | None = None,
    depth: int = 40,
    out_dir: str | Path | None = None,
    only: list[str] | None = None,
    provenance: dict[str, object] | None = None,
) -> SuiteReport:
    """Run the acceptance battery; a criterion that raises is recorded as an errored FAIL.

    Each finished report is written to ``out_dir`` straight away, so partial results survive a failure.
    """
    settings = settings or ExperimentSettings()
    suite = SuiteReport(provenance={"settings": settings.to_record(), **(provenance or {})})
    for criterion in acceptance_criteria(settings, depth):
        number = criterion.label.split()[0]
        if only and number not in only:
            continue
        logger.info(f"Running criterion {criterion.label}")
        try:
            report = criterion.run()
            entry = SuiteEntry(criterion=criterion.label, verdict=report.verdict, report=report)
        except Exception as e:
            logger.exception(f"Criterion {criterion.label} errored: {e}")
            entry = SuiteEntry(criterion=criterion.label, verdict="FAIL", error=str(e))
        suite.entries.append(entry)
        if out_dir is not None and entry.report is not None:
            write_report(entry.report, out_dir)

    suite.settle()
    if out_dir is not None:
        write_report(suite, out_dir)
    logger.info(f"Suite verdict: {suite.verdict} ({len(suite.entries)} criteria)")
    return suite


def verdict_counts(suite: SuiteReport) -> dict[Verdict, int]:
    counts: dict[Verdict, int] = {"PASS": 0, "FAIL": 0, "INCONCLUSIVE": 0}
    for entry in suite.entries:
        counts[entry.verdict] += 1
    return counts
