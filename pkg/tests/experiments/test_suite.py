"""Tests for the acceptance battery runner."""

import json

import numpy as np
import pytest

from anisotropic_tl.exceptions import PreconditionError
from anisotropic_tl.experiments.context import ExperimentSettings
from anisotropic_tl.experiments.suite import (
    BATTERY_ROWS,
    Criterion,
    acceptance_criteria,
    battery_matrices,
    check_ellipsoid_certificates,
    combine_reports,
    run_suite,
    verdict_counts,
)
from anisotropic_tl.output.report import ExperimentReport, Table


def _report(name, verdict, seed=0):
    report = ExperimentReport(name=name, verdict=verdict, seeds=[seed], notes=[f"{name} note"])
    table = Table(name="t", columns=["x"])
    table.add(1.0)
    report.tables.append(table)
    return report


class TestBattery:
    """Tests for the battery matrices and cheap checks."""

    def test_matrices_are_certified(self):
        """Test every battery matrix certifies."""
        matrices = battery_matrices()

        assert set(matrices) == set(BATTERY_ROWS)
        assert matrices["diag235"].dim == 3

    def test_ellipsoid_certificates(self, two_id, diag24, jordan2):
        """Test the certificate check passes on 2×2 matrices."""
        report = check_ellipsoid_certificates({"two_id": two_id, "diag24": diag24, "jordan2": jordan2})

        assert report.verdict == "PASS"
        assert len(report.table("certificates").rows) == 3

    def test_criteria_order(self):
        """Test the twelve criteria are numbered in order."""
        labels = [c.label for c in acceptance_criteria(ExperimentSettings())]

        assert [label.split()[0] for label in labels] == [str(n) for n in range(1, 13)]


class TestCombineReports:
    """Tests for merging several runs into one report."""

    @pytest.mark.parametrize(
        ("verdicts", "expected"),
        [
            (["PASS", "PASS"], "PASS"),
            (["PASS", "INCONCLUSIVE"], "INCONCLUSIVE"),
            (["INCONCLUSIVE", "FAIL"], "FAIL"),
        ],
    )
    def test_verdict(self, verdicts, expected):
        """Test FAIL beats INCONCLUSIVE beats PASS."""
        reports = [_report(f"r{k}", v) for k, v in enumerate(verdicts)]

        assert combine_reports("combined", reports).verdict == expected

    def test_tables_and_seeds(self):
        """Test tables are relabelled and seeds deduplicated."""
        combined = combine_reports("combined", [_report("a", "PASS", 1), _report("b", "PASS", 1)])

        assert [t.name for t in combined.tables] == ["0.a.t", "1.b.t"]
        assert combined.seeds == [1]
        assert "[1] b note" in combined.notes


class TestRunSuite:
    """Tests for run_suite with the battery replaced by stubs."""

    @pytest.fixture
    def stub_criteria(self, mocker):
        def fail():
            raise PreconditionError("pair is not inequivalent")

        criteria = [
            Criterion("1 first", lambda: _report("first", "PASS")),
            Criterion("2 second", fail),
            Criterion("3 third", lambda: _report("third", "INCONCLUSIVE")),
        ]
        return mocker.patch("anisotropic_tl.experiments.suite.acceptance_criteria", return_value=criteria)

    def test_errored_criterion_fails(self, stub_criteria):
        """Test a raising criterion is recorded as an errored FAIL."""
        suite = run_suite(ExperimentSettings(), depth=4)

        assert suite.verdict == "FAIL"
        assert suite.entries[1].error == "pair is not inequivalent"
        assert verdict_counts(suite) == {"PASS": 1, "FAIL": 1, "INCONCLUSIVE": 1}
        stub_criteria.assert_called_once_with(ExperimentSettings(), 4)

    def test_only_selection(self, stub_criteria):
        """Test only the selected criteria run."""
        suite = run_suite(only=["1"])

        assert [e.criterion for e in suite.entries] == ["1 first"]
        assert suite.verdict == "PASS"

    def test_reports_written(self, stub_criteria, tmp_path):
        """Test each report and the suite summary are written."""
        run_suite(out_dir=tmp_path, only=["1", "3"], provenance={"config": "x.toml"})

        assert (tmp_path / "first.json").exists()
        assert (tmp_path / "third.t.csv").exists()
        summary = json.loads((tmp_path / "suite.json").read_text())
        assert summary["verdict"] == "INCONCLUSIVE"
        assert summary["provenance"]["config"] == "x.toml"
        assert "started_at" not in summary

    def test_numerical_error_recorded(self, mocker, tmp_path):
        """Test an error from outside the toolkit is an errored FAIL and the summary is still written."""

        def singular():
            raise np.linalg.LinAlgError("Singular matrix")

        criteria = [
            Criterion("1 first", lambda: _report("first", "PASS")),
            Criterion("2 second", singular),
        ]
        mocker.patch("anisotropic_tl.experiments.suite.acceptance_criteria", return_value=criteria)

        suite = run_suite(out_dir=tmp_path)

        assert suite.entries[1].verdict == "FAIL"
        assert suite.entries[1].error == "Singular matrix"
        summary = json.loads((tmp_path / "suite.json").read_text())
        assert summary["verdict"] == "FAIL"
        assert len(summary["entries"]) == 2
