"""Tests for the equivalence decision and space classification."""

import math

import pytest

from anisotropic_tl.constants import COVER_CAP
from anisotropic_tl.equivalence.decider import (
    _cover_levels,
    _cover_trend,
    adjoint_consistency,
    c_exponent,
    classify_spaces,
    decide_equivalence,
    det_quotient_bound,
    inclusion_window,
    inclusion_window_size,
    power_norm_table,
)
from anisotropic_tl.exceptions import HypothesisError
from anisotropic_tl.linalg.expansive import certify_expansive


class TestPowerNorms:
    """Tests for the power-norm table."""

    def test_c_exponent(self, two_id, diag24):
        """Test c = ln|det A| / ln|det B|."""
        assert math.isclose(c_exponent(two_id, diag24), 2.0 / 3.0)

    def test_table_for_identical_matrices(self, jordan2):
        """Test ‖A^{-k}A^k‖ = 1 at every k."""
        table = power_norm_table(jordan2, jordan2, 5)

        assert [k for k, _ in table] == list(range(-5, 6))
        assert all(math.isclose(v, 1.0, rel_tol=1e-9) for _, v in table)

    def test_table_floors_toward_minus_infinity(self, two_id, diag24):
        """Test k = -1 pairs with j = ⌊-2/3⌋ = -1."""
        table = dict(power_norm_table(two_id, diag24, 1))

        # A^{1} B^{-1} = diag(1, 1/2)
        assert math.isclose(table[-1], 1.0)


class TestDecideEquivalence:
    """Tests for decide_equivalence."""

    def test_matrix_equivalent_to_itself(self, jordan2):
        """Test a matrix is equivalent to itself."""
        verdict = decide_equivalence(jordan2, jordan2, K=16)

        assert verdict.verdict == "equivalent"
        assert verdict.sweep_range == 16
        assert verdict.c_exponent == 1.0

    def test_rotation_equivalent_to_scaling(self, two_id, two_rot):
        """Test 2I and the scaled rotation are equivalent."""
        assert decide_equivalence(two_id, two_rot, K=16).verdict == "equivalent"

    def test_powers_equivalent(self, two_id):
        """Test A and A² are equivalent."""
        square = certify_expansive([[4.0, 0.0], [0.0, 4.0]])

        assert decide_equivalence(two_id, square, K=16).verdict == "equivalent"

    def test_different_eccentricity_inequivalent(self, two_id, diag24):
        """Test 2I and diag(2, 4) are inequivalent with a growing power-norm slope."""
        verdict = decide_equivalence(two_id, diag24, K=16)

        assert verdict.verdict == "inequivalent"
        assert verdict.growth_slope > 0.1

    def test_dimension_mismatch(self, two_id):
        """Test matrices of different dimension raise ValueError."""
        with pytest.raises(ValueError, match="dimensions"):
            decide_equivalence(two_id, certify_expansive([[3.0]]))

    def test_nonpositive_depth(self, two_id):
        """Test K < 1 raises ValueError."""
        with pytest.raises(ValueError, match="depth"):
            decide_equivalence(two_id, two_id, K=0)

    def test_growing_norms_with_unclear_covers_inconclusive(self, mocker, two_id, diag24):
        """Test one growing criterion without the other leaves the verdict open."""
        mocker.patch("anisotropic_tl.equivalence.decider._cover_trend", return_value="unclear")

        verdict = decide_equivalence(two_id, diag24, K=16)

        assert verdict.norm_trend == "growing"
        assert verdict.verdict == "inconclusive"
        assert verdict.diagnostics == ["power norms growing, cover counts unclear"]

    def test_slowly_diverging_pair_not_inequivalent(self, two_id):
        """Test 2I against diag(2, 2.15): growing norms but unsettled covers give no verdict."""
        near = certify_expansive([[2.0, 0.0], [0.0, 2.15]])

        verdict = decide_equivalence(two_id, near, K=40)

        assert verdict.norm_trend == "growing"
        assert verdict.cover_trend == "unclear"
        assert verdict.verdict == "inconclusive"
        assert verdict.diagnostics == ["power norms growing, cover counts unclear"]

    def test_cover_levels_start_populated(self, two_id, diag24):
        """Test the first cover level already has both index sets populated."""
        verdict = decide_equivalence(two_id, diag24, K=20)

        _, max_j, max_i = verdict.cover_levels[0]
        assert max_j > 0
        assert max_i > 0
        assert verdict.cover_levels[-1][0] == 20

    def test_record_is_serializable(self, two_id):
        """Test the verdict record carries the verdict and tables."""
        record = decide_equivalence(two_id, two_id, K=4).to_record()

        assert record["verdict"] == "equivalent"
        assert len(record["power_norm_table"]) == 9

    def test_adjoint_consistency(self, two_id, diag24):
        """Test transposing both matrices keeps the verdict."""
        assert adjoint_consistency(two_id, diag24, K=8)


class TestCoverTrend:
    """Tests for the cover-count trend and level selection."""

    @pytest.mark.parametrize(
        ("counts", "trend"),
        [
            ([(5, 2, 2), (10, 3, 3), (20, 4, 4), (40, 5, 5)], "growing"),
            ([(5, 3, 3), (10, 3, 3), (20, 3, 3), (40, 3, 3)], "bounded"),
            ([(5, 2, 2), (10, 3, 3), (20, 4, 4), (40, 4, 3)], "bounded"),
            ([(5, 5, 5), (10, 5, 5), (20, 6, 6), (40, 8, 8)], "unclear"),
            ([(5, 5, 5), (10, 50, 50)], "growing"),
        ],
    )
    def test_trend(self, counts, trend):
        """Test growth, saturation and the undecided middle ground."""
        assert _cover_trend(counts, COVER_CAP) == trend

    def test_levels_skip_empty_sides(self, mocker):
        """Test doubling levels with an empty index set are dropped until both sides fill."""
        by_level = {2: (5, 0), 5: (6, 2), 10: (7, 3), 20: (8, 4)}
        mocker.patch(
            "anisotropic_tl.equivalence.decider._cover_counts",
            side_effect=lambda covers, level, workers: (*by_level[level], None),
        )

        assert _cover_levels(mocker.Mock(), 20, 1) == [(5, 6, 2), (10, 7, 3), (20, 8, 4)]

    def test_levels_keep_top_level(self, mocker):
        """Test the sweep depth itself is always reported."""
        mocker.patch("anisotropic_tl.equivalence.decider._cover_counts", return_value=(0, 0, None))

        assert _cover_levels(mocker.Mock(), 8, 1) == [(8, 0, 0)]


class TestDetQuotient:
    """Tests for the determinant quotient and inclusion window."""

    def test_bounded_for_equal_matrices(self, two_id):
        """Test for A = B intersecting dilates differ by at most a few steps."""
        quotient = det_quotient_bound(two_id, two_id, K=8)

        assert not quotient.unbounded
        assert 4.0 <= quotient.value <= 16.0

    def test_window_size_formula(self, two_id, diag24):
        """Test N = max(⌈ln C/(|α| ln|det A|)⌉, ⌈ln C/(|β| ln|det B|)⌉) + 1."""
        assert inclusion_window_size(two_id, diag24, 1.0, 1.0, 4.0) == 2
        assert inclusion_window_size(two_id, diag24, 0.5, 1.0, 4.0) == 3

    def test_window_size_rejects_bad_inputs(self, two_id):
        """Test zero smoothness or C < 1 raise ValueError."""
        with pytest.raises(ValueError):
            inclusion_window_size(two_id, two_id, 0.0, 1.0, 4.0)
        with pytest.raises(ValueError):
            inclusion_window_size(two_id, two_id, 1.0, 1.0, 0.5)

    def test_inclusion_window_verified(self, two_id):
        """Test the window holds with the measured determinant quotient."""
        quotient = det_quotient_bound(two_id, two_id, K=6)

        N = inclusion_window(two_id, two_id, 1.0, 1.0, quotient.value, K=6)

        assert N >= 1

    def test_weight_hypothesis_counterexample(self, two_id):
        """Test a constant below the quotient yields a counterexample pair."""
        with pytest.raises(HypothesisError) as exc_info:
            inclusion_window(two_id, two_id, 1.0, 1.0, 2.0, K=4)

        i, j = exc_info.value.pair
        assert i != j


class TestClassifySpaces:
    """Tests for classify_spaces."""

    def test_parameters_differ(self, two_id):
        """Test different parameter triples never coincide."""
        result = classify_spaces(two_id, two_id, (0.0, 2.0, 2.0), (0.0, 2.0, 1.0))

        assert result.coincide is False
        assert result.equivalence is None

    def test_lebesgue_case(self, mocker, two_id, diag24):
        """Test α = 0, 1 < p < ∞, q = 2 coincide without any sweep."""
        decide = mocker.patch("anisotropic_tl.equivalence.decider.decide_equivalence")

        result = classify_spaces(two_id, diag24, (0.0, 3.0, 2.0), (0.0, 3.0, 2.0))

        assert result.coincide is True
        decide.assert_not_called()

    def test_inequivalent_matrices(self, two_id, diag24):
        """Test equal parameters over inequivalent matrices do not coincide."""
        result = classify_spaces(two_id, diag24, (1.0, 2.0, 2.0), (1.0, 2.0, 2.0), K=16)

        assert result.coincide is False
        assert result.equivalence is not None

    def test_inconclusive_passes_through(self, mocker, two_id):
        """Test an inconclusive sweep leaves the question open."""
        verdict = mocker.Mock(verdict="inconclusive")
        mocker.patch("anisotropic_tl.equivalence.decider.decide_equivalence", return_value=verdict)

        result = classify_spaces(two_id, two_id, (1.0, 2.0, 1.0), (1.0, 2.0, 1.0))

        assert result.coincide is None
