"""Tests for random-sign moments."""

import math

import numpy as np
import pytest

from anisotropic_tl.experiments.khintchine import (
    exhaustive_moment,
    experiment_khintchine,
    experiment_khintchine_battery,
    khintchine_bracket,
    monte_carlo_moment,
)


class TestBracket:
    """Tests for the sharp Khintchine constants."""

    def test_p_two_is_exact(self):
        """Test p = 2 gives the bracket [1, 1]."""
        assert khintchine_bracket(2.0) == (1.0, 1.0)

    def test_p_one_lower(self):
        """Test the p = 1 lower constant is 1/√2."""
        lower, upper = khintchine_bracket(1.0)

        assert math.isclose(lower, 1 / math.sqrt(2))
        assert upper == 1.0

    def test_p_four_upper(self):
        """Test the p = 4 upper constant is the Gaussian moment 3."""
        assert math.isclose(khintchine_bracket(4.0)[1], 3.0)

    def test_nonpositive_p(self):
        """Test p ≤ 0 raises ValueError."""
        with pytest.raises(ValueError, match="positive"):
            khintchine_bracket(0.0)


class TestMoments:
    """Tests for exhaustive and Monte Carlo moments."""

    def test_two_ones_fourth_moment(self):
        """Test E|θ₁ + θ₂|⁴ / ‖(1, 1)‖₂⁴ = 2 exactly."""
        moment = exhaustive_moment(np.ones(2), 4.0)

        assert moment.mean == 8.0
        assert abs(moment.ratio - 2.0) <= 1e-12
        assert moment.trials == 4
        assert moment.stderr == 0.0

    def test_single_term(self):
        """Test a single coefficient has ratio one for every p."""
        for p in (0.5, 1.0, 3.0):
            assert abs(exhaustive_moment(np.array([-3.0]), p).ratio - 1.0) <= 1e-12

    def test_second_moment_is_parseval(self):
        """Test the p = 2 moment equals ‖a‖₂² exactly."""
        a = np.array([0.3, -1.2, 2.0, 0.7])

        assert math.isclose(exhaustive_moment(a, 2.0).mean, float(np.sum(a**2)))

    def test_too_many_terms(self):
        """Test enumeration refuses more than 16 terms."""
        with pytest.raises(ValueError, match="K <= 16"):
            exhaustive_moment(np.ones(17), 1.0)

    def test_zero_coefficients(self):
        """Test all-zero coefficients give a NaN ratio."""
        assert math.isnan(exhaustive_moment(np.zeros(3), 1.0).ratio)

    def test_monte_carlo_deterministic_per_seed(self):
        """Test the same generator seed reproduces the estimate."""
        a = np.array([1.0, 2.0, 3.0])

        first = monte_carlo_moment(a, 1.0, 500, np.random.default_rng(4))
        second = monte_carlo_moment(a, 1.0, 500, np.random.default_rng(4))

        assert first == second
        assert first.stderr > 0


class TestExperiments:
    """Tests for the Khintchine experiment reports."""

    def test_single_coefficient_passes(self):
        """Test one coefficient gives identical exact and sampled ratios."""
        report = experiment_khintchine([2.0], 3.0, n_trials=100, seed=1)

        assert report.verdict == "PASS"
        rows = report.table("moments").rows
        assert [row[0] for row in rows] == ["monte_carlo", "exhaustive"]
        assert rows[0][3] == rows[1][3] == 1.0

    def test_battery_single_terms(self):
        """Test the battery with K = 1 is deterministic and passes."""
        report = experiment_khintchine_battery(ps=(0.5, 3.0), max_terms=1, n_trials=50, seed=0)

        assert report.verdict == "PASS"
        assert len(report.table("ratios").rows) == 4

    def test_battery_is_reproducible(self):
        """Test two runs with one seed produce the same payload."""
        first = experiment_khintchine_battery(ps=(1.0,), max_terms=3, n_trials=200, seed=7)
        second = experiment_khintchine_battery(ps=(1.0,), max_terms=3, n_trials=200, seed=7)

        assert first.payload() == second.payload()
