"""Tests for utility functions and decorators."""

import logging
import math

import numpy as np
import pytest

from anisotropic_tl.utils import linear_slope, log_runtime, loglog_slope, parallel_map, spawn_generators


class TestLogRuntime:
    """Tests for the log_runtime decorator."""

    def test_returns_wrapped_result(self):
        """Test the decorated function's result passes through unchanged."""

        @log_runtime()
        def add(a, b):
            return a + b

        assert add(2, 3) == 5
        assert add.__name__ == "add"

    def test_over_budget_logs_warning(self, mocker, caplog):
        """Test exceeding the budget logs a warning naming the function."""
        mocker.patch("anisotropic_tl.utils.time.perf_counter", side_effect=[0.0, 12.0])

        @log_runtime(budget_seconds=10.0)
        def slow():
            return "done"

        with caplog.at_level(logging.WARNING, logger="anisotropic_tl.utils"):
            assert slow() == "done"

        assert "slow: took 12.00s, over the 10s budget" in caplog.text

    def test_exception_still_logs_and_propagates(self, mocker, caplog):
        """Test runtime is logged even when the wrapped call raises."""
        mocker.patch("anisotropic_tl.utils.time.perf_counter", side_effect=[0.0, 5.0])

        @log_runtime(budget_seconds=1.0)
        def broken():
            raise RuntimeError("boom")

        with caplog.at_level(logging.WARNING, logger="anisotropic_tl.utils"):
            with pytest.raises(RuntimeError, match="boom"):
                broken()

        assert "broken: took 5.00s" in caplog.text


class TestParallelMap:
    """Tests for order-preserving parallel_map."""

    def test_serial_and_threaded_results_match(self):
        """Test results come back in input order for any worker count."""
        items = list(range(20))

        serial = parallel_map(lambda x: x * x, items, workers=1)
        threaded = parallel_map(lambda x: x * x, items, workers=4)

        assert serial == threaded == [x * x for x in items]

    def test_empty_input(self):
        """Test an empty iterable maps to an empty list."""
        assert parallel_map(str, [], workers=3) == []


class TestSlopes:
    """Tests for the least-squares slope helpers."""

    def test_loglog_slope_of_power_law(self):
        """Test a pure power law y = 3x^1.5 has log-log slope 1.5."""
        x = np.array([1.0, 2.0, 4.0, 8.0])

        assert math.isclose(loglog_slope(x, 3.0 * x**1.5), 1.5, rel_tol=1e-12)

    def test_linear_slope(self):
        """Test linear_slope recovers the slope of an affine function."""
        assert math.isclose(linear_slope([0, 1, 2, 3], [1, 3, 5, 7]), 2.0, rel_tol=1e-12)

    def test_single_point_rejected(self):
        """Test fitting through one point raises ValueError."""
        with pytest.raises(ValueError, match="two points"):
            loglog_slope([1.0], [1.0])


class TestSpawnGenerators:
    """Tests for seeded generator spawning."""

    def test_same_seed_same_streams(self):
        """Test spawning twice from one seed reproduces every stream."""
        first = [g.random(3) for g in spawn_generators(7, 3)]
        second = [g.random(3) for g in spawn_generators(7, 3)]

        for a, b in zip(first, second, strict=True):
            np.testing.assert_array_equal(a, b)

    def test_streams_are_distinct(self):
        """Test sibling generators produce different draws."""
        a, b = spawn_generators(0, 2)

        assert not np.array_equal(a.random(4), b.random(4))
