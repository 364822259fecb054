"""Tests for the cube-sequence oracle experiments."""

import numpy as np

from anisotropic_tl.cubes.models import CubeSequence, DilatedCube, random_sequence
from anisotropic_tl.experiments.sequences import (
    experiment_pairing_battery,
    experiment_sequence_oracles,
    oracle_values,
    single_cube_errors,
)


class TestOracleValues:
    """Tests for the per-sequence evaluations."""

    def test_single_cube(self, two_id):
        """Test a single cube has spread one and a tight bracket."""
        values = oracle_values(CubeSequence(two_id, {DilatedCube(0, (0, 0)): 1.0}))

        assert values.size == 1
        assert abs(values.spread - 1.0) <= 1e-12
        assert values.bracketed

    def test_random_sequences_bracketed(self, jordan2):
        """Test the greedy bracket contains the exhaustive constant."""
        rng = np.random.default_rng(11)

        for _ in range(5):
            values = oracle_values(random_sequence(jordan2, 6, rng))
            assert values.bracketed
            assert values.spread >= 1.0

    def test_single_cube_errors(self, diag24):
        """Test closed forms hold for a cube at a negative scale."""
        errors = single_cube_errors(diag24, DilatedCube(-2, (1, -3)))

        assert set(errors) == {"f1inf", "finf1_def", "finf1_tent", "carleson"}
        assert max(errors.values()) <= 1e-10


class TestExperiments:
    """Tests for the oracle and pairing batteries on small inputs."""

    def test_oracles_on_nested_grid(self, two_id):
        """Test the oracle battery passes for 2I with few small sequences."""
        report = experiment_sequence_oracles([two_id], n_sequences=6, max_cubes=4, seed=3, depth=1)

        assert report.verdict == "PASS"
        assert len(report.table("single_cube").rows) == 3
        assert report.table("containment").rows[0][-1] is not None

    def test_pairing_battery(self, two_id):
        """Test the pairing bound holds on random pairs."""
        report = experiment_pairing_battery(two_id, n_pairs=8, max_cubes=3, seed=2)

        assert report.verdict == "PASS"
        assert [row[0] for row in report.table("ratios").rows] == [3, 6]
