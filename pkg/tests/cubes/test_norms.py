"""Tests for tents, sequence norms and Carleson constants."""

import math

import numpy as np
import pytest

from anisotropic_tl.cubes.models import CubeSequence, DilatedCube, random_sequence
from anisotropic_tl.cubes.norms import (
    carleson_bounds,
    carleson_constant,
    carleson_embedding_check,
    f1inf_norm,
    finf1_norm_def,
    finf1_norm_tent,
    pairing_bound_check,
    tent,
    tent_containment_radius,
)
from anisotropic_tl.experiments.sequences import single_cube_errors


def parent_and_child(A):
    return CubeSequence(A, {DilatedCube(0, (0, 0)): 1.0, DilatedCube(1, (0, 0)): 1.0})


class TestTent:
    """Tests for truncated tents."""

    def test_tent_of_isotropic_cube(self, two_id):
        """Test 𝒯(D) down two scales holds 1 + 4 + 16 cubes for A = 2I."""
        members = tent(two_id, DilatedCube(1, (0, 0)), -1)

        assert len(members) == 21
        assert all(-1 <= m.scale <= 1 for m in members)

    def test_floor_above_scale(self, two_id):
        """Test a floor above scale(D) raises ValueError."""
        with pytest.raises(ValueError, match="scale_floor"):
            tent(two_id, DilatedCube(0, (0, 0)), 1)

    def test_containment_radius_nested_grid(self, two_id):
        """Test nested dyadic grids need no lattice translates."""
        cubes = [DilatedCube(0, (0, 0)), DilatedCube(1, (3, -1))]

        assert tent_containment_radius(two_id, cubes, depth=2) == 0

    def test_containment_radius_sheared(self, jordan2):
        """Test sheared tents reach beyond D but stay within a few translates."""
        radius = tent_containment_radius(jordan2, [DilatedCube(0, (0, 0))], depth=2)

        assert 1 <= radius <= 4


class TestSequenceNorms:
    """Tests for the ḟ⁰_{1,∞} and ḟ⁰_{∞,1} norms."""

    @pytest.mark.parametrize("fixture", ["two_id", "diag24"])
    @pytest.mark.parametrize("scale", [-1, 0, 1])
    def test_single_cube_closed_forms(self, fixture, scale, request):
        """Test 1_D gives m(D)^{1/2} and m(D)^{-1/2} in every form."""
        A = request.getfixturevalue(fixture)

        errors = single_cube_errors(A, DilatedCube(scale, (1, -1)))

        assert max(errors.values()) <= 1e-10

    def test_parent_and_child(self, two_id):
        """Test all three ḟ⁰_{∞,1} forms give 1 for a unit cube under its parent."""
        c = parent_and_child(two_id)

        assert math.isclose(finf1_norm_def(c), 1.0)
        assert math.isclose(finf1_norm_tent(c), 1.0)
        assert math.isclose(carleson_constant(c).value, 1.0)

    def test_f1inf_parent_and_child(self, two_id):
        """Test ∫ sup m(D)^{-1/2}|c_D| 1_D = 1·1 + (1/2)·3 for the nested pair."""
        assert math.isclose(f1inf_norm(parent_and_child(two_id)), 2.5)

    def test_empty_sequence(self, two_id):
        """Test the empty sequence has zero norms."""
        c = CubeSequence(two_id)

        assert f1inf_norm(c) == 0.0
        assert finf1_norm_def(c) == 0.0
        assert carleson_constant(c).value == 0.0

    def test_homogeneity(self, jordan2):
        """Test every norm scales with |λ|."""
        c = random_sequence(jordan2, 5, np.random.default_rng(2))
        scaled = c.scaled(-3j)

        assert math.isclose(f1inf_norm(scaled), 3 * f1inf_norm(c), rel_tol=1e-9)
        assert math.isclose(finf1_norm_def(scaled), 3 * finf1_norm_def(c), rel_tol=1e-9)
        assert math.isclose(carleson_constant(scaled).value, 3 * carleson_constant(c).value, rel_tol=1e-9)

    def test_widening_margin_is_stable(self, diag24):
        """Test cubes far above the support never raise the sup."""
        c = random_sequence(diag24, 6, np.random.default_rng(4))

        assert math.isclose(finf1_norm_def(c), finf1_norm_def(c, margin=5), rel_tol=1e-10)

    def test_nested_grids_agree(self, two_id):
        """Test for nested dyadic grids the tent, definition and exhaustive forms coincide."""
        for seed in range(10):
            c = random_sequence(two_id, 6, np.random.default_rng(seed))

            exact = carleson_constant(c).value
            assert math.isclose(finf1_norm_tent(c), finf1_norm_def(c), rel_tol=1e-9)
            assert math.isclose(exact, finf1_norm_tent(c), rel_tol=1e-9)


class TestCarleson:
    """Tests for the Carleson constant estimators."""

    @pytest.mark.parametrize("fixture", ["two_id", "diag24", "jordan2"])
    def test_greedy_brackets_exhaustive(self, fixture, request):
        """Test the greedy lower and upper bounds enclose the exhaustive constant."""
        A = request.getfixturevalue(fixture)
        for seed in range(8):
            c = random_sequence(A, 7, np.random.default_rng(seed))

            exact = carleson_constant(c, "bruteforce").value
            greedy = carleson_constant(c, "greedy")

            assert greedy.lower <= exact * (1 + 1e-9)
            assert exact <= greedy.upper * (1 + 1e-9)

    def test_bruteforce_counts_subcollections(self, two_id):
        """Test the exhaustive search visits 2^n − 1 subcollections."""
        c = random_sequence(two_id, 5, np.random.default_rng(0))

        estimate = carleson_constant(c)

        assert estimate.subcollections == 2 ** len(c) - 1
        assert estimate.lower == estimate.upper

    def test_bruteforce_size_limit(self, two_id):
        """Test more than 14 cubes raise ValueError in the exhaustive search."""
        cubes = [DilatedCube(0, (k, 0)) for k in range(15)]

        with pytest.raises(ValueError, match="at most 14"):
            carleson_bounds(two_id, cubes, np.ones(15))

    def test_unknown_method(self, two_id):
        """Test an unknown method name raises ValueError."""
        with pytest.raises(ValueError, match="unknown"):
            carleson_bounds(two_id, [DilatedCube(0, (0, 0))], np.ones(1), method="lp")  # type: ignore[arg-type]

    def test_embedding_inequality(self, jordan2):
        """Test Σ a_D b_D ≤ C(a) ∫ sup_D b_D 1_D on random sequences."""
        for seed in range(6):
            rng = np.random.default_rng(seed)
            a = random_sequence(jordan2, 6, rng)
            b = random_sequence(jordan2, 6, rng)

            lhs, rhs = carleson_embedding_check(a, b)

            assert lhs <= rhs * (1 + 1e-9) + 1e-12

    def test_embedding_rejects_mixed_matrices(self, two_id, diag24):
        """Test sequences over different matrices raise ValueError."""
        a = CubeSequence(two_id, {DilatedCube(0, (0, 0)): 1.0})
        b = CubeSequence(diag24, {DilatedCube(0, (0, 0)): 1.0})

        with pytest.raises(ValueError, match="different matrices"):
            carleson_embedding_check(a, b)


class TestPairingBound:
    """Tests for pairing_bound_check."""

    def test_self_pairing_of_single_cube(self, two_id):
        """Test ⟨1_D, 1_D⟩ = 1 = m^{1/2}·m^{-1/2} with ratio one."""
        c = CubeSequence(two_id, {DilatedCube(2, (0, 0)): 1.0})

        report = pairing_bound_check(c, c, bound=1.0 + 1e-9)

        assert report.passed
        assert math.isclose(report.table("pairing").rows[0][-1], 1.0)

    def test_random_pairs_pass(self, diag24):
        """Test random pairs always satisfy the Carleson form of the bound."""
        for seed in range(6):
            rng = np.random.default_rng(seed)
            c = random_sequence(diag24, 5, rng)
            shared = {cube: 1 - 2j for cube in c.support[::2]}
            c_prime = CubeSequence(diag24, shared)

            assert pairing_bound_check(c, c_prime).passed

    def test_bound_violation_fails(self, two_id):
        """Test an explicit bound below the measured ratio fails."""
        c = CubeSequence(two_id, {DilatedCube(0, (0, 0)): 1.0})

        assert pairing_bound_check(c, c, bound=0.5).verdict == "FAIL"
