"""Tests for annular covers, analyzing profiles and intersection sets."""

import math

import numpy as np
import pytest

from anisotropic_tl.covers.annulus import AnnularCover
from anisotropic_tl.covers.bump import ProfileShape
from anisotropic_tl.covers.intersections import cell_ball, intersection_sets, neighbor_bound
from anisotropic_tl.covers.profiles import (
    dilate_profile,
    dilation_sums,
    make_window_profile,
    partition_of_unity_defect,
)
from anisotropic_tl.exceptions import PreconditionError
from anisotropic_tl.experiments.context import ExperimentSettings, analyzing_profile


def cover(A):
    return AnnularCover.for_matrix(A, ProfileShape())


class TestAnnularCover:
    """Tests for AnnularCover."""

    def test_isotropic_growth(self, two_id):
        """Test 2I grows the gauge by ln 2 per step."""
        q = cover(two_id)

        assert math.isclose(q.growth, math.log(2.0), rel_tol=1e-9)
        assert math.isclose(q.log_contraction, math.log(2.0), rel_tol=1e-9)

    @pytest.mark.parametrize("index", [-3, 0, 4])
    def test_sample_points_lie_in_dilate(self, jordan2, index):
        """Test sampled points of (A*)^i Q are members of it."""
        q = cover(jordan2)

        points = q.sample_points(200, np.random.default_rng(0), index=index)

        assert np.all(q.contains(points, index))

    def test_scales_meeting_ball_finds_own_scale(self, diag24):
        """Test a small ball inside (A*)^2 Q reports scale 2."""
        q = cover(diag24)
        eta, radius = cell_ball(q, 2)

        scales = q.scales_meeting_ball(eta, 0.5 * radius)

        assert 2 in scales

    def test_ball_reaching_origin(self, two_id):
        """Test a ball around a frequency that reaches the origin raises ValueError."""
        with pytest.raises(ValueError, match="origin"):
            cover(two_id).scales_meeting_ball(np.array([1.0, 0.0]), 10.0)


class TestIntersectionSets:
    """Tests for J(i) and I(j)."""

    def test_self_intersections(self, two_id):
        """Test for A = B every J(i) holds i − 1, i, i + 1 and stays within two steps."""
        q = cover(two_id)

        sets = intersection_sets(q, q, (-5, 5))

        for i, js in sets.J.items():
            assert {i - 1, i, i + 1} <= set(js)
            assert all(abs(j - i) <= 2 for j in js)

    def test_transpose_relation(self, two_id, diag24):
        """Test j ∈ J(i) exactly when i ∈ I(j)."""
        sets = intersection_sets(cover(two_id), cover(diag24), (-6, 6))

        for i, js in sets.J.items():
            for j in js:
                assert i in sets.I[j]

    def test_inequivalent_counts_grow(self, two_id, diag24):
        """Test max|J(i)| grows with the sweep range for 2I against diag(2, 4)."""
        narrow = intersection_sets(cover(diag24), cover(two_id), (-4, 4))
        wide = intersection_sets(cover(diag24), cover(two_id), (-16, 16))

        assert wide.max_J() > narrow.max_J()

    def test_empty_range(self, two_id):
        """Test an empty i range raises ValueError."""
        with pytest.raises(ValueError, match="empty range"):
            intersection_sets(cover(two_id), cover(two_id), (3, 1))

    def test_neighbor_bound(self, two_id, jordan2):
        """Test the neighbour bound is small and positive for the battery matrices."""
        assert 1 <= neighbor_bound(cover(two_id)) <= 2
        assert 1 <= neighbor_bound(cover(jordan2)) <= 4

    def test_cell_ball_in_both_dilates(self, two_id, two_rot):
        """Test a joint cell ball centre lies in both dilates."""
        qa, qb = cover(two_id), cover(two_rot)

        eta, radius = cell_ball(qa, 1, qb, 1)

        assert radius > 0
        assert qa.contains(eta[None, :], 1)[0]
        assert qb.contains(eta[None, :], 1)[0]

    def test_cell_ball_disjoint_dilates(self, two_id):
        """Test dilates far apart have no joint ball."""
        q = cover(two_id)

        assert cell_ball(q, 0, q, 6) is None


class TestAnalyzingProfile:
    """Tests for certified analyzing profiles."""

    @pytest.mark.parametrize("fixture", ["two_id", "jordan2"])
    def test_partition_of_unity(self, fixture, request):
        """Test Σ_i φ̂((A*)^i ξ) = 1 on the coverage band."""
        A = request.getfixturevalue(fixture)
        prof = analyzing_profile(A, ExperimentSettings())

        assert partition_of_unity_defect(prof, band=4, n_samples=300, seed=1) <= 1e-6

    def test_finitely_many_terms(self, diag24):
        """Test every frequency sees a bounded, positive number of nonzero dilates."""
        prof = analyzing_profile(diag24, ExperimentSettings())
        xi = np.random.default_rng(0).standard_normal((100, 2)) * 30

        _, counts = dilation_sums(prof, xi)

        assert counts.min() >= 1
        assert counts.max() <= 2 * prof.cover.window + 1

    def test_dilate_support_moves(self, two_id):
        """Test the dilate φ̂_1 has its certified annulus one determinant factor out."""
        prof = analyzing_profile(two_id, ExperimentSettings())

        dilated = dilate_profile(prof, two_id, 1)

        assert math.isclose(dilated.annulus[0], 4 * prof.annulus[0])
        assert math.isclose(dilated.annulus[1], 4 * prof.annulus[1])

    def test_dilate_wrong_matrix(self, two_id, diag24):
        """Test dilating with another matrix raises ValueError."""
        prof = analyzing_profile(two_id, ExperimentSettings())

        with pytest.raises(ValueError, match="different matrix"):
            dilate_profile(prof, diag24, 1)

    def test_window_profile(self, two_id):
        """Test a wide window equals one on Q and a zero-width window is rejected."""
        prof = analyzing_profile(two_id, ExperimentSettings())

        window = make_window_profile(prof, 3)

        assert window.offsets == tuple(range(-3, 4))
        with pytest.raises(PreconditionError):
            make_window_profile(prof, 0)
