"""Tests for cube overlaps, arrangements and lattice reach."""

import math

import numpy as np

from anisotropic_tl.cubes.geometry import arrangement, cubes_meeting, lattice_reach, overlap_measure, overlaps
from anisotropic_tl.cubes.models import DilatedCube


class TestOverlaps:
    """Tests for pairwise cube overlap."""

    def test_nested_dyadic_cubes(self, two_id):
        """Test a child overlaps its parent with the child's full measure."""
        child, parent = DilatedCube(0, (1, 1)), DilatedCube(1, (0, 0))

        assert overlaps(two_id, child, parent)
        assert math.isclose(overlap_measure(two_id, child, parent), 1.0)

    def test_touching_cubes_do_not_overlap(self, two_id):
        """Test cubes sharing only an edge have zero overlap."""
        left, right = DilatedCube(0, (0, 0)), DilatedCube(0, (1, 0))

        assert not overlaps(two_id, left, right)
        assert overlap_measure(two_id, left, right) == 0.0

    def test_sheared_overlap(self, jordan2):
        """Test the overlap measure never exceeds either cube's measure."""
        first, second = DilatedCube(1, (0, 0)), DilatedCube(0, (1, 0))

        value = overlap_measure(jordan2, first, second)

        assert 0.0 < value <= min(first.measure(jordan2), second.measure(jordan2)) + 1e-12


class TestCubesMeeting:
    """Tests for cubes_meeting."""

    def test_children_of_isotropic_cube(self, two_id):
        """Test a scale-1 cube of 2I meets exactly its four children one scale down."""
        children = cubes_meeting(two_id, DilatedCube(1, (0, 0)), 0)

        assert sorted(children) == [DilatedCube(0, (i, j)) for i in (0, 1) for j in (0, 1)]

    def test_parent_of_cube(self, diag24):
        """Test a cube meets one cube of the next scale when the grids nest."""
        assert cubes_meeting(diag24, DilatedCube(0, (3, 5)), 1) == [DilatedCube(1, (1, 1))]

    def test_sheared_children_cover_measure(self, jordan2):
        """Test the cubes meeting D one scale down cover at least m(D)."""
        cube = DilatedCube(1, (0, 0))

        members = cubes_meeting(jordan2, cube, 0)

        covered = sum(overlap_measure(jordan2, cube, m) for m in members)
        assert math.isclose(covered, cube.measure(jordan2), rel_tol=1e-9)


class TestArrangement:
    """Tests for arrangement cell decompositions."""

    def test_union_of_disjoint_cubes(self, diag24):
        """Test the union measure adds for disjoint cubes."""
        cubes = [DilatedCube(0, (0, 0)), DilatedCube(0, (3, 0)), DilatedCube(1, (2, 2))]

        cells = arrangement(diag24, cubes)

        assert math.isclose(cells.union_measure(), 1 + 1 + 8)

    def test_sup_integral_nested(self, two_id):
        """Test ∫ sup over a parent and one child counts the child's weight on its own area."""
        cubes = [DilatedCube(1, (0, 0)), DilatedCube(0, (0, 0))]

        cells = arrangement(two_id, cubes)

        assert math.isclose(cells.sup_integral(np.array([1.0, 3.0])), 3 * 1 + 1 * 3)

    def test_sweep_matches_total_measure(self, jordan2):
        """Test the sheared sweep decomposition of overlapping cubes measures each cube exactly."""
        cubes = [DilatedCube(1, (0, 0)), DilatedCube(0, (1, 0)), DilatedCube(0, (2, 1))]

        cells = arrangement(jordan2, cubes)

        for m, cube in enumerate(cubes):
            selection = np.zeros(len(cubes), dtype=bool)
            selection[m] = True
            assert math.isclose(cells.union_measure(selection), cube.measure(jordan2), rel_tol=1e-9)

    def test_mask_volumes_sum_to_union(self, two_id):
        """Test distinct membership masks carry the whole union measure."""
        cubes = [DilatedCube(1, (0, 0)), DilatedCube(0, (1, 1)), DilatedCube(0, (2, 0))]
        cells = arrangement(two_id, cubes)

        masks, volumes = cells.mask_volumes()

        assert len(set(masks.tolist())) == len(masks)
        assert math.isclose(float(volumes.sum()), cells.union_measure())

    def test_empty(self, two_id):
        """Test an empty collection has an empty arrangement."""
        assert arrangement(two_id, []).union_measure() == 0.0


class TestLatticeReach:
    """Tests for lattice_reach."""

    def test_member_inside_cube(self, two_id):
        """Test a child needs no translates."""
        assert lattice_reach(two_id, DilatedCube(1, (0, 0)), DilatedCube(0, (1, 1))) == 0

    def test_member_two_cells_away(self, two_id):
        """Test a cube two cells to the right needs N = 2."""
        assert lattice_reach(two_id, DilatedCube(0, (0, 0)), DilatedCube(0, (2, 0))) == 2
