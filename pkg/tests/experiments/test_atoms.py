"""Tests for bump atoms, their grids and atom trains."""

import math

import numpy as np
import pytest

from anisotropic_tl.covers.annulus import AnnularCover
from anisotropic_tl.covers.bump import ProfileShape
from anisotropic_tl.exceptions import GridResolutionError, PreconditionError
from anisotropic_tl.experiments.atoms import AtomTrain, BumpAtom, atom_field, atom_grid, build_bump, single_atom
from anisotropic_tl.experiments.context import ExperimentSettings
from anisotropic_tl.experiments.khintchine import experiment_q_detection
from anisotropic_tl.experiments.norm_experiments import (
    ab_swap_constant,
    experiment_atom_train,
    experiment_coincidence,
    experiment_detquotient,
    experiment_maximal,
    experiment_single_atom,
)
from anisotropic_tl.tlnorm.fields import TLParams


class TestBump:
    """Tests for the base bump φ."""

    def test_spectrum_plateau_and_support(self):
        """Test φ̂ = 1 on B_{1/2}, vanishes outside B_1 and never goes negative."""
        bump = build_bump(2)
        xi = np.array([[0.0, 0.0], [0.3, 0.2], [0.8, 0.0], [1.0, 0.0], [0.0, 1.5]])

        values = bump.spectrum(xi)

        assert values[0] == values[1] == 1.0
        assert 0.0 <= values[2] <= 1.0
        assert values[3] == values[4] == 0.0

    def test_dilated_spectrum(self):
        """Test φ̂_δ(ξ) = φ̂(ξ/δ)."""
        bump = build_bump(2)
        xi = np.array([[0.2, 0.1], [0.4, 0.5]])

        assert np.allclose(bump.spectrum(xi, 0.5), bump.spectrum(2 * xi), rtol=0, atol=1e-14)

    def test_radii_ordering(self):
        """Test φ(0) > 0 and the half-drop radius sits inside the tail radius."""
        bump = build_bump(2)

        assert bump.value_at_zero > 0
        assert 0 < bump.half_drop_radius < bump.tail_radius
        assert math.isclose(bump.value(bump.half_drop_radius), 0.5 * bump.value_at_zero, rel_tol=1e-6)

    def test_invalid_dimension(self):
        """Test d < 1 raises ValueError."""
        with pytest.raises(ValueError, match="dimension"):
            build_bump(0)


class TestAtomGrid:
    """Tests for grids sized to one atom."""

    def test_too_coarse(self):
        """Test a grid too small for the tail raises GridResolutionError."""
        with pytest.raises(GridResolutionError, match="n_per_axis"):
            atom_grid(build_bump(2), 1.0, 2)

    def test_box_scales_with_delta(self):
        """Test halving δ doubles the spatial box."""
        bump = build_bump(2)

        wide, narrow = atom_grid(bump, 0.5, 256), atom_grid(bump, 1.0, 256)

        assert math.isclose(wide.half_width, 2 * narrow.half_width)

    def test_nonpositive_delta(self):
        """Test δ ≤ 0 raises ValueError."""
        with pytest.raises(ValueError, match="delta"):
            atom_grid(build_bump(2), 0.0, 256)


class TestSingleAtom:
    """Tests for atoms centred in one annular cell."""

    def test_centre_lies_in_cell(self, jordan2):
        """Test the carrier lies in (A*)^{i0} Q."""
        cover = AnnularCover.for_matrix(jordan2, ProfileShape())

        for i0 in (-2, 0, 3):
            atom = single_atom(jordan2, i0)
            assert atom.delta > 0
            assert cover.contains(np.atleast_2d(atom.eta), i0)[0]

    def test_field_is_band_certified(self, two_id):
        """Test the atom field carries its band ball."""
        bump = build_bump(2)
        atom = single_atom(two_id, 1)

        f = atom_field([atom], bump, atom_grid(bump, atom.delta, 256))

        assert f.band_certified
        assert f.components[0].band_radius == atom.delta


class TestAtomTrain:
    """Tests for AtomTrain slicing."""

    @pytest.fixture
    def train(self):
        atoms = tuple(BumpAtom(delta=0.5, eta=np.array([float(k), 0.0])) for k in range(3))
        return AtomTrain(atoms=atoms, scale_indices=(0, 5, 10), neighbor_bound=2, delta=0.5, b_indices=(1, 1, 1))

    def test_head(self, train):
        """Test head keeps the first K atoms and their indices."""
        head = train.head(2)

        assert head.size == 2
        assert head.scale_indices == (0, 5)
        assert head.b_indices == (1, 1)

    def test_head_bounds(self, train):
        """Test K outside [1, size] raises ValueError."""
        with pytest.raises(ValueError, match="K must lie"):
            train.head(4)

    def test_with_delta(self, train):
        """Test shrinking δ updates every atom, and growing it is refused."""
        assert all(a.delta == 0.25 for a in train.with_delta(0.25).atoms)
        with pytest.raises(ValueError):
            train.with_delta(1.0)

    def test_coefficient_count(self, train):
        """Test a coefficient vector of the wrong length is refused."""
        bump = build_bump(2)

        with pytest.raises(ValueError, match="coefficients"):
            train.field(bump, atom_grid(bump, 0.5, 256), np.ones(2))


@pytest.mark.slow
class TestNormExperiments:
    """Single-atom and maximal experiments on 2I over a short scale range."""

    def test_single_atom(self, two_id):
        """Test single-atom ratios stay bounded and stable."""
        report = experiment_single_atom(two_id, 0.0, 2.0, 2.0, i0_range=(-1, 1), settings=ExperimentSettings())

        assert report.verdict == "PASS"

    def test_maximal(self, two_id):
        """Test the maximal form dominates the plain form."""
        report = experiment_maximal(two_id, 0.0, 2.0, 2.0, i0_range=(0, 1), settings=ExperimentSettings())

        assert report.verdict == "PASS"

    def test_det_quotient_same_matrix(self, two_id):
        """Test against itself the norm ratio is flat in δ and the normalized ratios stay bounded."""
        report = experiment_detquotient(two_id, two_id, halvings=2, settings=ExperimentSettings())

        fits = next(t for t in report.tables if t.name == "exponents")
        assert report.verdict == "PASS"
        assert all(abs(row[2]) <= 1e-6 for row in fits.rows)

    def test_atom_train_bounded(self, two_id):
        """Test the train norm tracks δ^{d(1−1/p)}‖c‖_{ℓ^q} for ones and random coefficients."""
        report = experiment_atom_train(two_id, 0.0, 2.0, 2.0, Ks=(2, 4), n_draws=1, settings=ExperimentSettings())

        assert len(report.tables[0].rows) == 4
        assert report.verdict == "PASS"

    def test_coincidence_same_matrix(self, two_id):
        """Test a matrix against itself gives unit ratios and a pointwise maximal constant of at most one."""
        report = experiment_coincidence(
            two_id, two_id, n_fields=2, refinements=2, n_points=1000, settings=ExperimentSettings(), depth=8
        )

        assert report.verdict == "PASS"
        assert 0.0 < report.params["ab_swap_constant"] <= 1.0 + 1e-9

    def test_ab_swap_same_matrix(self, two_id):
        """Test |f ∗ φ_i| is dominated by its own maximal function when B = A."""
        settings = ExperimentSettings()
        bump = build_bump(2)
        atom = single_atom(two_id, 0)
        f = atom_field([atom], bump, atom_grid(bump, atom.delta, 256))

        constant = ab_swap_constant(f, two_id, two_id, settings, TLParams(), 2000, np.random.default_rng(0))

        assert 0.0 < constant <= 1.0 + 1e-9

    def test_q_detection_exponents(self, two_id, diag24):
        """Test the A-side grows with K, faster for q = 1 than for q = 2."""
        settings = ExperimentSettings()
        slopes = {}
        for q in (1.0, 2.0):
            report = experiment_q_detection(
                two_id, diag24, 2.0, q, Ks=(2, 4, 8), n_signs=2, settings=settings, depth=16
            )
            norms = next(t for t in report.tables if t.name == "norms")
            a_side = [row[1] for row in norms.rows]
            assert a_side == sorted(a_side)
            fits = next(t for t in report.tables if t.name == "exponents")
            assert [row[0] for row in fits.rows] == ["A", "B"]
            assert fits.rows[0][2] == 1.0 / q
            slopes[q] = fits.rows[0][1]

        assert slopes[1.0] > slopes[2.0]


class TestExperimentPreconditions:
    """Tests for experiments refusing inputs they cannot measure."""

    def test_q_detection_needs_finite_p(self, two_id, diag24):
        """Test p = ∞ raises PreconditionError before any sweep."""
        with pytest.raises(PreconditionError, match="p < inf"):
            experiment_q_detection(two_id, diag24, math.inf, 1.0)

    def test_q_detection_needs_inequivalent_pair(self, mocker, two_id):
        """Test a pair the decider does not call inequivalent is refused."""
        verdict = mocker.Mock(verdict="inconclusive")
        decide = mocker.patch("anisotropic_tl.experiments.khintchine.decide_equivalence", return_value=verdict)

        with pytest.raises(PreconditionError, match="inconclusive"):
            experiment_q_detection(two_id, two_id, 2.0, 1.0, depth=4)
        decide.assert_called_once()

    def test_coincidence_needs_equivalent_pair(self, mocker, two_id, diag24):
        """Test a pair the decider does not call equivalent is refused."""
        verdict = mocker.Mock(verdict="inequivalent")
        mocker.patch("anisotropic_tl.experiments.norm_experiments.decide_equivalence", return_value=verdict)

        with pytest.raises(PreconditionError, match="equivalent pair"):
            experiment_coincidence(two_id, diag24, depth=4)

    def test_atom_train_vanishing_coefficients(self, two_id):
        """Test all-zero coefficients leave nothing to compare."""
        report = experiment_atom_train(two_id, coeffs=np.zeros(2), settings=ExperimentSettings())

        assert report.verdict == "INCONCLUSIVE"
        assert "all coefficients vanish" in report.notes[-1]
