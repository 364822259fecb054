"""Tests for the Peetre maximal functions and the p = ∞ quasi-norms."""

import math

import numpy as np
import pytest

from anisotropic_tl.covers.grids import SpatialGrid
from anisotropic_tl.exceptions import WindowTooSmallError
from anisotropic_tl.experiments.atoms import atom_field, atom_grid, build_bump, single_atom
from anisotropic_tl.experiments.context import ExperimentSettings, analyzing_profile
from anisotropic_tl.linalg.expansive import certify_expansive
from anisotropic_tl.tlnorm.fields import TLParams
from anisotropic_tl.tlnorm.maximal import (
    maximal_tl_norm_pinf,
    peetre_from_magnitude,
    peetre_maximal,
    resolve_window,
)
from anisotropic_tl.tlnorm.norms import convolve_dilate, tl_norm_pinf, tl_norm_pinf_qinf, tl_norm_pinf_qinf_average

A = certify_expansive([[2.0, 0.0], [0.0, 2.0]])
PROFILE = analyzing_profile(A, ExperimentSettings())
BUMP = build_bump(2)
ATOM = single_atom(A, 0)
GRID = atom_grid(BUMP, ATOM.delta, 256)
FIELD = atom_field([ATOM], BUMP, GRID)


class TestPeetreMaximal:
    """Tests for φ**_{i,β} on the grid."""

    def test_dominates_convolution_pointwise(self):
        """Test φ**_{i,β}f ≥ |f ∗ φ_i| at every grid point."""
        plain = np.abs(convolve_dilate(FIELD, A, PROFILE, 0).samples)

        maximal = peetre_maximal(FIELD, A, PROFILE, 0, 2.0).samples

        assert np.allclose(maximal.imag, 0.0)
        assert np.all(maximal.real >= plain * (1 - 1e-12))

    def test_constant_magnitude_is_fixed(self):
        """Test a constant magnitude is its own maximal function since every weight is at most one."""
        grid = SpatialGrid(2, 4.0, 64)

        result = peetre_from_magnitude(np.ones(grid.shape), A, grid, 0, 2.0)

        assert np.allclose(result, 1.0)

    def test_spreads_a_spike(self):
        """Test a single spike leaks into its neighbours with weight below one."""
        grid = SpatialGrid(2, 4.0, 64)
        spike = np.zeros(grid.shape)
        spike[32, 32] = 1.0

        result = peetre_from_magnitude(spike, A, grid, 0, 2.0)

        assert result[32, 32] == 1.0
        assert 0.0 < result[32, 33] < 1.0
        assert result[32, 40] <= result[32, 33]

    def test_nonpositive_beta(self):
        """Test β ≤ 0 raises ValueError."""
        with pytest.raises(ValueError, match="beta"):
            peetre_from_magnitude(np.ones(GRID.shape), A, GRID, 0, 0.0)


class TestResolveWindow:
    """Tests for the offset reach of φ**."""

    def test_explicit_window_too_small(self):
        """Test a one-cell window with a heavy edge weight raises WindowTooSmallError."""
        with pytest.raises(WindowTooSmallError, match="edge weight"):
            resolve_window(A, GRID, 0, 2.0, window=1)

    def test_window_must_be_positive(self):
        """Test a window below one cell raises ValueError."""
        with pytest.raises(ValueError, match="window"):
            resolve_window(A, GRID, 0, 2.0, window=0)

    def test_automatic_window_within_grid(self):
        """Test the automatic reach never leaves the grid."""
        reach = resolve_window(A, GRID, 0, 2.0)

        assert 1 <= reach <= GRID.n_per_axis - 1


class TestInfiniteP:
    """Tests for the p = ∞ quasi-norms and their maximal forms."""

    def test_maximal_sup_dominates_plain_sup(self):
        """Test the maximal p = q = ∞ norm is at least sup_i |det A|^{αi}‖f ∗ φ_i‖_∞."""
        params = TLParams(0.0, math.inf, math.inf)

        maximal = maximal_tl_norm_pinf(FIELD, A, PROFILE, params)

        assert maximal >= tl_norm_pinf_qinf(FIELD, A, PROFILE, params) * (1 - 1e-12)

    def test_maximal_average_dominates_plain_average(self):
        """Test the maximal p = ∞, q = 2 average norm is at least the plain one."""
        params = TLParams(0.0, math.inf, 2.0)

        maximal = maximal_tl_norm_pinf(FIELD, A, PROFILE, params)

        assert maximal >= tl_norm_pinf(FIELD, A, PROFILE, params) * (1 - 1e-9)

    def test_averaged_sup_below_plain_sup(self):
        """Test averaging |f ∗ φ_i| over dilated ellipsoids never exceeds its supremum."""
        params = TLParams(0.0, math.inf, math.inf)

        averaged = tl_norm_pinf_qinf_average(FIELD, A, PROFILE, params)

        assert 0.0 < averaged <= tl_norm_pinf_qinf(FIELD, A, PROFILE, params) * (1 + 1e-9)

    def test_finite_q_required(self):
        """Test tl_norm_pinf rejects q = ∞."""
        with pytest.raises(ValueError, match="q < inf"):
            tl_norm_pinf(FIELD, A, PROFILE, TLParams(0.0, math.inf, math.inf))
