"""Tests for expansive-matrix certification and ellipsoid construction."""

import math

import numpy as np
import pytest

from anisotropic_tl.exceptions import NotExpansiveError, SingularMatrixError, ThetaRangeError
from anisotropic_tl.linalg.expansive import build_ellipsoid, certify_expansive, contraction_norm, dilation_exponents


class TestCertifyExpansive:
    """Tests for certify_expansive."""

    def test_records_spectral_data(self):
        """Test |det| and sorted eigenvalue moduli of diag(2, 4)."""
        A = certify_expansive([[4.0, 0.0], [0.0, 2.0]])

        assert A.dim == 2
        assert math.isclose(A.det_abs, 8.0)
        assert A.eig_moduli == pytest.approx((2.0, 4.0))
        assert math.isclose(A.log_det, math.log(8.0))

    def test_rotation_has_complex_spectrum(self, two_rot):
        """Test a scaled rotation certifies with both moduli equal to 2."""
        assert two_rot.eig_moduli == pytest.approx((2.0, 2.0))
        assert math.isclose(two_rot.det_abs, 4.0)

    def test_defective_matrix_keeps_determinant(self, jordan2):
        """Test a Jordan block certifies and its moduli multiply to |det|."""
        assert math.isclose(float(np.prod(jordan2.eig_moduli)), jordan2.det_abs, rel_tol=1e-10)

    def test_unit_eigenvalue_rejected(self):
        """Test an eigenvalue of modulus one raises NotExpansiveError."""
        with pytest.raises(NotExpansiveError) as exc_info:
            certify_expansive([[1.0, 0.0], [0.0, 3.0]])

        assert math.isclose(exc_info.value.modulus, 1.0)

    def test_singular_rejected(self):
        """Test the zero matrix raises SingularMatrixError."""
        with pytest.raises(SingularMatrixError):
            certify_expansive([[0.0, 0.0], [0.0, 0.0]])

    def test_non_square_rejected(self):
        """Test a 2x3 input raises ValueError."""
        with pytest.raises(ValueError, match="square"):
            certify_expansive([[2.0, 0.0, 0.0], [0.0, 2.0, 0.0]])

    def test_non_finite_rejected(self):
        """Test infinite entries raise ValueError."""
        with pytest.raises(ValueError, match="non-finite"):
            certify_expansive([[math.inf, 0.0], [0.0, 2.0]])

    def test_entries_are_read_only(self, two_id):
        """Test certified entries cannot be modified in place."""
        with pytest.raises(ValueError):
            two_id.entries[0, 0] = 5.0

    def test_transpose_shares_spectrum(self, jordan2):
        """Test A* keeps determinant and moduli and transposes the entries."""
        adjoint = jordan2.transpose

        np.testing.assert_array_equal(adjoint.entries, jordan2.entries.T)
        assert adjoint.det_abs == jordan2.det_abs
        assert adjoint.eig_moduli == jordan2.eig_moduli

    def test_negative_powers(self, jordan2):
        """Test A^k A^{-k} is the identity."""
        np.testing.assert_allclose(jordan2.power(3) @ jordan2.power(-3), np.eye(2), atol=1e-12)


class TestDilationExponents:
    """Tests for dilation_exponents."""

    def test_bounds_bracket_spectrum(self, diag24):
        """Test λ₋ < min|λ| and λ₊ > max|λ| with matching exponents."""
        exponents = dilation_exponents(diag24, 0.5)

        assert 1.0 < exponents.lambda_minus < 2.0
        assert exponents.lambda_plus > 4.0
        assert math.isclose(exponents.zeta_minus, math.log(exponents.lambda_minus) / math.log(8.0))
        assert math.isclose(exponents.zeta_plus, math.log(exponents.lambda_plus) / math.log(8.0))

    @pytest.mark.parametrize("margin", [0.0, 1.0, -0.2])
    def test_margin_out_of_range(self, two_id, margin):
        """Test margins outside (0, 1) raise ValueError."""
        with pytest.raises(ValueError, match="margin"):
            dilation_exponents(two_id, margin)


class TestBuildEllipsoid:
    """Tests for build_ellipsoid."""

    @pytest.mark.parametrize("fixture", ["two_id", "diag24", "jordan2", "two_rot"])
    def test_volume_one_and_contraction(self, fixture, request):
        """Test the ellipsoid has volume one and ‖A⁻¹‖_S stays within theta."""
        A = request.getfixturevalue(fixture)

        omega = build_ellipsoid(A)

        assert math.isclose(omega.volume(), 1.0, abs_tol=1e-8)
        assert contraction_norm(A, omega) <= omega.theta + 1e-12
        assert math.isclose(omega.r, 1.0 / omega.theta)

    def test_default_theta_is_midpoint(self, two_id):
        """Test the default theta is (1 + ρ(A⁻¹))/2."""
        assert math.isclose(build_ellipsoid(two_id).theta, 0.75)

    def test_isotropic_matrix_gives_disc(self, two_id):
        """Test 2I gives the disc of area one."""
        omega = build_ellipsoid(two_id)

        np.testing.assert_allclose(omega.semi_axes(), [1 / math.sqrt(math.pi)] * 2, rtol=1e-9)

    @pytest.mark.parametrize("theta", [0.4, 0.5, 1.0])
    def test_theta_out_of_range(self, two_id, theta):
        """Test theta outside (ρ(A⁻¹), 1) raises ThetaRangeError."""
        with pytest.raises(ThetaRangeError):
            build_ellipsoid(two_id, theta)

    def test_containment_of_dilate(self, jordan2):
        """Test points of Ω stay in AΩ: A⁻¹ maps sampled boundary points inside Ω."""
        omega = build_ellipsoid(jordan2)
        rng = np.random.default_rng(0)
        directions = rng.standard_normal((200, 2))
        boundary = directions / omega.gauge(directions)[:, None] * 0.999

        assert np.all(omega.contains(boundary @ jordan2.inverse.T))
