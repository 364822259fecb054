"""Certification of expansive matrices and construction of their ellipsoids."""

import logging

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import gammaln

from ..constants import (
    COND_LIMIT,
    CONTRACTION_SLACK,
    DET_REL_TOL,
    EIG_TOL,
    MAX_DIM,
    SERIES_MAX_TERMS,
    SERIES_TAIL_TOL,
    VOLUME_TOL,
)
from ..exceptions import NotExpansiveError, SeriesTruncationError, SingularMatrixError, ThetaRangeError
from .models import DilationExponents, Ellipsoid, ExpansiveMatrix

logger = logging.getLogger(__name__)


def certify_expansive(matrix: ArrayLike) -> ExpansiveMatrix:
    """Certify that ``matrix`` is expansive and record its spectral data.

    Args:
        matrix: Square real matrix, row-major

    Returns:
        ExpansiveMatrix with |det| and sorted eigenvalue moduli

    Raises:
        ValueError: If the input is not a finite square matrix of supported size
        SingularMatrixError: If the matrix is singular to working tolerance
        NotExpansiveError: If some eigenvalue modulus is at most 1 + 1e-9
    """
    entries = np.array(matrix, dtype=float)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ValueError(f"matrix must be square, got shape {entries.shape}")
    d = entries.shape[0]
    if not 1 <= d <= MAX_DIM:
        raise ValueError(f"dimension {d} outside the supported range 1..{MAX_DIM}")
    if not np.all(np.isfinite(entries)):
        raise ValueError("matrix has non-finite entries")

    cond = np.linalg.cond(entries)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMatrixError(f"matrix is singular to tolerance (condition number {cond:.3e})")

    moduli = np.sort(np.abs(np.linalg.eigvals(entries)))
    if moduli[0] <= 1.0 + EIG_TOL:
        raise NotExpansiveError(float(moduli[0]))

    det_abs = float(abs(np.linalg.det(entries)))
    product = float(np.prod(moduli))
    mismatch = abs(product - det_abs) / det_abs
    if mismatch > DET_REL_TOL:
        # defective spectra lose accuracy in the eigensolver; the determinant is exact to rounding
        logger.warning(f"eigenvalue product off |det| by {mismatch:.2e}, rescaling moduli")
        moduli = moduli * (det_abs / product) ** (1.0 / d)

    entries.setflags(write=False)
    return ExpansiveMatrix(entries=entries, det_abs=det_abs, eig_moduli=tuple(float(m) for m in moduli))


def dilation_exponents(A: ExpansiveMatrix, margin: float = 0.5) -> DilationExponents:
    """Exponents ζ± = ln λ± / ln|det A| for bounds strictly inside the spectral gap."""
    if not 0.0 < margin < 1.0:
        raise ValueError(f"margin must lie in (0, 1), got {margin}")

    lambda_minus = 1.0 + (1.0 - margin) * (min(A.eig_moduli) - 1.0)
    lambda_plus = max(A.eig_moduli) / (1.0 - margin)
    return DilationExponents(
        lambda_minus=lambda_minus,
        lambda_plus=lambda_plus,
        zeta_minus=float(np.log(lambda_minus) / A.log_det),
        zeta_plus=float(np.log(lambda_plus) / A.log_det),
    )


def contraction_norm(A: ExpansiveMatrix, ellipsoid: Ellipsoid, power: int = -1) -> float:
    """Operator norm of A^power in the ellipsoid's S-geometry, i.e. ‖L A^power L⁻¹‖₂."""
    upper = ellipsoid.cholesky_upper
    return float(np.linalg.norm(upper @ A.power(power) @ ellipsoid.cholesky_upper_inv, 2))


def build_ellipsoid(A: ExpansiveMatrix, theta: float | None = None) -> Ellipsoid:
    """Build the volume-one ellipsoid Ω_A with Ω ⊆ rΩ ⊆ AΩ, r = 1/θ.

    The form is the geometric series S = Σ_k θ^{-2k} (A^{-k})ᵀ A^{-k}, which satisfies
    A^{-T} S A^{-1} ≤ θ² S and therefore certifies ‖A^{-1}‖_S ≤ θ.

    Args:
        A: Certified expansive matrix
        theta: Contraction parameter in (ρ(A⁻¹), 1); default is the midpoint (1 + ρ(A⁻¹))/2

    Returns:
        Ellipsoid with form S, level c (volume one), nesting ratio r and theta
    """
    d = A.dim
    rho_inv = 1.0 / min(A.eig_moduli)
    if theta is None:
        theta = 0.5 * (1.0 + rho_inv)
    elif not rho_inv < theta < 1.0:
        raise ThetaRangeError(f"theta={theta} must lie in ({rho_inv:.6g}, 1)")

    step = A.inverse / theta
    scaled_power = np.eye(d)
    form = np.eye(d)
    previous = 1.0
    # asymptotic ratio of consecutive terms is (ρ(A⁻¹)/θ)²; never trust a measured ratio below this floor
    ratio_floor = ((rho_inv + theta) / (2.0 * theta)) ** 2

    for k in range(1, SERIES_MAX_TERMS + 1):
        scaled_power = scaled_power @ step
        term = scaled_power.T @ scaled_power
        form += term
        size = float(np.linalg.norm(term, 2))
        ratio = max(size / previous if previous > 0 else 0.0, ratio_floor)
        previous = size
        if k >= 2 * d and ratio < 1.0 and size * ratio / (1.0 - ratio) <= SERIES_TAIL_TOL * np.linalg.norm(form, 2):
            logger.debug(f"ellipsoid series converged after {k} terms (theta={theta:.6g})")
            break
    else:
        raise SeriesTruncationError(f"ellipsoid series did not converge within {SERIES_MAX_TERMS} terms")

    form = 0.5 * (form + form.T)
    _, logdet = np.linalg.slogdet(form)
    log_unit_ball = 0.5 * d * np.log(np.pi) - gammaln(0.5 * d + 1.0)
    level = float(np.exp((2.0 / d) * (0.5 * logdet - log_unit_ball)))

    form.setflags(write=False)
    ellipsoid = Ellipsoid(form=form, level=level, r=1.0 / theta, theta=float(theta))

    volume = ellipsoid.volume()
    if abs(volume - 1.0) > VOLUME_TOL:
        raise SeriesTruncationError(f"ellipsoid volume {volume!r} is not one")
    contraction = contraction_norm(A, ellipsoid)
    if contraction > theta + CONTRACTION_SLACK:
        raise SeriesTruncationError(f"contraction certificate failed: {contraction:.12g} > theta={theta:.12g}")

    return ellipsoid
