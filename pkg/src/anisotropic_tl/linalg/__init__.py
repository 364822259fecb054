from .expansive import build_ellipsoid, certify_expansive, contraction_norm, dilation_exponents
from .models import DilationExponents, Ellipsoid, ExpansiveMatrix, MatrixPowers

__all__ = [
    "DilationExponents",
    "Ellipsoid",
    "ExpansiveMatrix",
    "MatrixPowers",
    "build_ellipsoid",
    "certify_expansive",
    "contraction_norm",
    "dilation_exponents",
]
