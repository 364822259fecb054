from .step import (
    StepQuasiNorm,
    equivalence_ratio,
    expansive_consequence_constant,
    quasi_triangle_constant,
    rho,
    sample_shell_points,
    scale_index,
)

__all__ = [
    "StepQuasiNorm",
    "equivalence_ratio",
    "expansive_consequence_constant",
    "quasi_triangle_constant",
    "rho",
    "sample_shell_points",
    "scale_index",
]
