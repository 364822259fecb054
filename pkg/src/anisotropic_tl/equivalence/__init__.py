from .decider import (
    DetQuotient,
    EquivalenceVerdict,
    SpaceComparison,
    adjoint_consistency,
    c_exponent,
    classify_spaces,
    decide_equivalence,
    default_covers,
    det_quotient_bound,
    inclusion_window,
    inclusion_window_size,
    power_norm_table,
)

__all__ = [
    "DetQuotient",
    "EquivalenceVerdict",
    "SpaceComparison",
    "adjoint_consistency",
    "c_exponent",
    "classify_spaces",
    "decide_equivalence",
    "default_covers",
    "det_quotient_bound",
    "inclusion_window",
    "inclusion_window_size",
    "power_norm_table",
]
