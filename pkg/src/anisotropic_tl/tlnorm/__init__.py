from .fields import (
    FieldComponent,
    SampledField,
    TLParams,
    aliased_overlaps,
    band_mass_outside,
    check_band,
    component_scales,
    field_from_samples,
    field_from_spectrum,
    lp_norm,
    required_scales,
)
from .maximal import maximal_tl_norm, maximal_tl_norm_pinf, peetre_from_magnitude, peetre_maximal, resolve_window
from .norms import (
    average_norm,
    convolve_dilate,
    norm_value,
    r_triangle_defect,
    scale_magnitudes,
    tl_norm,
    tl_norm_pinf,
    tl_norm_pinf_qinf,
    tl_norm_pinf_qinf_average,
)

__all__ = [
    "FieldComponent",
    "SampledField",
    "TLParams",
    "aliased_overlaps",
    "average_norm",
    "band_mass_outside",
    "check_band",
    "component_scales",
    "convolve_dilate",
    "field_from_samples",
    "field_from_spectrum",
    "lp_norm",
    "maximal_tl_norm",
    "maximal_tl_norm_pinf",
    "norm_value",
    "peetre_from_magnitude",
    "peetre_maximal",
    "r_triangle_defect",
    "required_scales",
    "resolve_window",
    "scale_magnitudes",
    "tl_norm",
    "tl_norm_pinf",
    "tl_norm_pinf_qinf",
    "tl_norm_pinf_qinf_average",
]
