from .annulus import AnnularCover
from .bump import ProfileShape, plateau_bump, smooth_step
from .grids import FrequencyGrid, SpatialGrid
from .intersections import IndexSets, cell_ball, default_j_range, intersection_sets, neighbor_bound
from .profiles import (
    FourierProfile,
    build_analyzing_profile,
    dilate_profile,
    dilation_sums,
    make_window_profile,
    partition_of_unity_defect,
)

__all__ = [
    "AnnularCover",
    "FourierProfile",
    "FrequencyGrid",
    "IndexSets",
    "ProfileShape",
    "SpatialGrid",
    "build_analyzing_profile",
    "cell_ball",
    "default_j_range",
    "dilate_profile",
    "dilation_sums",
    "intersection_sets",
    "make_window_profile",
    "neighbor_bound",
    "partition_of_unity_defect",
    "plateau_bump",
    "smooth_step",
]
