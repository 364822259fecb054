from .geometry import Arrangement, arrangement, cubes_meeting, lattice_reach, overlap_measure, overlaps
from .models import CubeSequence, DilatedCube, random_sequence
from .norms import (
    CarlesonEstimate,
    carleson_bounds,
    carleson_constant,
    carleson_embedding_check,
    f1inf_norm,
    finf1_norm_def,
    finf1_norm_tent,
    pairing_bound_check,
    tent,
    tent_containment_radius,
)

__all__ = [
    "Arrangement",
    "CarlesonEstimate",
    "CubeSequence",
    "DilatedCube",
    "arrangement",
    "carleson_bounds",
    "carleson_constant",
    "carleson_embedding_check",
    "cubes_meeting",
    "f1inf_norm",
    "finf1_norm_def",
    "finf1_norm_tent",
    "lattice_reach",
    "overlap_measure",
    "overlaps",
    "pairing_bound_check",
    "random_sequence",
    "tent",
    "tent_containment_radius",
]
