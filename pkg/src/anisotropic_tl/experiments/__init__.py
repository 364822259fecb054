from .atoms import AtomTrain, BumpAtom, BumpProfile, build_bump, plant_atoms, random_band_field, single_atom
from .context import ExperimentSettings, analyzing_profile
from .convolution import (
    check_convolution_inequality,
    convolution_sides,
    experiment_convolution_battery,
    experiment_convolution_envelope,
    experiment_dilated_convolution,
)
from .khintchine import (
    experiment_khintchine,
    experiment_khintchine_battery,
    experiment_q_detection,
    khintchine_bracket,
)
from .norm_experiments import (
    experiment_atom_train,
    experiment_coincidence,
    experiment_detquotient,
    experiment_maximal,
    experiment_single_atom,
)
from .sequences import experiment_pairing_battery, experiment_sequence_oracles
from .suite import battery_matrices, run_suite

__all__ = [
    "AtomTrain",
    "BumpAtom",
    "BumpProfile",
    "ExperimentSettings",
    "analyzing_profile",
    "battery_matrices",
    "build_bump",
    "check_convolution_inequality",
    "convolution_sides",
    "experiment_atom_train",
    "experiment_coincidence",
    "experiment_convolution_battery",
    "experiment_convolution_envelope",
    "experiment_detquotient",
    "experiment_dilated_convolution",
    "experiment_khintchine",
    "experiment_khintchine_battery",
    "experiment_maximal",
    "experiment_pairing_battery",
    "experiment_q_detection",
    "experiment_sequence_oracles",
    "experiment_single_atom",
    "khintchine_bracket",
    "plant_atoms",
    "random_band_field",
    "run_suite",
    "single_atom",
]
