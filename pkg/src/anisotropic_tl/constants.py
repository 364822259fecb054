"""Common constants used across modules."""

# Expansive-matrix certification
EIG_TOL = 1e-9
DET_REL_TOL = 1e-10
COND_LIMIT = 1e12
MAX_DIM = 8

# Ellipsoid construction
SERIES_TAIL_TOL = 1e-12
SERIES_MAX_TERMS = 10_000
VOLUME_TOL = 1e-8
CONTRACTION_SLACK = 1e-12

# Step quasi-norm
SCALE_BRACKET_LIMIT = 10**6

# Analyzing profiles
POU_TOL = 1e-6
MIN_CELLS_ACROSS_ANNULUS = 8
MIN_GRID_POINTS = 64
DEFAULT_COVER_BAND = 6

# Fields and norms
TRUNCATION_ERROR_FRACTION = 1e-6
TRUNCATION_WARN_FRACTION = 1e-10
BAND_MASS_TOL = 1e-8
SPECTRUM_SUPPORT_TOL = 1e-14
WINDOW_EDGE_WEIGHT = 1e-3
DEFAULT_LATTICE_DENSITY = 4

# Equivalence verdict contract
SLOPE_TOL = 0.02
COVER_CAP = 64
RANGE_DOUBLINGS = 3

# Experiments
RATIO_CAP = 10.0
STABILITY_TOL = 0.25
EXPONENT_TOL = 0.1
BALL_MARGIN = 1.25

# Cube sequences
OVERLAP_TOL = 1e-12
SCALE_MARGIN = 2
BRUTEFORCE_MAX_SUPPORT = 14

# CLI exit codes
EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64
