"""Suite thresholds.  Bump ``VERSION`` whenever a value changes."""

VERSION = "1"

DEFAULT_SEED = 42

# exact engines compare with zero tolerance; these apply to float inputs only
FLOAT_IDENTITY_TOL = 1e-12

# monotone-limit
MONOTONE_FINAL_GAP = 1e-9
MONOTONE_RATIO = 0.5
MONOTONE_LENGTH = 40

# cauchy-decreasing: floor on the empirical quasi-triangle constant
CAUCHY_K_FLOOR = 2.0
CAUCHY_LENGTH = 12
QUASI_TRIANGLE_TRIALS = 300

# sandwich
SANDWICH_DELTA = 0.1
SANDWICH_LENGTH = 30

# semicontinuity
SEMICONT_LENGTH = 40

# scaling
SCALING_EPS = ("1/4", "1/2", "1")

# grid suites; mass tolerance is grid.mass_tol(N) = 12 / N
GRID_N = 256
GRID_N_COARSE = 128
ORACLE_MAX_ATOMS = 4
ORACLE_MAX_TOTAL = 0.8
REFINEMENT_FACTOR = 2.0
CEILING_MONO_TOL = 1e-6

# stability
STABILITY_L1_FINAL = 1e-2
STABILITY_SUP_FINAL = 5e-2
STABILITY_MONOTONE_FROM = 3
STABILITY_RADIUS = 0.05
STABILITY_LENGTH = 12

# sdelta-completeness
SDELTA_STEPS = 20
CONTRAST_STEPS = 20


def as_dict() -> dict:
    return {k: v for k, v in globals().items() if k.isupper()}
