"""Constants for fractal_geom package."""

# Geometry Constants
DEFAULT_TOL = 1e-9
DEDUP_DECIMALS = 9

# Separator Constants
COVER_CONSTANT_PLANE = 7
COVER_CONSTANT_BASE = 5
TSP_BALANCE_FRACTION = 1.0 / 8.0
DEFAULT_SAMPLE_CENTERS = 24
MAX_RADII_PER_CENTER = 32
THICKNESS_PAIR_BUDGET = 2000
DEFAULT_THICKNESS_LAMBDA = 2.0

# Dimension Estimation Constants
FIT_R2_WARNING = 0.9
MIN_SCALES = 3
DEFAULT_DOUBLING_CENTERS = 64

# Exact Solver Limits
HELD_KARP_MIN_N = 2
HELD_KARP_MAX_N = 20
SEPARATOR_TSP_MIN_N = 3
SEPARATOR_TSP_MAX_N = 12
INITIAL_CROSSING_BUDGET = 2
TSP_BASE_CASE_SIZE = 8
RSMT_MAX_N = 8
RSMT_ENUMERATION_LIMIT = 200_000
RSMT_BATCH = 4096

# Independent Set Limits
IS_BRUTE_MAX_N = 25
IS_SEPARATOR_MAX_N = 20
IS_SEPARATOR_MAX_K = 6
IS_BASE_CASE_SIZE = 8
DEFAULT_ALLOW_TANGENT = True

# Approximation Scheme Limits
BRUTE_FORCE_OPT_MAX_N = 32

# Spanner Constants
NEAR_FACTOR = 6.0
SHORTCUT_DIVISOR = 20.0
CROSSING_LEMMA_EXPONENT = 5
PATH_BAG_BASE = 4

# Harness Constants
RANDOM_SEED = 0
MAX_SEED = 2**64 - 1
DEFAULT_REPETITIONS = 1
DEFAULT_THREADS = 1
DEFAULT_LOG_LEVEL = "WARNING"
ERROR_EXIT_CODE = 2

# Environment and Path Constants
THREADS_ENV = "FRACTAL_GEOM_THREADS"
PROJECT_DIR_ENV = "FRACTAL_GEOM_PROJECT_DIR"
SETTINGS_DIR = ".fractal_geom"
SETTINGS_KEY = "fractalGeom"

# Generator Families
GENERATOR_KINDS = ("carpet", "cantor", "grid", "line", "random", "carpet-subsample")

# Experiment Commands
COMMANDS = (
    "generate", "estimate-dim", "separator", "tsp", "tsp-compare", "rsmt",
    "is", "cover", "pack", "spanner", "pathwidth", "scaling",
)
SCALING_QUANTITIES = ("pathwidth", "separator", "spanner-edges")

# CSV Columns per Command
CSV_COLUMNS = {
    "generate": ["seed", "n", "dim", "label"],
    "estimate-dim": ["seed", "n", "method", "delta_hat", "fit_r2"],
    "separator": ["seed", "n", "radius", "inside", "outside", "crossing", "balance"],
    "tsp": ["seed", "n", "length", "crossing_budget", "separator_crossings"],
    "tsp-compare": ["seed", "n", "hk_length", "sep_length", "length_ratio"],
    "rsmt": ["seed", "n", "length", "mst_length", "steiner_points",
             "diamonds_disjoint", "sep_crossing", "sep_balance"],
    "is": ["seed", "n", "k", "found", "oracle_found", "agree"],
    "cover": ["seed", "n", "eps", "ell", "size", "opt", "ratio"],
    "pack": ["seed", "n", "eps", "ell", "size", "opt", "ratio"],
    "spanner": ["seed", "n", "eps", "edges_g", "edges_pruned", "dilation_g", "dilation_pruned"],
    "pathwidth": ["seed", "n", "eps", "width", "valid"],
    "scaling": ["seed", "n", "quantity", "value"],
}
