from typing import Final


DEFAULT_RADIUS: Final = 50.0
DEFAULT_SPACING: Final = 2.0
DEFAULT_EPS: Final = 1e-6

BIN_COUNT: Final = 12
BIN_WIDTH_DEG: Final = 360.0 / BIN_COUNT
DEFAULT_THRESHOLD: Final = 0.5

# Cityscapes label ids
BUILDING_CLASS_IDS: Final = frozenset({11, 12, 13})  # building, wall, fence
VOID_CLASS_IDS: Final = frozenset(range(0, 7))
FLAT_CLASS_IDS: Final = frozenset(range(7, 11))
SKY_CLASS_IDS: Final = frozenset({23})
EXCLUDED_CLASS_IDS: Final = VOID_CLASS_IDS | FLAT_CLASS_IDS | SKY_CLASS_IDS

DEFAULT_COARSE_EDGE: Final = 1400.0
DEFAULT_FINE_EDGE: Final = 174.0
DEFAULT_PARTITION_BUFFER: Final = 200.0
DEFAULT_ROAD_BUFFER: Final = 50.0

GI_Z_CUTOFF: Final = 1.96
GI_RANK_FRACTION: Final = 0.05

DEFAULT_INTERVALS: Final[tuple[float, ...]] = tuple(float(d) for d in range(10, 100, 5))
DEFAULT_RADII: Final[tuple[float, ...]] = (30.0, 40.0, 50.0)
DEFAULT_INTERSECTION_STEP: Final = 0.1
INTERSECTION_TOLERANCE: Final = 1e-3
MIN_FIT_POINTS: Final = 4

SPLINE_PENALTY_CANDIDATES: Final = 41
SPLINE_PENALTY_RANGE: Final = (1e-8, 1e2)

TOP_FOC_B_FRACTION: Final = 0.10
NEAR_NEIGHBOR_DISTANCE: Final = 10.0

UNLABELED: Final = "Unlabeled"
UNCLASSIFIED: Final = "Unclassified"
RESIDENTIAL: Final = "Residential"

ALL_CELLS: Final = "all"

FLOAT_FORMAT: Final = "%.9g"

FOOTPRINTS_FILE: Final = "footprints.geojson"
ROADS_FILE: Final = "roads.geojson"
SVI_FILE: Final = "svi.geojson"
BINS_FILE: Final = "bins.csv"
POPULATION_FILE: Final = "population.csv"
MANIFEST_FILE: Final = "manifest.json"

SIGHTLINE_COLUMNS: Final[list[str]] = [
    "svi_id",
    "building_id",
    "sample_index",
    "bearing_deg",
    "distance_m",
    "status",
]

BUILDING_COLUMNS: Final[list[str]] = [
    "building_id",
    "type",
    "perimeter_m",
    "u_avail",
    "u_seen",
    "v",
    "coc_b",
    "foc_b",
    "quintile",
    "top_foc_b",
]

CELL_COLUMNS: Final[list[str]] = [
    "cell_id",
    "n_total",
    "n_seen",
    "coc_a",
    "mean_coc_b",
    "road_completeness",
    "gi_z_coc_a",
    "gi_z_mean_coc_b",
    "gi_z_road",
]

SCAN_COLUMNS: Final[list[str]] = [
    "cell_id",
    "radius_m",
    "interval_m",
    "mean_coc_b",
    "mean_foc_b",
    "norm_coc_b",
    "norm_foc_b",
]

OPTIMA_COLUMNS: Final[list[str]] = [
    "cell_id",
    "radius_m",
    "fit_kind",
    "r2_coc",
    "r2_foc",
    "optimal_interval_m",
    "status",
]

BINS_COLUMNS: Final[list[str]] = ["svi_id", "bin_index", "class_id", "area"]
POPULATION_COLUMNS: Final[list[str]] = ["cell_id", "population"]
