"""Vulnerability mapping of rural areas to illegal waste dumping."""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, DumpVulnError, FeatureFormatError, GridFormatError
from .factors import (
    DEFAULT_MIN_AREA,
    DEFAULT_RADII,
    FactorKind,
    FactorStack,
    build_factor_stack,
    build_proximity,
    filter_landcover,
)
from .raster import (
    Grid,
    GridHeader,
    PointFeature,
    Polygon,
    Polyline,
    distance_transform,
    point_to_cell,
    polygon_area,
    rasterize_polygon,
    rasterize_polyline,
)
from .scoring import (
    VulnClass,
    VulnerabilityMap,
    WeightConfig,
    build_vulnerability_map,
    classify_score,
    score_bounds,
    score_map,
)
from .terrain import altitude_note, classify_dem, slope_degrees, slope_note
from .validation import ObservedSite, ValidationReport, validate_sites
