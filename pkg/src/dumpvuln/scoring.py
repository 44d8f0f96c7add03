"""Weighted summation of notes and factor presences, and vulnerability classes."""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import terrain
from .errors import ConfigError, DataError
from .factors import (
    DEFAULT_MIN_AREA,
    DEFAULT_RADII,
    FACTOR_KINDS,
    FactorKind,
    FactorStack,
    apply_area_filter,
    build_factor_stack,
    build_proximity,
    builtup_mask,
    check_roles,
    exclusion_mask,
)
from .raster import Feature, Grid, GridHeader

CLASS_DTYPE = np.int32

DEFAULT_FACTOR_WEIGHTS: Dict[FactorKind, float] = {
    FactorKind.RIVERS_CREEKS: 2.0,
    FactorKind.FLOODPLAIN: 2.0,
    FactorKind.PASTURE: 1.0,
    FactorKind.DEGRADED_LAND: 1.0,
    FactorKind.LOAM_SITE: 1.0,
    FactorKind.LOCAL_ROAD: 1.0,
}


class VulnClass(enum.IntEnum):
    VERY_LOW = 1
    LOW = 2
    INSIGNIFICANT = 3
    MODERATE = 4
    SIGNIFICANT = 5
    HIGH = 6
    VERY_HIGH = 7

    @property
    def label(self) -> str:
        return self.name.lower()


# Lower edges of classes LOW..VERY_HIGH; everything below 10 (including < 5) is VERY_LOW.
CLASS_EDGES = (10.0, 15.0, 20.0, 25.0, 30.0, 35.0)

# Range stated for the published method; the default weights only reach down to 3.
PUBLISHED_SCORE_RANGE = (5.0, 39.0)


@dataclass(frozen=True)
class WeightConfig:
    """Multipliers for the three restrictive notes and each factor presence."""

    altitude: float = 1.0
    slope: float = 1.0
    proximity: float = 1.0
    factors: Mapping[FactorKind, float] = field(
        default_factory=lambda: dict(DEFAULT_FACTOR_WEIGHTS)
    )

    def __post_init__(self):
        factors = dict(DEFAULT_FACTOR_WEIGHTS)
        for key, w in dict(self.factors).items():
            try:
                kind = FactorKind(key)
            except ValueError:
                raise ConfigError(f"unknown factor weight {key!r}") from None
            if isinstance(w, bool) or not isinstance(w, (int, float, np.floating, np.integer)):
                raise ConfigError(f"weight for {kind.value!r} must be a number")
            factors[kind] = float(w)
        object.__setattr__(self, "factors", factors)
        for name in ("altitude", "slope", "proximity"):
            object.__setattr__(self, name, float(getattr(self, name)))
        values = [self.altitude, self.slope, self.proximity, *factors.values()]
        if not all(math.isfinite(w) and w >= 0 for w in values):
            raise ConfigError("weights must be finite and >= 0")
        if not any(w > 0 for w in values):
            raise ConfigError("at least one weight must be > 0")

    def factor(self, kind) -> float:
        return self.factors[FactorKind(kind)]

    def to_dict(self) -> dict:
        return {
            "altitude": self.altitude,
            "slope": self.slope,
            "proximity": self.proximity,
            "factors": {k.value: self.factors[k] for k in FACTOR_KINDS},
        }

    @classmethod
    def from_dict(cls, data: Optional[Mapping]) -> "WeightConfig":
        """Build from a (possibly partial) mapping; missing entries keep defaults."""
        if not data:
            return cls()
        if not isinstance(data, Mapping):
            raise ConfigError("weights must be a JSON object")
        unknown = set(data) - {"altitude", "slope", "proximity", "factors"}
        if unknown:
            raise ConfigError(f"unknown weight keys: {sorted(unknown)}")
        kwargs = {k: data[k] for k in ("altitude", "slope", "proximity") if k in data}
        for k, v in kwargs.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"weight {k!r} must be a number")
        return cls(factors=data.get("factors") or {}, **kwargs)

    def scaled(self, k: float) -> "WeightConfig":
        return WeightConfig(
            self.altitude * k,
            self.slope * k,
            self.proximity * k,
            {kind: w * k for kind, w in self.factors.items()},
        )


def score_bounds(weights: WeightConfig) -> Tuple[float, float]:
    """Smallest and largest score reachable inside the buffer."""
    lo = weights.altitude * 1 + weights.slope * 1 + weights.proximity * 1
    hi = (
        weights.altitude * terrain.ALTITUDE_TOP_NOTE
        + weights.slope * terrain.SLOPE_TOP_NOTE
        + weights.proximity * 3
        + sum(weights.factors[k] for k in FACTOR_KINDS)
    )
    return lo, hi


def classify_score(score: float) -> VulnClass:
    score = float(score)
    if not math.isfinite(score):
        raise DataError(f"score must be finite, got {score!r}")
    return VulnClass(1 + bisect.bisect_right(CLASS_EDGES, score))


def classify_grid(scores: Grid) -> Grid:
    h = scores.header
    valid = scores.valid()
    classes = np.full(h.shape, CLASS_DTYPE(h.nodata), dtype=CLASS_DTYPE)
    idx = np.searchsorted(np.asarray(CLASS_EDGES), scores.data[valid], side="right")
    classes[valid] = 1 + idx
    return Grid(h, classes)


def _same_header(*grids: Grid) -> GridHeader:
    h = grids[0].header
    for g in grids[1:]:
        if g.header != h:
            raise DataError("input grids are not aligned to one header")
    return h


def score_map(alt: Grid, slope: Grid, prox: Grid, stack: FactorStack, weights: WeightConfig) -> Grid:
    """Weighted sum per in-buffer cell; nodata where proximity is 0 or a note is missing."""
    h = _same_header(alt, slope, prox, *(stack[k] for k in FACTOR_KINDS))
    if stack.header != h:
        raise DataError("factor stack is not aligned to the note grids")
    score = (
        weights.altitude * alt.data.astype(np.float64)
        + weights.slope * slope.data.astype(np.float64)
        + weights.proximity * prox.data.astype(np.float64)
    )
    for kind in FACTOR_KINDS:
        score = score + weights.factor(kind) * stack[kind].data.astype(np.float64)
    valid = (prox.data >= 1) & alt.valid() & slope.valid()
    return Grid(h, np.where(valid, score, h.nodata))


@dataclass
class VulnerabilityMap:
    header: GridHeader
    scores: Grid
    classes: Grid
    weights: WeightConfig
    proximity: Optional[Grid] = None
    stack: Optional[FactorStack] = None


def build_vulnerability_map(
    dem: Grid,
    features: Sequence[Feature],
    weights: Optional[WeightConfig] = None,
    radii: Sequence[float] = DEFAULT_RADII,
    min_area: float = DEFAULT_MIN_AREA,
) -> VulnerabilityMap:
    """Run the whole chain: DEM notes, buffers, factor presence, scores, classes.

    ``features`` may hold built-up, exclusion, factor and site features in
    any order; sites are ignored here.
    """
    weights = weights or WeightConfig()
    header = dem.header
    check_roles(features)
    alt, slope = terrain.classify_dem(dem)
    kept = apply_area_filter(features, min_area)
    prox = build_proximity(builtup_mask(kept, header), exclusion_mask(kept, header), radii)
    stack = build_factor_stack(kept, prox, header)
    scores = score_map(alt, slope, prox, stack, weights)
    return VulnerabilityMap(header, scores, classify_grid(scores), weights, prox, stack)
