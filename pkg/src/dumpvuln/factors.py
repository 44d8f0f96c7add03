"""Proximity notes around built-up areas and susceptible-factor presence layers."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import DataError
from .raster import (
    Feature,
    Grid,
    GridHeader,
    Polygon,
    distance_transform,
    polygon_area,
    rasterize_union,
)

DEFAULT_RADII = (250.0, 500.0, 1000.0)
DEFAULT_MIN_AREA = 50_000.0  # 5 ha

PROXIMITY_DTYPE = np.int32


class FactorKind(str, enum.Enum):
    RIVERS_CREEKS = "rivers_creeks"
    FLOODPLAIN = "floodplain"
    PASTURE = "pasture"
    DEGRADED_LAND = "degraded_land"
    LOAM_SITE = "loam_site"
    LOCAL_ROAD = "local_road"


FACTOR_KINDS = tuple(FactorKind)

# Land-cover derived kinds; only these go through the minimum-area filter.
AREA_KINDS = frozenset(
    {FactorKind.FLOODPLAIN, FactorKind.PASTURE, FactorKind.DEGRADED_LAND, FactorKind.LOAM_SITE}
)

BUILTUP = "builtup"
EXCLUSION = "exclusion"
SITES = "sites"
NON_FACTOR_ROLES = frozenset({BUILTUP, EXCLUSION, SITES})

ROLE_TO_KIND: Dict[str, FactorKind] = {
    "river": FactorKind.RIVERS_CREEKS,
    "floodplain": FactorKind.FLOODPLAIN,
    "pasture": FactorKind.PASTURE,
    "degraded": FactorKind.DEGRADED_LAND,
    "loam": FactorKind.LOAM_SITE,
    "road": FactorKind.LOCAL_ROAD,
}
# the kind labels themselves are accepted as roles too
ROLE_TO_KIND.update({k.value: k for k in FactorKind})

ROLES = frozenset(ROLE_TO_KIND) | NON_FACTOR_ROLES


def _describe(feature: Feature, index: int) -> str:
    label = f"feature #{index}"
    if feature.name:
        label += f" ({feature.name!r})"
    return label


def factor_kind(feature: Feature, index: int = 0) -> Optional[FactorKind]:
    """Kind for a feature's role; None for built-up/exclusion/site roles."""
    role = feature.role
    if role in NON_FACTOR_ROLES:
        return None
    try:
        return ROLE_TO_KIND[role]
    except KeyError:
        raise DataError(f"{_describe(feature, index)} has unknown role {role!r}") from None


def check_roles(features: Sequence[Feature]) -> None:
    for i, f in enumerate(features):
        factor_kind(f, i)


def builtup_mask(features: Iterable[Feature], header: GridHeader) -> Grid:
    return rasterize_union((f for f in features if f.role == BUILTUP), header)


def exclusion_mask(features: Iterable[Feature], header: GridHeader) -> Grid:
    return rasterize_union((f for f in features if f.role == EXCLUSION), header)


def _check_radii(radii: Sequence[float]) -> np.ndarray:
    r = np.asarray(radii, dtype=np.float64)
    if r.ndim != 1 or r.size == 0:
        raise DataError("radii must be a non-empty list")
    if not np.isfinite(r).all() or r[0] <= 0 or np.any(np.diff(r) <= 0):
        raise DataError(f"radii must be positive and strictly increasing, got {list(radii)}")
    return r


def build_proximity(
    builtup: Grid,
    exclusions: Optional[Grid] = None,
    radii: Sequence[float] = DEFAULT_RADII,
) -> Grid:
    """Buffer notes from the distance to the nearest built-up cell.

    With the default radii a cell gets 3 within 250 m (built-up cells
    included), 2 within 500 m, 1 within 1000 m and 0 beyond. Excluded cells
    are forced to 0.
    """
    r = _check_radii(radii)
    if not np.asarray(builtup.data, dtype=bool).any():
        raise DataError("built-up mask is empty; at least one built-up cell is required")
    dist = distance_transform(builtup).data
    # index of the first radius >= d: 0 for the innermost ring, len(r) beyond the last
    ring = np.searchsorted(r, dist, side="left")
    notes = (r.size - ring).astype(PROXIMITY_DTYPE)
    if exclusions is not None:
        if exclusions.header != builtup.header:
            raise DataError("exclusion mask is not aligned with the built-up mask")
        notes[np.asarray(exclusions.data, dtype=bool)] = 0
    return Grid(builtup.header, notes)


def filter_landcover(polygons: Iterable[Polygon], min_area: float = DEFAULT_MIN_AREA) -> List[Polygon]:
    """Keep polygons strictly larger than ``min_area`` square meters."""
    if not min_area >= 0:
        raise DataError(f"min_area must be >= 0, got {min_area!r}")
    return [p for p in polygons if polygon_area(p) > min_area]


def apply_area_filter(features: Sequence[Feature], min_area: float = DEFAULT_MIN_AREA) -> List[Feature]:
    """Drop small polygons of land-cover factor kinds; everything else passes."""
    if not min_area >= 0:
        raise DataError(f"min_area must be >= 0, got {min_area!r}")
    out = []
    for i, f in enumerate(features):
        if isinstance(f, Polygon) and factor_kind(f, i) in AREA_KINDS:
            if polygon_area(f) <= min_area:
                continue
        out.append(f)
    return out


@dataclass
class FactorStack:
    """One boolean presence grid per factor kind, all on one header."""

    header: GridHeader
    layers: Dict[FactorKind, Grid]

    def __getitem__(self, kind) -> Grid:
        return self.layers[FactorKind(kind)]

    def __iter__(self):
        return iter(FACTOR_KINDS)


def build_factor_stack(features: Sequence[Feature], proximity: Grid, header: GridHeader) -> FactorStack:
    """Rasterize each factor kind and keep presence only inside the outer buffer.

    Polygons mark cells by center-inside, polylines by supercover, points by
    their containing cell.
    """
    if proximity.header != header:
        raise DataError("proximity grid is not aligned with the analysis header")
    grouped: Dict[FactorKind, list] = {k: [] for k in FACTOR_KINDS}
    for i, f in enumerate(features):
        kind = factor_kind(f, i)
        if kind is not None:
            grouped[kind].append(f)
    in_buffer = proximity.data >= 1
    layers = {}
    for kind in FACTOR_KINDS:
        mask = rasterize_union(grouped[kind], header).data & in_buffer
        layers[kind] = Grid(header, mask)
    return FactorStack(header, layers)
