"""Slope from a DEM and the altitude / slope rating tables."""

from __future__ import annotations

import bisect
import math
from typing import Tuple

import numpy as np

from .errors import DataError
from .raster import Grid

# Lower edges of the altitude bands; a value below the first edge gets the top note.
ALTITUDE_EDGES = tuple(range(200, 2001, 100))  # 200, 300, ..., 2000
ALTITUDE_TOP_NOTE = 20

# Slope bands in degrees. Below 3 degrees (including the unrated 0-1 range) -> 8.
SLOPE_EDGES = (3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 25.0)
SLOPE_TOP_NOTE = 8

NOTE_DTYPE = np.int32


def altitude_note(elevation: float) -> int:
    """Rating 1..20 for an elevation in meters; bands are [lower, upper)."""
    elevation = float(elevation)
    if not math.isfinite(elevation):
        raise DataError(f"elevation must be finite, got {elevation!r}")
    return ALTITUDE_TOP_NOTE - bisect.bisect_right(ALTITUDE_EDGES, elevation)


def slope_note(slope: float) -> int:
    """Rating 1..8 for a slope in degrees; bands are [lower, upper)."""
    slope = float(slope)
    if not math.isfinite(slope):
        raise DataError(f"slope must be finite, got {slope!r}")
    if slope < 0:
        raise DataError(f"slope must be >= 0, got {slope!r}")
    return SLOPE_TOP_NOTE - bisect.bisect_right(SLOPE_EDGES, slope)


def slope_degrees(dem: Grid) -> Grid:
    """Slope angle in degrees using Horn's 3x3 weighted differences.

    Edges are handled by replicating the border row/column. A nodata
    neighbour is replaced by the center value so that every valid DEM cell
    gets a slope; nodata cells stay nodata.
    """
    h = dem.header
    if h.nrows < 3 or h.ncols < 3:
        raise DataError(f"DEM must be at least 3x3, got {h.nrows}x{h.ncols}")
    z = dem.data.astype(np.float64)
    valid = dem.valid()
    zp = np.pad(z, 1, mode="edge")
    vp = np.pad(valid, 1, mode="edge")
    nrows, ncols = z.shape

    def nb(dr, dc):
        win = zp[1 + dr:1 + dr + nrows, 1 + dc:1 + dc + ncols]
        ok = vp[1 + dr:1 + dr + nrows, 1 + dc:1 + dc + ncols]
        return np.where(ok, win, z)

    a, b, c = nb(-1, -1), nb(-1, 0), nb(-1, 1)
    d, f = nb(0, -1), nb(0, 1)
    g, hh, i = nb(1, -1), nb(1, 0), nb(1, 1)

    cs = h.cellsize
    dzdx = ((c + 2 * f + i) - (a + 2 * d + g)) / (8 * cs)
    dzdy = ((g + 2 * hh + i) - (a + 2 * b + c)) / (8 * cs)
    slope = np.degrees(np.arctan(np.hypot(dzdx, dzdy)))
    return Grid(h, np.where(valid, slope, h.nodata))


def altitude_notes(values: np.ndarray) -> np.ndarray:
    """Vectorized :func:`altitude_note` (no nodata handling)."""
    idx = np.searchsorted(np.asarray(ALTITUDE_EDGES, dtype=np.float64), values, side="right")
    return (ALTITUDE_TOP_NOTE - idx).astype(NOTE_DTYPE)


def slope_notes(values: np.ndarray) -> np.ndarray:
    """Vectorized :func:`slope_note` (no nodata handling)."""
    if np.any(values < 0):
        raise DataError("slope must be >= 0")
    idx = np.searchsorted(np.asarray(SLOPE_EDGES), values, side="right")
    return (SLOPE_TOP_NOTE - idx).astype(NOTE_DTYPE)


def classify_dem(dem: Grid) -> Tuple[Grid, Grid]:
    """Return ``(altitude_notes, slope_notes)`` grids; nodata where the DEM is nodata."""
    h = dem.header
    valid = dem.valid()
    nodata = NOTE_DTYPE(h.nodata)

    alt = np.full(h.shape, nodata, dtype=NOTE_DTYPE)
    alt[valid] = altitude_notes(dem.data[valid].astype(np.float64))

    slope = slope_degrees(dem)
    sl = np.full(h.shape, nodata, dtype=NOTE_DTYPE)
    sl[valid] = slope_notes(slope.data[valid])
    return Grid(h, alt), Grid(h, sl)
