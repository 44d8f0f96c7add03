"""ESRI ASCII grids, GeoJSON feature collections and PPM class maps."""

from __future__ import annotations

import json
import os
import re
import tempfile
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from .errors import DataError, FeatureFormatError, GridFormatError
from .raster import Feature, Grid, GridHeader, PointFeature, Polygon, Polyline
from .scoring import VulnClass
from .validation import ObservedSite

PathLike = Union[str, os.PathLike]

ASCII_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "NODATA_value")

PALETTE = {
    VulnClass.VERY_LOW: (26, 150, 65),
    VulnClass.LOW: (166, 217, 106),
    VulnClass.INSIGNIFICANT: (255, 255, 191),
    VulnClass.MODERATE: (253, 174, 97),
    VulnClass.SIGNIFICANT: (244, 109, 67),
    VulnClass.HIGH: (215, 48, 39),
    VulnClass.VERY_HIGH: (165, 0, 38),
}
NODATA_COLOR = (255, 255, 255)

_INT_TOKEN = re.compile(r"[+-]?\d+\Z")


def atomic_write(path: PathLike, payload: Union[bytes, str]) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


# ---------------------------------------------------------------------------
# ESRI ASCII grid
# ---------------------------------------------------------------------------


def _fmt_number(value, integer: bool) -> str:
    if integer:
        return str(int(value))
    return repr(float(value))


def format_ascii_grid(grid: Grid) -> str:
    """Serialize with full float precision (``repr``) or plain integers."""
    h = grid.header
    integer = grid.data.dtype.kind in "iub"
    lines = [
        f"ncols {h.ncols}",
        f"nrows {h.nrows}",
        f"xllcorner {_fmt_number(h.x_origin, False)}",
        f"yllcorner {_fmt_number(h.y_origin, False)}",
        f"cellsize {_fmt_number(h.cellsize, False)}",
        f"NODATA_value {_fmt_number(h.nodata, integer and float(h.nodata).is_integer())}",
    ]
    if integer:
        rows = (" ".join(str(int(v)) for v in row) for row in grid.data.astype(np.int64))
    else:
        rows = (" ".join(repr(float(v)) for v in row) for row in grid.data)
    lines.extend(rows)
    return "\n".join(lines) + "\n"


def parse_ascii_grid(text: str, source: str = "<string>") -> Grid:
    """Parse an ESRI ASCII grid.

    Keys are case-insensitive. Cell-center origins (``xllcenter``) are
    converted to corners. Data rows must hold exactly ``ncols`` values each.
    Grids whose tokens are all integers load as int64, others as float64.
    """
    lines = [ln for ln in text.splitlines()]
    header = {}
    i = 0
    known = {"ncols", "nrows", "xllcorner", "yllcorner", "xllcenter", "yllcenter", "cellsize", "nodata_value"}
    while i < len(lines):
        parts = lines[i].split()
        if not parts:
            i += 1
            continue
        key = parts[0].lower()
        if key not in known:
            break
        if len(parts) != 2:
            raise GridFormatError(f"{source}: line {i + 1}: malformed header line {lines[i]!r}")
        if key in header:
            raise GridFormatError(f"{source}: line {i + 1}: duplicate header key {parts[0]!r}")
        header[key] = (parts[1], i + 1)
        i += 1

    def number(key, cast=float):
        if key not in header:
            raise GridFormatError(f"{source}: missing header key {key!r}")
        token, lineno = header[key]
        try:
            return cast(token)
        except ValueError:
            raise GridFormatError(f"{source}: line {lineno}: {key} value {token!r} is not a number") from None

    ncols = number("ncols", int)
    nrows = number("nrows", int)
    cellsize = number("cellsize")
    if "xllcorner" in header:
        x0 = number("xllcorner")
    elif "xllcenter" in header:
        x0 = number("xllcenter") - cellsize / 2
    else:
        raise GridFormatError(f"{source}: missing header key 'xllcorner'")
    if "yllcorner" in header:
        y0 = number("yllcorner")
    elif "yllcenter" in header:
        y0 = number("yllcenter") - cellsize / 2
    else:
        raise GridFormatError(f"{source}: missing header key 'yllcorner'")
    nodata = number("nodata_value") if "nodata_value" in header else -9999.0
    try:
        gh = GridHeader(ncols, nrows, x0, y0, cellsize, nodata)
    except DataError as exc:
        raise GridFormatError(f"{source}: invalid header: {exc}") from None

    rows: List[List[str]] = []
    for lineno in range(i, len(lines)):
        tokens = lines[lineno].split()
        if not tokens:
            continue
        if len(rows) == nrows:
            raise GridFormatError(
                f"{source}: line {lineno + 1}: extra data after {nrows} rows"
            )
        if len(tokens) != ncols:
            raise GridFormatError(
                f"{source}: line {lineno + 1}: row {len(rows)} has {len(tokens)} values, expected {ncols}"
            )
        rows.append(tokens)
    if len(rows) != nrows:
        raise GridFormatError(f"{source}: truncated data: expected {nrows} rows, found {len(rows)}")

    integer = all(_INT_TOKEN.match(t) for row in rows for t in row)
    data = np.empty((nrows, ncols), dtype=np.int64 if integer else np.float64)
    for r, tokens in enumerate(rows):
        for c, tok in enumerate(tokens):
            try:
                data[r, c] = int(tok) if integer else float(tok)
            except ValueError:
                raise GridFormatError(
                    f"{source}: row {r}, col {c}: non-numeric token {tok!r}"
                ) from None
    if not integer and not np.isfinite(data).all():
        r, c = np.argwhere(~np.isfinite(data))[0]
        raise GridFormatError(f"{source}: row {r}, col {c}: non-finite value")
    return Grid(gh, data)


def read_ascii_grid(path: PathLike) -> Grid:
    with open(path, "r", encoding="ascii", errors="strict") as fh:
        try:
            text = fh.read()
        except UnicodeDecodeError as exc:
            raise GridFormatError(f"{path}: not an ASCII grid ({exc})") from None
    return parse_ascii_grid(text, str(path))


def write_ascii_grid(grid: Grid, path: PathLike) -> None:
    atomic_write(path, format_ascii_grid(grid))


# ---------------------------------------------------------------------------
# GeoJSON
# ---------------------------------------------------------------------------


def parse_feature_collection(doc, default_role: Optional[str] = None, source: str = "<document>") -> List[Feature]:
    """Convert a GeoJSON FeatureCollection into features.

    Supported geometries are Point, LineString and Polygon (outer ring only).
    A feature's ``role`` property overrides ``default_role``.
    """
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise FeatureFormatError(f"{source}: expected a GeoJSON FeatureCollection")
    raw = doc.get("features")
    if not isinstance(raw, list):
        raise FeatureFormatError(f"{source}: 'features' must be an array")

    out: List[Feature] = []
    for idx, feat in enumerate(raw):
        where = f"{source}: feature {idx}"
        if not isinstance(feat, dict) or feat.get("type") != "Feature":
            raise FeatureFormatError(f"{where}: not a GeoJSON Feature")
        props = feat.get("properties") or {}
        if not isinstance(props, dict):
            raise FeatureFormatError(f"{where}: properties must be an object")
        role = props.get("role", default_role)
        if not isinstance(role, str) or not role:
            raise FeatureFormatError(f"{where}: no role given (layer entry or 'role' property)")
        name = props.get("name", feat.get("id"))
        name = None if name is None else str(name)
        geom = feat.get("geometry")
        if not isinstance(geom, dict):
            raise FeatureFormatError(f"{where}: missing geometry")
        gtype = geom.get("type")
        coords = geom.get("coordinates")
        try:
            if gtype == "Point":
                out.append(PointFeature(coords[0], coords[1], role, name, dict(props)))
            elif gtype == "LineString":
                out.append(Polyline(tuple(tuple(c[:2]) for c in coords), role, name))
            elif gtype == "Polygon":
                if not coords:
                    raise DataError("polygon has no rings")
                out.append(Polygon(tuple(tuple(c[:2]) for c in coords[0]), role, name))
            else:
                raise FeatureFormatError(f"{where}: unsupported geometry type {gtype!r}")
        except FeatureFormatError:
            raise
        except (DataError, TypeError, IndexError, ValueError) as exc:
            raise FeatureFormatError(f"{where}: invalid {gtype} geometry: {exc}") from None
    return out


def read_vector_file(path: PathLike, role: Optional[str] = None) -> List[Feature]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FeatureFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_feature_collection(doc, role, str(path))


def feature_to_geojson(feature: Feature) -> dict:
    props = {"role": feature.role}
    if feature.name is not None:
        props["name"] = feature.name
    if isinstance(feature, PointFeature):
        geom = {"type": "Point", "coordinates": [feature.x, feature.y]}
    elif isinstance(feature, Polyline):
        geom = {"type": "LineString", "coordinates": [list(v) for v in feature.vertices]}
    else:
        geom = {"type": "Polygon", "coordinates": [[list(v) for v in feature.vertices]]}
    return {"type": "Feature", "properties": props, "geometry": geom}


def format_feature_collection(features: Iterable[Feature]) -> str:
    doc = {"type": "FeatureCollection", "features": [feature_to_geojson(f) for f in features]}
    return json.dumps(doc, indent=1) + "\n"


def write_vector_file(features: Iterable[Feature], path: PathLike) -> None:
    atomic_write(path, format_feature_collection(features))


def sites_from_features(features: Sequence[Feature]) -> List[ObservedSite]:
    """Point features with role ``sites`` become observed sites."""
    sites = []
    for i, f in enumerate(features):
        if f.role != "sites":
            continue
        if not isinstance(f, PointFeature):
            raise FeatureFormatError(f"site feature #{i} must be a Point")
        date = f.properties.get("date") if f.properties else None
        sites.append(ObservedSite(f.x, f.y, f.name or f"site-{i + 1}", date))
    return sites


# ---------------------------------------------------------------------------
# PPM rendering
# ---------------------------------------------------------------------------


def render_ppm(classes: Grid) -> bytes:
    """Binary P6 image, one pixel per cell, row 0 at the top."""
    h = classes.header
    lut = np.zeros((len(VulnClass) + 1, 3), dtype=np.uint8)
    lut[0] = NODATA_COLOR
    for cls, rgb in PALETTE.items():
        lut[int(cls)] = rgb
    data = np.asarray(classes.data)
    valid = classes.valid()
    codes = np.zeros(h.shape, dtype=np.int64)
    codes[valid] = data[valid]
    if valid.any() and (codes[valid].min() < 1 or codes[valid].max() > len(VulnClass)):
        raise DataError("class grid holds values outside 1..7")
    pixels = lut[codes]
    return f"P6\n{h.ncols} {h.nrows}\n255\n".encode("ascii") + pixels.tobytes()


def render_map(classes: Grid, path: PathLike) -> None:
    atomic_write(path, render_ppm(classes))
