"""Raster container, vector-to-raster conversion and exact distance transform.

Cells are addressed ``(row, col)`` with row 0 the northernmost row, the same
orientation as ESRI ASCII grids. Cell edges are always derived from the
header as ``x_origin + col * cellsize`` and ``y_origin + k * cellsize``
(``k`` counted from the south), so every routine here agrees bit-for-bit on
where a cell boundary lies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DataError

Coord = Tuple[float, float]

DEFAULT_NODATA = -9999.0


@dataclass(frozen=True)
class GridHeader:
    """Georeferencing of a rectangular raster in planar meters."""

    ncols: int
    nrows: int
    x_origin: float
    y_origin: float
    cellsize: float
    nodata: float = DEFAULT_NODATA

    def __post_init__(self):
        if int(self.ncols) != self.ncols or self.ncols < 1:
            raise DataError(f"ncols must be a positive integer, got {self.ncols!r}")
        if int(self.nrows) != self.nrows or self.nrows < 1:
            raise DataError(f"nrows must be a positive integer, got {self.nrows!r}")
        for name in ("x_origin", "y_origin", "cellsize", "nodata"):
            if not math.isfinite(getattr(self, name)):
                raise DataError(f"{name} must be finite")
        if self.cellsize <= 0:
            raise DataError(f"cellsize must be > 0, got {self.cellsize!r}")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def x_max(self) -> float:
        return self.x_origin + self.ncols * self.cellsize

    @property
    def y_max(self) -> float:
        return self.y_origin + self.nrows * self.cellsize

    def col_edges(self) -> np.ndarray:
        """West edges of columns 0..ncols (length ncols + 1)."""
        return self.x_origin + np.arange(self.ncols + 1) * self.cellsize

    def cell_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        """Return ``(xs, ys)``: column center x and row center y (row 0 north)."""
        xs = self.x_origin + (np.arange(self.ncols) + 0.5) * self.cellsize
        ys = self.y_origin + (self.nrows - np.arange(self.nrows) - 0.5) * self.cellsize
        return xs, ys

    def center_of(self, row: int, col: int) -> Coord:
        return (
            self.x_origin + (col + 0.5) * self.cellsize,
            self.y_origin + (self.nrows - row - 0.5) * self.cellsize,
        )


@dataclass
class Grid:
    """A header plus a ``(nrows, ncols)`` array; row 0 is the north edge.

    Boolean grids are used as masks and carry no nodata cells. Numeric grids
    mark missing cells with ``header.nodata``.
    """

    header: GridHeader
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.shape != self.header.shape:
            raise DataError(
                f"grid data shape {self.data.shape} does not match header "
                f"{self.header.shape}"
            )
        if self.data.dtype.kind == "f" and not np.isfinite(self.data).all():
            raise DataError("grid cells must be finite or nodata")

    @property
    def nodata(self) -> float:
        return self.header.nodata

    def valid(self) -> np.ndarray:
        """Boolean array, True where the cell is not nodata."""
        if self.data.dtype == bool:
            return np.ones(self.header.shape, dtype=bool)
        return self.data != self.header.nodata

    def count(self) -> int:
        return int(np.count_nonzero(self.data))

    @classmethod
    def empty_mask(cls, header: GridHeader) -> "Grid":
        return cls(header, np.zeros(header.shape, dtype=bool))

    @classmethod
    def filled(cls, header: GridHeader, value, dtype=np.float64) -> "Grid":
        return cls(header, np.full(header.shape, value, dtype=dtype))


def _check_coords(vertices: Sequence[Coord]) -> Tuple[Coord, ...]:
    out = []
    for v in vertices:
        if len(v) < 2:
            raise DataError(f"vertex {v!r} needs x and y")
        x, y = float(v[0]), float(v[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise DataError(f"non-finite vertex ({x}, {y})")
        out.append((x, y))
    return tuple(out)


@dataclass(frozen=True)
class Polygon:
    """Single closed ring; first vertex repeated as the last one."""

    vertices: Tuple[Coord, ...]
    role: str
    name: Optional[str] = None

    def __post_init__(self):
        verts = _check_coords(self.vertices)
        if len(verts) < 4:
            raise DataError(f"polygon ring needs >= 4 vertices, got {len(verts)}")
        if verts[0] != verts[-1]:
            raise DataError("polygon ring is not closed (first vertex != last vertex)")
        object.__setattr__(self, "vertices", verts)


@dataclass(frozen=True)
class Polyline:
    vertices: Tuple[Coord, ...]
    role: str
    name: Optional[str] = None

    def __post_init__(self):
        verts = _check_coords(self.vertices)
        if len(verts) < 2:
            raise DataError(f"polyline needs >= 2 vertices, got {len(verts)}")
        object.__setattr__(self, "vertices", verts)


@dataclass(frozen=True)
class PointFeature:
    x: float
    y: float
    role: str
    name: Optional[str] = None
    properties: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        (x, y), = _check_coords([(self.x, self.y)])
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


Feature = Union[Polygon, Polyline, PointFeature]


def polygon_area(polygon: Polygon) -> float:
    """Absolute shoelace area of the ring in square meters."""
    v = polygon.vertices
    terms = (v[i][0] * v[i + 1][1] - v[i + 1][0] * v[i][1] for i in range(len(v) - 1))
    return abs(math.fsum(terms)) / 2.0


def polygon_perimeter(polygon: Polygon) -> float:
    v = polygon.vertices
    return math.fsum(math.dist(v[i], v[i + 1]) for i in range(len(v) - 1))


def rasterize_polygon(polygon: Polygon, header: GridHeader) -> Grid:
    """Mark cells whose center lies inside the ring (even-odd rule).

    Scanline form of the crossing-number test: for each row center, the
    x-coordinates where ring edges cross the row are collected, and a center
    is inside when an odd number of crossings lie strictly east of it.
    """
    mask = np.zeros(header.shape, dtype=bool)
    ring = np.asarray(polygon.vertices, dtype=np.float64)
    xa, ya = ring[:-1, 0], ring[:-1, 1]
    xb, yb = ring[1:, 0], ring[1:, 1]
    xs, ys = header.cell_centers()
    ymin, ymax = ring[:, 1].min(), ring[:, 1].max()
    rows = np.nonzero((ys >= ymin) & (ys <= ymax))[0]
    for r in rows:
        y = ys[r]
        crossing = (ya > y) != (yb > y)
        if not crossing.any():
            continue
        x0, y0 = xa[crossing], ya[crossing]
        x1, y1 = xb[crossing], yb[crossing]
        xc = np.sort((x1 - x0) * (y - y0) / (y1 - y0) + x0)
        # number of crossings with xc > x for every column center
        east = xc.size - np.searchsorted(xc, xs, side="right")
        mask[r] = (east % 2) == 1
    return Grid(header, mask)


def _mark_segment(mask: np.ndarray, header: GridHeader, p: Coord, q: Coord) -> None:
    """Set every cell whose closed square intersects segment ``p``-``q``."""
    (x1, y1), (x2, y2) = p, q
    cs = header.cellsize
    x0, y0 = header.x_origin, header.y_origin
    nrows, ncols = header.shape
    xmin, xmax = min(x1, x2), max(x1, x2)

    c_lo = max(int(math.floor((xmin - x0) / cs)) - 1, 0)
    c_hi = min(int(math.floor((xmax - x0) / cs)) + 1, ncols - 1)
    if c_lo > c_hi:
        return
    cols = np.arange(c_lo, c_hi + 1)
    left = x0 + cols * cs
    right = x0 + (cols + 1) * cs
    keep = (left <= xmax) & (right >= xmin)
    cols, left, right = cols[keep], left[keep], right[keep]
    if cols.size == 0:
        return

    if x1 == x2:
        lo = np.full(cols.size, min(y1, y2))
        hi = np.full(cols.size, max(y1, y2))
    else:
        slope = (y2 - y1) / (x2 - x1)

        def y_at(x):
            y = y1 + (x - x1) * slope
            y = np.where(x == x1, y1, y)
            return np.where(x == x2, y2, y)

        ya = y_at(np.maximum(left, xmin))
        yb = y_at(np.minimum(right, xmax))
        lo, hi = np.minimum(ya, yb), np.maximum(ya, yb)

    for c, ylo, yhi in zip(cols, lo, hi):
        s_lo = max(int(math.floor((ylo - y0) / cs)) - 1, 0)
        s_hi = min(int(math.floor((yhi - y0) / cs)) + 1, nrows - 1)
        if s_lo > s_hi:
            continue
        s = np.arange(s_lo, s_hi + 1)
        hit = s[(y0 + s * cs <= yhi) & (y0 + (s + 1) * cs >= ylo)]
        mask[nrows - 1 - hit, c] = True


def rasterize_polyline(line: Polyline, header: GridHeader) -> Grid:
    """Supercover rasterization: every cell touched by the chain is marked.

    Cell squares are closed, so a segment grazing a shared edge or corner
    marks the cells on both sides.
    """
    mask = np.zeros(header.shape, dtype=bool)
    v = line.vertices
    for i in range(len(v) - 1):
        _mark_segment(mask, header, v[i], v[i + 1])
    return Grid(header, mask)


def rasterize_point(point: PointFeature, header: GridHeader) -> Grid:
    mask = np.zeros(header.shape, dtype=bool)
    cell = point_to_cell(point, header)
    if cell is not None:
        mask[cell] = True
    return Grid(header, mask)


def rasterize_feature(feature: Feature, header: GridHeader) -> Grid:
    if isinstance(feature, Polygon):
        return rasterize_polygon(feature, header)
    if isinstance(feature, Polyline):
        return rasterize_polyline(feature, header)
    if isinstance(feature, PointFeature):
        return rasterize_point(feature, header)
    raise TypeError(f"not a feature: {feature!r}")


def rasterize_union(features: Iterable[Feature], header: GridHeader) -> Grid:
    mask = np.zeros(header.shape, dtype=bool)
    for f in features:
        mask |= rasterize_feature(f, header).data
    return Grid(header, mask)


def _lower_envelope(f: Sequence[int], inf: int) -> list:
    """1-D squared distance transform ``d[p] = min_q f[q] + (p - q)**2``.

    Lower envelope of parabolas (Felzenszwalb & Huttenlocher). Entries equal
    to ``inf`` contribute no parabola; at least one entry must be finite.
    """
    n = len(f)
    v = []  # parabola apexes in the envelope
    z = []  # left boundary of each parabola's reign
    for q in range(n):
        fq = f[q]
        if fq >= inf:
            continue
        while v:
            p = v[-1]
            s = ((fq + q * q) - (f[p] + p * p)) / (2 * (q - p))
            if s <= z[-1]:
                v.pop()
                z.pop()
            else:
                break
        if v:
            z.append(s)
        else:
            z.append(-math.inf)
        v.append(q)
    out = [0] * n
    k = 0
    last = len(v) - 1
    for p in range(n):
        while k < last and z[k + 1] < p:
            k += 1
        d = p - v[k]
        out[p] = d * d + f[v[k]]
    return out


def squared_cell_distance(mask: np.ndarray) -> np.ndarray:
    """Exact squared distance, in cell units, to the nearest True cell."""
    mask = np.asarray(mask, dtype=bool)
    nrows, ncols = mask.shape
    inf = (nrows + ncols) ** 2 + 1
    big = nrows + ncols + 1

    # vertical pass: distance to nearest source within each column
    g = np.empty((nrows, ncols), dtype=np.int64)
    run = np.full(ncols, big, dtype=np.int64)
    for r in range(nrows):
        run = np.where(mask[r], 0, np.minimum(run + 1, big))
        g[r] = run
    run = np.full(ncols, big, dtype=np.int64)
    for r in range(nrows - 1, -1, -1):
        run = np.where(mask[r], 0, np.minimum(run + 1, big))
        g[r] = np.minimum(g[r], run)
    f = np.where(g >= big, inf, g * g)

    out = np.empty((nrows, ncols), dtype=np.int64)
    for r in range(nrows):
        out[r] = _lower_envelope(f[r].tolist(), inf)
    return out


def distance_transform(mask: Grid) -> Grid:
    """Euclidean distance in meters from each cell center to the nearest True cell center.

    Raises:
        DataError: if the mask has no True cell.
    """
    data = np.asarray(mask.data, dtype=bool)
    if not data.any():
        raise DataError("no source cells")
    d2 = squared_cell_distance(data)
    return Grid(mask.header, np.sqrt(d2.astype(np.float64)) * mask.header.cellsize)


def point_to_cell(p: Union[PointFeature, Coord], header: GridHeader) -> Optional[Tuple[int, int]]:
    """Map a planar point to ``(row, col)``, or None when it falls outside.

    West and south edges belong to the grid; north and east edges do not.
    """
    if isinstance(p, PointFeature):
        x, y = p.x, p.y
    else:
        x, y = float(p[0]), float(p[1])
    if not (header.x_origin <= x < header.x_max and header.y_origin <= y < header.y_max):
        return None
    # clamp guards against floor() rounding across the last edge
    col = min(math.floor((x - header.x_origin) / header.cellsize), header.ncols - 1)
    from_south = min(math.floor((y - header.y_origin) / header.cellsize), header.nrows - 1)
    return (header.nrows - 1 - from_south, col)
