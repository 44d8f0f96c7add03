"""Deterministic synthetic landscapes for exercising the full pipeline.

All randomness comes from :class:`SplitMix64`, a 64-bit generator defined
entirely by integer arithmetic, so a seed produces the same draw sequence on
every platform. Draws are consumed in a fixed order: rivers, terrain,
villages, land-cover patches, roads, planted sites.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import List, Mapping, Tuple

import numpy as np

from .errors import ConfigError, DataError
from .raster import Grid, GridHeader, PointFeature, Polygon, Polyline
from .validation import ObservedSite

MASK64 = (1 << 64) - 1


class SplitMix64:
    """Steele, Lea & Flood's SplitMix64 generator (the seeder used by xoshiro).

    >>> rng = SplitMix64(1234567)
    >>> rng.next_u64()
    6457827717110365317
    """

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi] by rejection sampling (no modulo bias)."""
        span = hi - lo + 1
        if span <= 0:
            raise ValueError("empty range")
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            x = self.next_u64()
            if x < limit:
                return lo + x % span


@dataclass(frozen=True)
class SynthConfig:
    ncols: int = 64
    nrows: int = 64
    cellsize: float = 50.0
    x_origin: float = 0.0
    y_origin: float = 0.0
    seed: int = 42
    villages: int = 3
    rivers: int = 1
    pastures: int = 4
    roads: int = 2
    degraded: int = 2
    loam: int = 1
    relief: float = 120.0
    valley_depth: float = 30.0
    base_elevation: float = 190.0
    floodplain_halfwidth: float = 120.0
    sites: int = 20
    outside_sites: int = 0

    def __post_init__(self):
        if self.ncols < 16 or self.nrows < 16:
            raise ConfigError(f"synthetic grid must be at least 16x16, got {self.ncols}x{self.nrows}")
        if not self.cellsize > 0:
            raise ConfigError("cellsize must be > 0")
        if not 0 <= int(self.seed) <= MASK64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        for name in ("villages", "rivers", "pastures", "roads", "degraded", "loam", "sites", "outside_sites"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        for name in ("relief", "valley_depth", "floodplain_halfwidth"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be >= 0")

    @classmethod
    def from_dict(cls, data: Mapping) -> "SynthConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown synthetic config keys: {sorted(unknown)}")
        kwargs = {}
        for key, value in data.items():
            target = int if known[key].type in ("int", int) else float
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{key!r} must be a number")
            if target is int and value != int(value):
                raise ConfigError(f"{key!r} must be an integer")
            kwargs[key] = target(value)
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def header(self) -> GridHeader:
        return GridHeader(self.ncols, self.nrows, self.x_origin, self.y_origin, self.cellsize)


@dataclass(frozen=True)
class _River:
    y_mid: float
    amplitude: float
    wavelength: float
    phase: float
    halfwidth: float

    def y_at(self, x):
        return self.y_mid + self.amplitude * np.sin(2 * np.pi * x / self.wavelength + self.phase)


Rect = Tuple[float, float, float, float]  # xmin, ymin, xmax, ymax


def _rect_ring(r: Rect):
    x0, y0, x1, y1 = r
    return ((x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0))


def _rect_distance(x: float, y: float, r: Rect) -> float:
    dx = max(r[0] - x, 0.0, x - r[2])
    dy = max(r[1] - y, 0.0, y - r[3])
    return math.hypot(dx, dy)


def _overlaps(a: Rect, b: Rect, gap: float) -> bool:
    return not (a[2] + gap <= b[0] or b[2] + gap <= a[0] or a[3] + gap <= b[1] or b[3] + gap <= a[1])


class _Scene:
    def __init__(self, cfg: SynthConfig):
        self.cfg = cfg
        self.rng = SplitMix64(cfg.seed)
        self.width = cfg.ncols * cfg.cellsize
        self.height = cfg.nrows * cfg.cellsize
        self.rivers: List[_River] = []
        self.villages: List[Rect] = []

    # local coordinates run from (0, 0) at the south-west corner
    def clamp(self, x: float, y: float, margin: float = 0.0) -> Tuple[float, float]:
        x = min(max(x, margin), self.width - margin)
        y = min(max(y, margin), self.height - margin)
        return x, y

    def world(self, x: float, y: float) -> Tuple[float, float]:
        return (self.cfg.x_origin + x, self.cfg.y_origin + y)

    def draw_rivers(self):
        rng, H, W = self.rng, self.height, self.width
        n = self.cfg.rivers
        for k in range(n):
            band = H / n
            self.rivers.append(
                _River(
                    y_mid=band * k + band * rng.uniform(0.35, 0.65),
                    amplitude=band * rng.uniform(0.05, 0.15),
                    wavelength=W * rng.uniform(0.6, 1.4),
                    phase=rng.uniform(0.0, 2 * math.pi),
                    halfwidth=self.cfg.floodplain_halfwidth * rng.uniform(0.8, 1.2),
                )
            )

    def river_vertices(self, river: _River) -> np.ndarray:
        n = max(8, self.cfg.ncols // 2)
        xs = np.linspace(0.0, self.width, n + 1)
        ys = river.y_at(xs)
        return np.column_stack([xs, ys])

    def terrain(self) -> np.ndarray:
        cfg, rng = self.cfg, self.rng
        cs = cfg.cellsize
        xs = (np.arange(cfg.ncols) + 0.5) * cs
        ys = (cfg.nrows - np.arange(cfg.nrows) - 0.5) * cs
        X, Y = np.meshgrid(xs, ys)
        z = np.full(X.shape, cfg.base_elevation)
        span = max(self.width, self.height)
        for k in range(1, 5):
            amp = cfg.relief * rng.uniform(0.4, 1.0) / (k * k)
            wavelength = span * rng.uniform(0.5, 1.5) / k
            theta = rng.uniform(0.0, math.pi)
            phase = rng.uniform(0.0, 2 * math.pi)
            u = (X * math.cos(theta) + Y * math.sin(theta)) * (2 * math.pi / wavelength) + phase
            if k == 1:
                z += amp * (1.0 - np.abs(np.sin(u)))  # ridged term
            else:
                z += amp * np.sin(u)
        for river in self.rivers:
            off = (Y - river.y_at(X)) / (3.0 * max(river.halfwidth, cs))
            z -= cfg.valley_depth * np.exp(-off * off)
        # centimeter rounding keeps the written DEM short and stable
        return np.round(np.maximum(z, 1.0), 2)

    def place_villages(self):
        cfg, rng = self.cfg, self.rng
        cs = cfg.cellsize
        n = cfg.villages
        for i in range(n):
            for _ in range(200):
                hx = rng.uniform(1.5, 4.0) * cs
                hy = rng.uniform(1.2, 3.0) * cs
                if self.rivers:
                    river = self.rivers[rng.randint(0, len(self.rivers) - 1)]
                    slot = self.width / n
                    cx = slot * (i + rng.uniform(0.2, 0.8))
                    side = 1.0 if rng.random() < 0.5 else -1.0
                    gap = river.halfwidth + hy + rng.uniform(1.0, 4.0) * cs
                    cy = float(river.y_at(cx)) + side * gap
                else:
                    cx = rng.uniform(0.0, self.width)
                    cy = rng.uniform(0.0, self.height)
                rect = (cx - hx, cy - hy, cx + hx, cy + hy)
                inside = rect[0] >= cs and rect[1] >= cs and rect[2] <= self.width - cs and rect[3] <= self.height - cs
                if inside and not any(_overlaps(rect, r, cs) for r in self.villages):
                    self.villages.append(rect)
                    break
            else:
                raise DataError(
                    f"infeasible synthetic config: could not place village {i + 1} of {n} "
                    f"without overlap on a {cfg.ncols}x{cfg.nrows} grid"
                )

    def blob(self, cx: float, cy: float, area: float) -> tuple:
        """Star-shaped 9-gon of roughly the requested area around a center."""
        rng = self.rng
        m = 9
        r0 = math.sqrt(2 * area / (m * math.sin(2 * math.pi / m)))
        ring = []
        for j in range(m):
            a = 2 * math.pi * j / m
            r = r0 * rng.uniform(0.8, 1.2)
            ring.append(self.world(*self.clamp(cx + r * math.cos(a), cy + r * math.sin(a))))
        ring.append(ring[0])
        return tuple(ring)

    def near_village(self, i: int, dmin: float, dmax: float) -> Tuple[float, float]:
        x0, y0, x1, y1 = self.villages[i % len(self.villages)]
        cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
        d = self.rng.uniform(dmin, dmax)
        a = self.rng.uniform(0.0, 2 * math.pi)
        return self.clamp(cx + d * math.cos(a), cy + d * math.sin(a))


def generate_landscape(cfg: SynthConfig) -> Tuple[Grid, list, List[ObservedSite]]:
    """Build ``(dem, features, sites)`` for a config; fully determined by it."""
    s = _Scene(cfg)
    s.draw_rivers()
    dem = Grid(cfg.header, s.terrain())
    s.place_villages()

    features: list = []
    for k, river in enumerate(s.rivers, 1):
        verts = s.river_vertices(river)
        features.append(Polyline(tuple(s.world(x, y) for x, y in verts), "river", f"river-{k}"))
        upper = [s.world(x, y + river.halfwidth) for x, y in verts]
        lower = [s.world(x, y - river.halfwidth) for x, y in verts[::-1]]
        ring = tuple(upper + lower + [upper[0]])
        features.append(Polygon(ring, "floodplain", f"floodplain-{k}"))

    for k, rect in enumerate(s.villages, 1):
        ring = tuple(s.world(x, y) for x, y in _rect_ring(rect))
        features.append(Polygon(ring, "builtup", f"village-{k}"))

    if s.villages:
        patch_specs = (
            ("pasture", cfg.pastures, (30_000.0, 150_000.0)),
            ("degraded", cfg.degraded, (20_000.0, 100_000.0)),
            ("loam", cfg.loam, (20_000.0, 90_000.0)),
        )
        for role, count, (amin, amax) in patch_specs:
            for k in range(count):
                cx, cy = s.near_village(k, 150.0, 800.0)
                area = s.rng.uniform(amin, amax)
                features.append(Polygon(s.blob(cx, cy, area), role, f"{role}-{k + 1}"))

        nv = len(s.villages)
        for k in range(cfg.roads):
            a = s.villages[k % nv]
            start = ((a[0] + a[2]) / 2, (a[1] + a[3]) / 2)
            if nv > 1:
                b = s.villages[(k + 1) % nv]
                end = ((b[0] + b[2]) / 2, (b[1] + b[3]) / 2)
            else:
                end = s.near_village(k, 600.0, 900.0)
            mid = s.clamp(
                (start[0] + end[0]) / 2 + s.rng.uniform(-150.0, 150.0),
                (start[1] + end[1]) / 2 + s.rng.uniform(-150.0, 150.0),
            )
            verts = tuple(s.world(*p) for p in (start, mid, end))
            features.append(Polyline(verts, "road", f"road-{k + 1}"))

    sites = _plant_sites(s)
    return dem, features, sites


def _plant_sites(s: _Scene) -> List[ObservedSite]:
    cfg, rng = s.cfg, s.rng
    cs = cfg.cellsize
    sites: List[ObservedSite] = []
    if not s.villages:
        if cfg.sites or cfg.outside_sites:
            raise DataError("infeasible synthetic config: sites need at least one village")
        return sites

    # keep in-buffer sites clear of the 1 km ring once rasterization slack is added
    reach = max(1000.0 - 3.0 * cs, cs)
    for k in range(cfg.sites):
        pos = None
        if s.rivers and rng.random() < 0.7:
            for _ in range(100):
                river = s.rivers[rng.randint(0, len(s.rivers) - 1)]
                x = rng.uniform(0.0, s.width)
                y = float(river.y_at(x)) + rng.uniform(-1.0, 1.0) * river.halfwidth
                x, y = s.clamp(x, y, 1e-6)
                if min(_rect_distance(x, y, r) for r in s.villages) <= reach:
                    pos = (x, y)
                    break
        if pos is None:
            x, y = s.near_village(rng.randint(0, len(s.villages) - 1), 0.0, reach)
            pos = s.clamp(x, y, 1e-6)
        sites.append(ObservedSite(*s.world(*pos), identifier=f"site-{k + 1:03d}"))

    # clear of the outer ring even after cell-center rounding
    far = 1000.0 + math.sqrt(2.0) * cs + 1.0
    for k in range(cfg.outside_sites):
        for _ in range(5000):
            x, y = rng.uniform(0.0, s.width), rng.uniform(0.0, s.height)
            if min(_rect_distance(x, y, r) for r in s.villages) > far:
                break
        else:
            raise DataError(
                "infeasible synthetic config: no room for a site more than 1 km from every village"
            )
        x, y = s.clamp(x, y, 1e-6)
        sites.append(ObservedSite(*s.world(x, y), identifier=f"site-far-{k + 1:02d}"))
    return sites


def site_features(sites: List[ObservedSite]) -> List[PointFeature]:
    return [PointFeature(site.x, site.y, "sites", site.identifier) for site in sites]
