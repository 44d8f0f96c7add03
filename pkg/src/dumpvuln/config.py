"""JSON run configuration.

Example::

    {
      "dem": "dem.asc",
      "layers": [
        {"path": "villages.geojson", "role": "builtup"},
        {"path": "rivers.geojson", "role": "river"},
        {"path": "sites.geojson", "role": "sites"}
      ],
      "radii": [250, 500, 1000],
      "min_area": 50000,
      "weights": {"factors": {"floodplain": 3.0}},
      "grid": {"ncols": 64, "nrows": 64, "x_origin": 0, "y_origin": 0, "cellsize": 50},
      "synthetic": {"seed": 42}
    }

Relative paths resolve against the directory holding the config file.
``grid`` is optional; when present it must agree with the DEM header.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from .errors import ConfigError
from .factors import DEFAULT_MIN_AREA, DEFAULT_RADII, ROLES
from .scoring import WeightConfig

CONFIG_VERSION = 1

# canonical order of layer roles in manifests
ROLE_ORDER = ("builtup", "exclusion", "river", "floodplain", "pasture", "degraded", "loam", "road", "sites")

TOP_LEVEL_KEYS = {"version", "dem", "layers", "grid", "radii", "min_area", "weights", "output_dir", "synthetic"}
GRID_KEYS = ("ncols", "nrows", "x_origin", "y_origin", "cellsize", "nodata")


@dataclass(frozen=True)
class LayerEntry:
    path: str
    role: str

    def sort_key(self) -> Tuple[int, str, str]:
        order = ROLE_ORDER.index(self.role) if self.role in ROLE_ORDER else len(ROLE_ORDER)
        return (order, self.role, self.path)


@dataclass
class RunConfig:
    dem: str
    layers: List[LayerEntry]
    base_dir: Path = Path(".")
    grid: Optional[dict] = None
    radii: Tuple[float, ...] = DEFAULT_RADII
    min_area: float = DEFAULT_MIN_AREA
    weights: WeightConfig = field(default_factory=WeightConfig)
    output_dir: Optional[str] = None
    synthetic: Optional[dict] = None

    def resolve(self, path: str) -> Path:
        return (self.base_dir / path).resolve()

    def layers_with_role(self, role: str) -> List[LayerEntry]:
        return [entry for entry in self.layers if entry.role == role]

    def to_dict(self) -> dict:
        """Canonical form for manifests: relative paths, sorted layers, resolved defaults."""
        doc = {
            "version": CONFIG_VERSION,
            "dem": self.dem,
            "layers": [{"path": e.path, "role": e.role} for e in self.layers],
            "radii": list(self.radii),
            "min_area": self.min_area,
            "weights": self.weights.to_dict(),
        }
        if self.grid is not None:
            doc["grid"] = dict(self.grid)
        if self.synthetic is not None:
            doc["synthetic"] = dict(self.synthetic)
        return doc


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{name} must be a finite number")
    return float(value)


def parse_run_config(doc, base_dir: Path = Path(".")) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("run configuration must be a JSON object")
    unknown = set(doc) - TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    version = doc.get("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {version!r}")

    dem = doc.get("dem")
    if dem is None:
        raise ConfigError("missing required field 'dem'")
    if not isinstance(dem, str) or not dem:
        raise ConfigError("field 'dem' must be a single non-empty path")

    raw_layers = doc.get("layers")
    if not isinstance(raw_layers, list):
        raise ConfigError("missing required field 'layers' (a list of {path, role})")
    layers = []
    for i, entry in enumerate(raw_layers):
        if not isinstance(entry, dict) or set(entry) - {"path", "role"}:
            raise ConfigError(f"layers[{i}] must be an object with 'path' and 'role'")
        path, role = entry.get("path"), entry.get("role")
        if not isinstance(path, str) or not path:
            raise ConfigError(f"layers[{i}].path must be a non-empty string")
        if role not in ROLES:
            raise ConfigError(f"layers[{i}].role {role!r} is not one of {sorted(ROLES)}")
        layers.append(LayerEntry(path, role))
    if not any(e.role == "builtup" for e in layers):
        raise ConfigError("layers must include at least one 'builtup' layer")
    layers.sort(key=LayerEntry.sort_key)

    radii = doc.get("radii", list(DEFAULT_RADII))
    if not isinstance(radii, list) or not radii:
        raise ConfigError("radii must be a non-empty list of meters")
    radii = tuple(_number(r, "radii entry") for r in radii)
    if radii[0] <= 0 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ConfigError(f"radii must be positive and strictly increasing, got {list(radii)}")

    min_area = _number(doc.get("min_area", DEFAULT_MIN_AREA), "min_area")
    if min_area < 0:
        raise ConfigError("min_area must be >= 0")

    grid = doc.get("grid")
    if grid is not None:
        if not isinstance(grid, dict) or set(grid) - set(GRID_KEYS):
            raise ConfigError(f"grid must be an object with keys among {list(GRID_KEYS)}")
        grid = {k: _number(v, f"grid.{k}") for k, v in grid.items()}

    synthetic = doc.get("synthetic")
    if synthetic is not None and not isinstance(synthetic, dict):
        raise ConfigError("synthetic must be an object")

    output_dir = doc.get("output_dir")
    if output_dir is not None and (not isinstance(output_dir, str) or not output_dir):
        raise ConfigError("output_dir must be a non-empty string")

    return RunConfig(
        dem=dem,
        layers=layers,
        base_dir=Path(base_dir),
        grid=grid,
        radii=radii,
        min_area=min_area,
        weights=WeightConfig.from_dict(doc.get("weights")),
        output_dir=output_dir,
        synthetic=synthetic,
    )


def load_run_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_run_config(doc, path.parent)
