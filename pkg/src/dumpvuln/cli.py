"""Command-line interface.

Exit codes: 0 success, 2 usage or configuration error, 3 data/format error.
Every output file is written to a temporary name and renamed into place, and
all outputs are computed before the first one is written.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from .config import RunConfig, load_run_config
from .errors import ConfigError, DataError
from .formats import (
    atomic_write,
    format_ascii_grid,
    format_feature_collection,
    read_ascii_grid,
    read_vector_file,
    render_ppm,
    sites_from_features,
)
from .raster import Feature, Grid
from .scoring import PUBLISHED_SCORE_RANGE, VulnClass, VulnerabilityMap, build_vulnerability_map, score_bounds
from .synth import SynthConfig, generate_landscape, site_features
from .validation import validate_sites

log = logging.getLogger("dumpvuln")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3

FORMAT_VERSIONS = {
    "manifest": 1,
    "config": 1,
    "grid": "esri-ascii",
    "image": "ppm-p6",
    "report": 1,
    "vector": "geojson",
}

SYNTH_LAYERS = ("builtup", "river", "floodplain", "pasture", "degraded", "loam", "road")


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _sha256(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def _write_outputs(out_dir: Path, files: Dict[str, bytes]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, payload in files.items():
        atomic_write(out_dir / name, payload)


def load_inputs(cfg: RunConfig) -> Tuple[Grid, List[Feature]]:
    dem = read_ascii_grid(cfg.resolve(cfg.dem))
    if cfg.grid is not None:
        h = dem.header
        actual = {
            "ncols": h.ncols, "nrows": h.nrows, "x_origin": h.x_origin,
            "y_origin": h.y_origin, "cellsize": h.cellsize, "nodata": h.nodata,
        }
        for key, value in cfg.grid.items():
            if actual[key] != value:
                raise ConfigError(f"grid.{key} = {value} does not match the DEM header ({actual[key]})")
    features: List[Feature] = []
    for entry in cfg.layers:
        features.extend(read_vector_file(cfg.resolve(entry.path), entry.role))
    return dem, features


def run_pipeline(cfg: RunConfig) -> Tuple[VulnerabilityMap, List[Feature]]:
    dem, features = load_inputs(cfg)
    vmap = build_vulnerability_map(dem, features, cfg.weights, cfg.radii, cfg.min_area)
    return vmap, features


def build_manifest(cfg: RunConfig, vmap: VulnerabilityMap, outputs: Dict[str, bytes]) -> dict:
    lo, hi = score_bounds(vmap.weights)
    h = vmap.header
    classes = vmap.classes
    valid = classes.valid()
    counts = {c.label: int((classes.data[valid] == int(c)).sum()) for c in VulnClass}
    seed = (cfg.synthetic or {}).get("seed")
    return {
        "tool": {"name": "dumpvuln", "version": __version__},
        "format_versions": FORMAT_VERSIONS,
        "config": cfg.to_dict(),
        "weights": vmap.weights.to_dict(),
        "seed": seed,
        "grid": {
            "ncols": h.ncols, "nrows": h.nrows, "x_origin": h.x_origin,
            "y_origin": h.y_origin, "cellsize": h.cellsize, "nodata": h.nodata,
        },
        "score_bounds": {"min": lo, "max": hi},
        "published_score_range": {"min": PUBLISHED_SCORE_RANGE[0], "max": PUBLISHED_SCORE_RANGE[1]},
        "deviations": [
            f"minimum reachable score under these weights is {lo:g}, below the published "
            f"minimum of {PUBLISHED_SCORE_RANGE[0]:g}; scores under 10 (including those "
            "under 5) are classed very_low",
        ],
        "class_cells": counts,
        "scored_cells": int(valid.sum()),
        "outputs": {name: _sha256(payload) for name, payload in sorted(outputs.items())},
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_synth(args) -> int:
    doc = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"synthetic config not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(doc, dict):
            raise ConfigError("synthetic config must be a JSON object")
    if args.seed is not None:
        doc = dict(doc, seed=args.seed)
    scfg = SynthConfig.from_dict(doc)
    dem, features, sites = generate_landscape(scfg)

    files: Dict[str, bytes] = {"dem.asc": format_ascii_grid(dem).encode()}
    layers = []
    for role in SYNTH_LAYERS:
        members = [f for f in features if f.role == role]
        name = f"{role}.geojson"
        files[name] = format_feature_collection(members).encode()
        layers.append({"path": name, "role": role})
    files["sites.geojson"] = format_feature_collection(site_features(sites)).encode()
    layers.append({"path": "sites.geojson", "role": "sites"})
    run_config = {
        "version": 1,
        "dem": "dem.asc",
        "layers": layers,
        "synthetic": scfg.to_dict(),
    }
    files["config.json"] = _dumps(run_config).encode()
    manifest = {
        "tool": {"name": "dumpvuln", "version": __version__},
        "format_versions": FORMAT_VERSIONS,
        "synthetic": scfg.to_dict(),
        "seed": scfg.seed,
        "prng": "splitmix64",
        "outputs": {name: _sha256(payload) for name, payload in sorted(files.items())},
    }
    files["manifest.json"] = _dumps(manifest).encode()
    _write_outputs(Path(args.out), files)
    log.info("wrote synthetic scene (seed %d) to %s", scfg.seed, args.out)
    return EXIT_OK


def cmd_score(args) -> int:
    cfg = load_run_config(args.config)
    out = args.out or (str(cfg.resolve(cfg.output_dir)) if cfg.output_dir else None)
    if not out:
        raise ConfigError("no output directory: pass --out or set 'output_dir'")
    vmap, _ = run_pipeline(cfg)
    files = {
        "score.asc": format_ascii_grid(vmap.scores).encode(),
        "class.asc": format_ascii_grid(vmap.classes).encode(),
        "class.ppm": render_ppm(vmap.classes),
    }
    files["manifest.json"] = _dumps(build_manifest(cfg, vmap, files)).encode()
    _write_outputs(Path(out), files)
    log.info("scored %d cells; outputs in %s", int(vmap.scores.valid().sum()), out)
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = load_run_config(args.config)
    if not cfg.layers_with_role("sites"):
        raise ConfigError("validate needs at least one layer with role 'sites'")
    vmap, features = run_pipeline(cfg)
    report = validate_sites(sites_from_features(features), vmap)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    atomic_write(out, _dumps(report.to_dict()))
    log.info("validated %d sites, %d outside buffer", report.total, report.outside_buffer)
    return EXIT_OK


def cmd_render(args) -> int:
    classes = read_ascii_grid(args.classes)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    atomic_write(out, render_ppm(classes))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dumpvuln",
        description="Illegal-dumping vulnerability maps from vector layers and a DEM.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("synth", help="generate a synthetic landscape")
    p.add_argument("--seed", type=int, help="PRNG seed (overrides the config)")
    p.add_argument("--config", help="synthetic scene config (JSON)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("score", help="compute score and class grids")
    p.add_argument("--config", required=True, help="run config (JSON)")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("validate", help="tally observed sites per class")
    p.add_argument("--config", required=True, help="run config (JSON)")
    p.add_argument("--out", required=True, help="report path (JSON)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("render", help="render a class grid as a PPM image")
    p.add_argument("--classes", required=True, help="class grid (ESRI ASCII)")
    p.add_argument("--out", required=True, help="image path (.ppm)")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("dumpvuln: error: a command is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"dumpvuln: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"dumpvuln: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"dumpvuln: I/O error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
