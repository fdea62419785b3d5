"""Command-line front door: generate, grid, serve.

Exit codes: 0 success, 1 input parse failure, 2 geometry/parameter
failure, 3 io failure. Set PNAS3D_LOG=DEBUG|INFO|WARNING to control log
verbosity.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .anomaly import AnomalyParams, synthesize
from .errors import GeometryError, ParseError
from .io_formats import (
    detect_format,
    flatten_params,
    read_cloud,
    read_metadata,
    unflatten_params,
    write_result,
)
from .profiles import GRID_SEARCH_FIXED, GRID_SEARCH_O, GRID_SEARCH_S, get_profile

log = logging.getLogger("pnas3d")

EXIT_PARSE = 1
EXIT_GEOMETRY = 2
EXIT_IO = 3


def _add_param_flags(parser: argparse.ArgumentParser, with_scale_octaves: bool = True):
    g = parser.add_argument_group("anomaly parameters")
    if with_scale_octaves:
        g.add_argument("--scale", type=float, help="noise base frequency s")
        g.add_argument("--octaves", type=int, help="fractal octave count o")
    g.add_argument("--persistence", type=float, help="per-octave amplitude decay p")
    g.add_argument("--lacunarity", type=float, help="per-octave frequency growth l")
    g.add_argument("--threshold", type=float, help="initial mask threshold tau in (0,1)")
    g.add_argument("--mask-ratio", type=float, help="target masked fraction rho in (0,1)")
    g.add_argument("--strength", type=float, help="displacement strength alpha")
    g.add_argument("--grid-res", type=int, help="noise grid resolution r")
    g.add_argument("--knn", type=int, help="neighborhood size k for normals")
    g.add_argument("--coordinate-mode", choices=["normalized", "physical"],
                   help="noise coordinate handling (default normalized)")


def _apply_overrides(params: AnomalyParams, args: argparse.Namespace) -> AnomalyParams:
    noise_fields = {}
    for flag, field in [("scale", "scale"), ("octaves", "octaves"),
                        ("persistence", "persistence"), ("lacunarity", "lacunarity"),
                        ("coordinate_mode", "coordinate_mode")]:
        value = getattr(args, flag, None)
        if value is not None:
            noise_fields[field] = value
    if noise_fields:
        params = dataclasses.replace(
            params, noise=dataclasses.replace(params.noise, **noise_fields))
    top_fields = {}
    for flag in ("threshold", "mask_ratio", "strength", "grid_res", "knn"):
        value = getattr(args, flag, None)
        if value is not None:
            top_fields[flag] = value
    if top_fields:
        params = dataclasses.replace(params, **top_fields)
    return params


def _derive_seed(data: bytes) -> int:
    return int.from_bytes(hashlib.sha256(data).digest()[:8], "little")


def _input_info(path: Path, data: bytes) -> dict:
    return {
        "path": str(path),
        "sha256": hashlib.sha256(data).hexdigest(),
        "format": detect_format(path),
    }


def _run_one(input_path: Path, out_dir: Path, params: AnomalyParams, seed: int | None,
             cloud_format: str | None, labels_format: str, overwrite: bool) -> dict:
    data = input_path.read_bytes()
    if seed is None:
        seed = _derive_seed(data)
        log.info("seed derived from input hash: %d", seed)
    cloud = read_cloud(input_path)
    fmt = cloud_format or detect_format(input_path)
    if fmt == "opc" and cloud.organized_shape is None:
        fmt = "ply"  # opc cannot hold unorganized clouds
    result = synthesize(cloud, params, seed)
    paths = write_result(
        result, out_dir, params, seed, input_info=_input_info(input_path, data),
        cloud_format=fmt, labels_format=labels_format, overwrite=overwrite,
    )
    valid = result.augmented.validity
    summary = {
        "seed": seed,
        "masked_fraction": float(result.mask[valid].mean()),
        "effective_threshold": result.effective_threshold,
        "max_abs_displacement": float(np.abs(result.signed_magnitude).max()),
        "paths": paths,
    }
    return summary


def cmd_generate(args: argparse.Namespace) -> int:
    if args.from_meta:
        meta = read_metadata(args.from_meta)
        params = unflatten_params(meta["params"])
        seed = meta["seed"]
        input_path = Path(args.input) if args.input else Path(meta["input"]["path"])
        recorded = meta.get("input", {}).get("sha256")
        if recorded:
            actual = hashlib.sha256(input_path.read_bytes()).hexdigest()
            if actual != recorded:
                raise OSError(
                    f"{input_path}: content hash {actual[:12]}... does not match "
                    f"metadata {recorded[:12]}...; refusing to reproduce"
                )
    else:
        if not args.input:
            raise ValueError("an input cloud is required unless --from-meta is given")
        params = get_profile(args.profile) if args.profile else AnomalyParams()
        params = _apply_overrides(params, args)
        seed = args.seed
        input_path = Path(args.input)

    summary = _run_one(input_path, Path(args.output), params, seed,
                       args.cloud_format, args.labels_format, args.force)
    print(f"seed={summary['seed']} masked_fraction={summary['masked_fraction']:.6f} "
          f"effective_threshold={summary['effective_threshold']:.6f} "
          f"max_abs_displacement={summary['max_abs_displacement']:.6g}")
    return 0


def format_cell_name(s: float, o: int) -> str:
    s_txt = f"{s:.1f}" if float(s) == int(s) else f"{s:g}"
    return f"s{s_txt}_o{o}"


def cmd_grid(args: argparse.Namespace) -> int:
    s_values = [float(v) for v in args.s_list.split(",")] if args.s_list else list(GRID_SEARCH_S)
    o_values = [int(v) for v in args.o_list.split(",")] if args.o_list else list(GRID_SEARCH_O)
    if not s_values or not o_values:
        raise ValueError("s and o lists must be non-empty")

    base = _apply_overrides(GRID_SEARCH_FIXED, args)
    input_path = Path(args.input)
    data = input_path.read_bytes()
    seed = args.seed if args.seed is not None else _derive_seed(data)
    out_root = Path(args.output)
    out_root.mkdir(parents=True, exist_ok=True)

    def run_cell(s: float, o: int) -> dict:
        name = format_cell_name(s, o)
        params = dataclasses.replace(
            base, noise=dataclasses.replace(base.noise, scale=s, octaves=o))
        cell: dict = {"s": s, "o": o, "dir": name}
        try:
            summary = _run_one(input_path, out_root / name, params, seed,
                               args.cloud_format, args.labels_format, args.force)
            cell.update(
                status="ok",
                seed=summary["seed"],
                masked_fraction=summary["masked_fraction"],
                effective_threshold=summary["effective_threshold"],
                max_abs_displacement=summary["max_abs_displacement"],
            )
        except Exception as exc:  # per-cell isolation; failures go to the manifest
            log.warning("grid cell %s failed: %s", name, exc)
            cell.update(status="error", error=str(exc))
        return cell

    # Cells write into disjoint directories, so pool scheduling is unobservable.
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        futures = [(s, o, pool.submit(run_cell, s, o))
                   for s in s_values for o in o_values]
        cells = [f.result() for _, _, f in futures]  # row-major in (s, o)

    manifest = {
        "seed": seed,
        "s_values": s_values,
        "o_values": o_values,
        "fixed": {k: v for k, v in flatten_params(base).items()
                  if k not in ("scale", "octaves")},
        "cells": cells,
    }
    manifest_path = out_root / "grid_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
    ok = sum(1 for c in cells if c["status"] == "ok")
    print(f"grid: {ok}/{len(cells)} cells succeeded, manifest at {manifest_path}")
    return 0 if ok > 0 else EXIT_GEOMETRY


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(fixtures_dir=Path(args.fixtures), ui_dir=args.ui and Path(args.ui))
    uvicorn.run(app, host=args.host, port=args.port,
                log_level=os.environ.get("PNAS3D_LOG", "info").lower())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pnas3d",
        description="Synthesize surface anomalies on 3D point clouds.",
    )
    parser.add_argument("--version", action="version", version=f"pnas3d {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="synthesize anomalies on one cloud")
    gen.add_argument("input", nargs="?", help="input cloud (.opc/.ply/.xyz)")
    gen.add_argument("output", help="output directory")
    gen.add_argument("--profile", choices=["pronounced", "medium", "subtle"],
                     help="start from a built-in parameter profile")
    gen.add_argument("--seed", type=int, help="noise seed (default: input-hash derived)")
    gen.add_argument("--cloud-format", choices=["opc", "ply", "xyz"],
                     help="augmented cloud format (default: same as input)")
    gen.add_argument("--labels-format", choices=["ply", "txt"], default="ply")
    gen.add_argument("--force", action="store_true", help="overwrite existing outputs")
    gen.add_argument("--from-meta", metavar="META",
                     help="reproduce a previous run from its metadata record")
    _add_param_flags(gen)
    gen.set_defaults(func=cmd_generate)

    grid = sub.add_parser("grid", help="scale x octaves search matrix")
    grid.add_argument("input", help="input cloud")
    grid.add_argument("output", help="output directory (one subdir per cell)")
    grid.add_argument("--s-list", help="comma-separated scales (default 1,2,3,4)")
    grid.add_argument("--o-list", help="comma-separated octaves (default 1,2,3,4)")
    grid.add_argument("--seed", type=int, help="shared seed for all cells")
    grid.add_argument("--cloud-format", choices=["opc", "ply", "xyz"])
    grid.add_argument("--labels-format", choices=["ply", "txt"], default="ply")
    grid.add_argument("--force", action="store_true")
    grid.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                      help="worker pool size")
    _add_param_flags(grid, with_scale_octaves=False)
    grid.set_defaults(func=cmd_grid)

    serve = sub.add_parser("serve", help="run the explorer HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--fixtures", required=True, help="directory of cloud fixtures")
    serve.add_argument("--ui", help="static UI directory to mount at /")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("PNAS3D_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"pnas3d: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (GeometryError, ValueError) as exc:
        print(f"pnas3d: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except OSError as exc:
        print(f"pnas3d: io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
