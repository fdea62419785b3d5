"""Deterministic point-cloud readers/writers and the result exporter.

Formats:
  xyz  - whitespace-separated coordinate triples, '#' comments; unorganized.
  ply  - ascii or binary little-endian vertices with x, y, z as 32- or
         64-bit floats; extra scalar vertex properties are skipped, other
         elements are skipped with a warning; unorganized.
  opc  - native organized raster: magic "OPC1", uint32 H, uint32 W (both
         little-endian), then H*W*3 little-endian float32, row-major,
         x,y,z interleaved. Zero triples mark missing sensor returns.

All writers emit byte-identical files for identical inputs: fixed field
ordering, no timestamps, shortest round-trip decimals in text formats.
"""

from __future__ import annotations

import dataclasses
import json
import struct
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .anomaly import AnomalyParams, AnomalyResult
from .cloud import PointCloud
from .errors import ParseError, UnsupportedPropertyWarning
from .noise import NoiseParams

OPC_MAGIC = b"OPC1"

_PLY_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


def detect_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix in ("xyz", "ply", "opc"):
        return suffix
    raise ValueError(f"cannot infer cloud format from {path!r}; pass format=")


def read_cloud(path: str | Path, format: str | None = None) -> PointCloud:
    """Load a point cloud; format inferred from the extension by default."""
    path = Path(path)
    fmt = format or detect_format(path)
    data = path.read_bytes()
    if fmt == "xyz":
        return _read_xyz(data, path)
    if fmt == "ply":
        return _read_ply(data, path)
    if fmt == "opc":
        return _read_opc(data, path)
    raise ValueError(f"unsupported format {fmt!r}")


def write_cloud(cloud: PointCloud, path: str | Path, format: str | None = None,
                overwrite: bool = False) -> Path:
    path = Path(path)
    fmt = format or detect_format(path)
    _guard_overwrite(path, overwrite)
    if fmt == "xyz":
        data = _dump_xyz(cloud)
    elif fmt == "ply":
        data = _dump_ply_cloud(cloud)
    elif fmt == "opc":
        data = _dump_opc(cloud)
    else:
        raise ValueError(f"unsupported format {fmt!r}")
    path.write_bytes(data)
    return path


def _guard_overwrite(path: Path, overwrite: bool):
    if path.exists() and not overwrite:
        raise FileExistsError(f"{path} exists; pass overwrite/--force to replace it")


# --- xyz ---------------------------------------------------------------

def _read_xyz(data: bytes, path: Path) -> PointCloud:
    rows = []
    for lineno, raw in enumerate(data.decode("utf-8", errors="replace").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected 3 columns, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-numeric coordinate") from None
    if not rows:
        raise ParseError(f"{path}: no points found")
    return PointCloud(points=np.array(rows, dtype=np.float64))


def _dump_xyz(cloud: PointCloud) -> bytes:
    lines = [f"{x!r} {y!r} {z!r}" for x, y, z in cloud.points.tolist()]
    return ("\n".join(lines) + "\n").encode("ascii")


# --- opc ---------------------------------------------------------------

def _read_opc(data: bytes, path: Path) -> PointCloud:
    if len(data) < 12 or data[:4] != OPC_MAGIC:
        raise ParseError(f"{path}: byte 0: missing OPC1 magic")
    h, w = struct.unpack_from("<II", data, 4)
    if h < 1 or w < 1:
        raise ParseError(f"{path}: byte 4: degenerate raster {h}x{w}")
    expected = 12 + h * w * 3 * 4
    if len(data) != expected:
        raise ParseError(
            f"{path}: byte {min(len(data), expected)}: payload is {len(data) - 12} "
            f"bytes, expected {expected - 12} for {h}x{w} raster"
        )
    payload = np.frombuffer(data, dtype="<f4", offset=12).astype(np.float64)
    return PointCloud.from_organized(payload.reshape(h, w, 3))


def _dump_opc(cloud: PointCloud) -> bytes:
    if cloud.organized_shape is None:
        raise ValueError("opc requires an organized cloud")
    h, w = cloud.organized_shape
    points = cloud.points.copy()
    points[~cloud.validity] = 0.0  # zero triple is the format's invalid marker
    return OPC_MAGIC + struct.pack("<II", h, w) + points.astype("<f4").tobytes()


# --- ply ---------------------------------------------------------------

def _read_ply(data: bytes, path: Path) -> PointCloud:
    end = data.find(b"end_header\n")
    if not data.startswith(b"ply") or end < 0:
        raise ParseError(f"{path}: byte 0: not a ply file")
    header_lines = data[:end].decode("ascii", errors="replace").splitlines()
    body = data[end + len(b"end_header\n"):]

    fmt = None
    elements: list[tuple[str, int, list[tuple[str, str]]]] = []  # (name, count, [(type, prop)])
    for lineno, line in enumerate(header_lines[1:], 2):
        tokens = line.split()
        if not tokens or tokens[0] == "comment":
            continue
        if tokens[0] == "format":
            if tokens[1] not in ("ascii", "binary_little_endian"):
                raise ParseError(f"{path}:{lineno}: unsupported ply format {tokens[1]!r}")
            fmt = tokens[1]
        elif tokens[0] == "element":
            elements.append((tokens[1], int(tokens[2]), []))
        elif tokens[0] == "property":
            if not elements:
                raise ParseError(f"{path}:{lineno}: property before any element")
            if tokens[1] == "list":
                elements[-1][2].append(("list", tokens[-1]))
            else:
                if tokens[1] not in _PLY_TYPES:
                    raise ParseError(f"{path}:{lineno}: unknown property type {tokens[1]!r}")
                elements[-1][2].append((tokens[1], tokens[2]))
    if fmt is None:
        raise ParseError(f"{path}: header has no format line")

    points = None
    offset = 0
    line_cursor = 0
    ascii_lines = body.decode("ascii", errors="replace").splitlines() if fmt == "ascii" else []
    for name, count, props in elements:
        if name != "vertex":
            warnings.warn(
                f"{path}: skipping non-vertex element {name!r} ({count} entries)",
                UnsupportedPropertyWarning,
            )
            if fmt == "ascii":
                line_cursor += count
            elif any(t == "list" for t, _ in props):
                # Cannot compute a fixed stride past variable-length lists.
                break
            else:
                offset += count * sum(np.dtype(_PLY_TYPES[t]).itemsize for t, _ in props)
            continue

        if any(t == "list" for t, _ in props):
            raise ParseError(f"{path}: list property inside vertex element")
        names = [p for _, p in props]
        for axis in ("x", "y", "z"):
            if axis not in names:
                raise ParseError(f"{path}: vertex element lacks property {axis!r}")
        if fmt == "binary_little_endian":
            dtype = np.dtype([(p, "<" + _PLY_TYPES[t]) for t, p in props])
            need = count * dtype.itemsize
            if len(body) - offset < need:
                raise ParseError(
                    f"{path}: byte {end + 11 + offset}: vertex payload truncated"
                )
            table = np.frombuffer(body, dtype=dtype, count=count, offset=offset)
            offset += need
            points = np.stack(
                [table["x"], table["y"], table["z"]], axis=1
            ).astype(np.float64)
        else:
            rows = ascii_lines[line_cursor:line_cursor + count]
            if len(rows) < count:
                raise ParseError(f"{path}: vertex rows truncated at line {len(rows)}")
            line_cursor += count
            ix, iy, iz = names.index("x"), names.index("y"), names.index("z")
            coords = np.empty((count, 3), dtype=np.float64)
            for r, row in enumerate(rows):
                cols = row.split()
                if len(cols) != len(names):
                    raise ParseError(
                        f"{path}: vertex line {r + 1}: expected {len(names)} columns"
                    )
                coords[r] = (float(cols[ix]), float(cols[iy]), float(cols[iz]))
            points = coords

    if points is None:
        raise ParseError(f"{path}: no vertex element found")
    return PointCloud(points=points)


def _ply_header(count: int, props: list[str]) -> bytes:
    lines = ["ply", "format binary_little_endian 1.0", f"element vertex {count}"]
    lines += [f"property {p}" for p in props]
    lines.append("end_header")
    return ("\n".join(lines) + "\n").encode("ascii")


def _dump_ply_cloud(cloud: PointCloud) -> bytes:
    header = _ply_header(cloud.n_points, ["double x", "double y", "double z"])
    return header + cloud.points.astype("<f8").tobytes()


def _dump_ply_labels(result: AnomalyResult) -> bytes:
    cloud = result.augmented
    header = _ply_header(
        cloud.n_points,
        ["double x", "double y", "double z",
         "uchar anomaly_mask", "float anomaly_disp"],
    )
    table = np.empty(cloud.n_points, dtype=np.dtype(
        [("x", "<f8"), ("y", "<f8"), ("z", "<f8"),
         ("anomaly_mask", "u1"), ("anomaly_disp", "<f4")]
    ))
    table["x"], table["y"], table["z"] = cloud.points.T
    table["anomaly_mask"] = result.mask
    table["anomaly_disp"] = result.signed_magnitude.astype("<f4")
    return header + table.tobytes()


def _dump_labels_table(result: AnomalyResult) -> bytes:
    lines = ["# index mask signed_magnitude"]
    for i, (m, s) in enumerate(zip(result.mask.tolist(),
                                   result.signed_magnitude.tolist())):
        lines.append(f"{i} {m} {s!r}")
    return ("\n".join(lines) + "\n").encode("ascii")


def magnitude_colors(mask: np.ndarray, signed_magnitude: np.ndarray,
                     strength: float) -> np.ndarray:
    """Diverging red/white/blue colors pinned at +-strength; gray unmasked.

    +strength maps to (255, 0, 0), -strength to (0, 0, 255), with white at
    zero, so colors are comparable across parameter sweeps.
    """
    n = mask.shape[0]
    colors = np.full((n, 3), 128, dtype=np.uint8)
    masked = mask.astype(bool)
    t = np.clip(signed_magnitude[masked] / strength, -1.0, 1.0)
    fade = np.rint(255.0 * (1.0 - np.abs(t))).astype(np.uint8)
    rgb = np.empty((t.size, 3), dtype=np.uint8)
    pos = t >= 0
    rgb[pos] = np.stack([np.full(pos.sum(), 255, dtype=np.uint8),
                         fade[pos], fade[pos]], axis=1)
    rgb[~pos] = np.stack([fade[~pos], fade[~pos],
                          np.full((~pos).sum(), 255, dtype=np.uint8)], axis=1)
    colors[masked] = rgb
    return colors


def _dump_ply_viz(result: AnomalyResult, strength: float) -> bytes:
    cloud = result.augmented
    header = _ply_header(
        cloud.n_points,
        ["double x", "double y", "double z",
         "uchar red", "uchar green", "uchar blue"],
    )
    colors = magnitude_colors(result.mask, result.signed_magnitude, strength)
    table = np.empty(cloud.n_points, dtype=np.dtype(
        [("x", "<f8"), ("y", "<f8"), ("z", "<f8"),
         ("red", "u1"), ("green", "u1"), ("blue", "u1")]
    ))
    table["x"], table["y"], table["z"] = cloud.points.T
    table["red"], table["green"], table["blue"] = colors.T
    return header + table.tobytes()


# --- parameter (de)serialization ----------------------------------------

def flatten_params(params: AnomalyParams) -> dict:
    """Flat dict of all parameter fields, in a fixed order."""
    return {
        "scale": params.noise.scale,
        "octaves": params.noise.octaves,
        "persistence": params.noise.persistence,
        "lacunarity": params.noise.lacunarity,
        "coordinate_mode": params.noise.coordinate_mode,
        "threshold": params.threshold,
        "mask_ratio": params.mask_ratio,
        "strength": params.strength,
        "grid_res": params.grid_res,
        "knn": params.knn,
    }


def unflatten_params(record: dict) -> AnomalyParams:
    noise = NoiseParams(
        scale=record["scale"],
        octaves=record["octaves"],
        persistence=record["persistence"],
        lacunarity=record["lacunarity"],
        coordinate_mode=record.get("coordinate_mode", "normalized"),
    )
    return AnomalyParams(
        noise=noise,
        threshold=record["threshold"],
        mask_ratio=record["mask_ratio"],
        strength=record["strength"],
        grid_res=record["grid_res"],
        knn=record["knn"],
    )


# --- result export -------------------------------------------------------

def write_result(result: AnomalyResult, out_dir: str | Path, params: AnomalyParams,
                 seed: int, input_info: dict | None = None,
                 cloud_format: str = "opc", labels_format: str = "ply",
                 include_viz: bool = True, overwrite: bool = False) -> dict[str, Path]:
    """Write augmented cloud, labels, optional visualization, and metadata.

    Refuses to overwrite existing files unless ``overwrite`` is set. Returns
    the written paths keyed by role.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}

    aug_path = out_dir / f"augmented.{cloud_format}"
    _guard_overwrite(aug_path, overwrite)
    if cloud_format == "opc":
        data = _dump_opc(result.augmented)
    elif cloud_format == "ply":
        data = _dump_ply_cloud(result.augmented)
    elif cloud_format == "xyz":
        data = _dump_xyz(result.augmented)
    else:
        raise ValueError(f"unsupported cloud format {cloud_format!r}")
    aug_path.write_bytes(data)
    written["augmented"] = aug_path

    if labels_format == "ply":
        labels_path = out_dir / "labels.ply"
        labels_data = _dump_ply_labels(result)
    elif labels_format == "txt":
        labels_path = out_dir / "labels.txt"
        labels_data = _dump_labels_table(result)
    else:
        raise ValueError(f"unsupported labels format {labels_format!r}")
    _guard_overwrite(labels_path, overwrite)
    labels_path.write_bytes(labels_data)
    written["labels"] = labels_path

    if include_viz:
        viz_path = out_dir / "viz.ply"
        _guard_overwrite(viz_path, overwrite)
        viz_path.write_bytes(_dump_ply_viz(result, params.strength))
        written["viz"] = viz_path

    meta_path = out_dir / "meta"
    _guard_overwrite(meta_path, overwrite)
    valid = result.augmented.validity
    meta = {
        "tool": "pnas3d",
        "version": __version__,
        "input": input_info or {},
        "seed": seed,
        "params": flatten_params(params),
        "result": {
            "effective_threshold": result.effective_threshold,
            "masked_fraction": float(result.mask[valid].mean()),
            "max_abs_displacement": float(np.abs(result.signed_magnitude).max()),
            "warnings": dataclasses.asdict(result.warnings),
        },
        "outputs": {role: p.name for role, p in sorted(written.items())},
    }
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    written["meta"] = meta_path
    return written


def read_metadata(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
