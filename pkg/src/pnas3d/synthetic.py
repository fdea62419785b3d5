"""Synthetic test clouds: an organized plane scan and a sphere cap."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .cloud import PointCloud

_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def make_plane(height: int = 100, width: int = 100, extent: float = 1.0,
               z: float = 1.0) -> PointCloud:
    """Organized flat plane at constant z, centered on the z axis.

    z defaults to 1.0 so no point is a zero triple (which would be read
    as a missing sensor return).
    """
    xs = np.linspace(-extent / 2.0, extent / 2.0, width)
    ys = np.linspace(-extent / 2.0, extent / 2.0, height)
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    raster = np.stack([xx, yy, np.full_like(xx, z)], axis=-1)
    return PointCloud.from_organized(raster)


def make_sphere_cap(n: int = 5000, cap_deg: float = 40.0,
                    radius: float = 1.0) -> PointCloud:
    """Unorganized cap around the +z pole, Fibonacci-spiral sampled.

    The spiral gives near-uniform spacing, which keeps neighborhood-based
    normal estimates well conditioned.
    """
    z_min = math.cos(math.radians(cap_deg))
    i = np.arange(n, dtype=np.float64)
    z = 1.0 - (1.0 - z_min) * (i + 0.5) / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * _GOLDEN_ANGLE
    points = radius * np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    return PointCloud(points=points)


def save_demo_fixtures(directory: str | Path) -> list[Path]:
    """Write the two demo clouds into a directory, for the CLI and server."""
    from .io_formats import write_cloud

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, cloud in (("plane.opc", make_plane()),
                        ("sphere_cap.ply", make_sphere_cap())):
        path = directory / name
        write_cloud(cloud, path, overwrite=True)
        written.append(path)
    return written
