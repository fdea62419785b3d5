"""In-memory point cloud representation and valid-subset handling.

Coordinates are stored as float64 regardless of file precision. Invalid
points keep their stored coordinates but are excluded from every geometric
computation: downstream modules only ever see ``ValidSubset.coords``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyValidSet, ShapeMismatch


@dataclass(frozen=True)
class PointCloud:
    """N x 3 coordinates with optional organized (H, W) raster layout.

    ``organized_shape`` is None for unorganized clouds, else (H, W) with
    H * W == len(points). ``validity`` is a per-point boolean array.
    """

    points: np.ndarray
    validity: np.ndarray = field(default=None)  # type: ignore[assignment]
    organized_shape: tuple[int, int] | None = None

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must be (N, 3), got {pts.shape}")
        if pts.shape[0] < 1:
            raise ValueError("point cloud must contain at least one point")
        if self.validity is None:
            valid = np.ones(pts.shape[0], dtype=bool)
        else:
            valid = np.ascontiguousarray(self.validity, dtype=bool)
            if valid.shape != (pts.shape[0],):
                raise ValueError("validity must have one flag per point")
        if self.organized_shape is not None:
            h, w = self.organized_shape
            if h < 1 or w < 1 or h * w != pts.shape[0]:
                raise ValueError(
                    f"organized shape {h}x{w} does not cover {pts.shape[0]} points"
                )
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "validity", valid)

    @classmethod
    def from_organized(cls, raster: np.ndarray, validity: np.ndarray | None = None) -> "PointCloud":
        """Build an organized cloud from an (H, W, 3) raster.

        Points stored as exact zero triples are flagged invalid (depth
        sensors in this domain encode missing returns as zeros), on top of
        any explicit validity flags.
        """
        raster = np.asarray(raster, dtype=np.float64)
        if raster.ndim != 3 or raster.shape[2] != 3:
            raise ValueError(f"raster must be (H, W, 3), got {raster.shape}")
        h, w = raster.shape[:2]
        points = raster.reshape(-1, 3)
        nonzero = np.any(points != 0.0, axis=1)
        if validity is None:
            valid = nonzero
        else:
            valid = np.asarray(validity, dtype=bool).reshape(-1) & nonzero
        return cls(points=points, validity=valid, organized_shape=(h, w))

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def raster(self) -> np.ndarray:
        """Return the (H, W, 3) view of an organized cloud."""
        if self.organized_shape is None:
            raise ValueError("cloud is unorganized")
        h, w = self.organized_shape
        return self.points.reshape(h, w, 3)


@dataclass(frozen=True)
class ValidSubset:
    """The valid points of a parent cloud, in original index order."""

    coords: np.ndarray     # (M, 3)
    index_map: np.ndarray  # (M,) indices into the parent cloud

    @property
    def m(self) -> int:
        return self.coords.shape[0]


def extract_valid(cloud: PointCloud) -> ValidSubset:
    """Pull out the valid points, preserving index order.

    Raises EmptyValidSet when no point is valid.
    """
    index_map = np.flatnonzero(cloud.validity)
    if index_map.size == 0:
        raise EmptyValidSet("cloud has no valid points")
    return ValidSubset(coords=cloud.points[index_map].copy(), index_map=index_map)


def reintegrate(cloud: PointCloud, subset: ValidSubset, new_coords: np.ndarray) -> PointCloud:
    """Write replacement coordinates back into a copy of the parent cloud.

    Layout and validity are preserved; points outside the subset are
    bit-identical to the input.
    """
    new_coords = np.asarray(new_coords, dtype=np.float64)
    if new_coords.shape != (subset.m, 3):
        raise ShapeMismatch(
            f"expected {subset.m} x 3 replacement coordinates, got {new_coords.shape}"
        )
    points = cloud.points.copy()
    points[subset.index_map] = new_coords
    return PointCloud(
        points=points,
        validity=cloud.validity.copy(),
        organized_shape=cloud.organized_shape,
    )
