"""PCA parameterization of the valid points onto a 2D reference plane.

The centered coordinates are decomposed by SVD; the top two right-singular
vectors span the reference plane and the third is kept as the plane normal
axis used later for orienting per-point surface normals. Singular-vector
signs are fixed so the largest-magnitude entry of each vector is positive,
which makes the parameterization deterministic for identical input bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import ValidSubset
from .errors import DegenerateGeometry, TooFewPoints

_RANK_TOL = 1e-12


@dataclass(frozen=True)
class SurfaceParam:
    centroid: np.ndarray     # (3,)
    basis: np.ndarray        # (3, 2) orthonormal columns, descending variance
    normal_axis: np.ndarray  # (3,) unit, orthogonal to the basis
    coords2d: np.ndarray     # (M, 2) projected coordinates
    bound_min: np.ndarray    # (2,)
    bound_max: np.ndarray    # (2,)
    singular_values: np.ndarray  # (3,)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude entry is positive."""
    vectors = vectors.copy()
    for row in vectors:
        pivot = np.argmax(np.abs(row))
        if row[pivot] < 0:
            row *= -1.0
    return vectors


def parameterize(subset: ValidSubset) -> SurfaceParam:
    """Project the valid points onto their top-two principal directions.

    Raises TooFewPoints for M < 3 and DegenerateGeometry when the centered
    coordinates have rank < 2 (all points collinear or coincident).
    """
    coords = subset.coords
    m = coords.shape[0]
    if m < 3:
        raise TooFewPoints(f"parameterization needs at least 3 points, got {m}")

    centroid = coords.mean(axis=0)
    centered = coords - centroid
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    if svals[0] <= 0.0 or svals[1] < _RANK_TOL * svals[0]:
        raise DegenerateGeometry(
            "valid points are rank-deficient: singular values "
            f"{svals[0]:.3e}, {svals[1]:.3e}"
        )

    vt = _fix_signs(vt)
    basis = vt[:2].T
    normal_axis = vt[2]
    coords2d = centered @ basis
    return SurfaceParam(
        centroid=centroid,
        basis=basis,
        normal_axis=normal_axis,
        coords2d=coords2d,
        bound_min=coords2d.min(axis=0),
        bound_max=coords2d.max(axis=0),
        singular_values=svals,
    )
