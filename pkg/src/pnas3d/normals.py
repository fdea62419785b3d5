"""Per-point surface normal estimation from k-nearest-neighbor covariance.

Neighbors are exact (kd-tree backed), with distance ties broken by lower
point index so results are reproducible on gridded scans where equidistant
neighbors are the norm. Each normal is the smallest-eigenvalue eigenvector
of the neighbor covariance, flipped into the half-space of the global
plane normal axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import TooFewPoints

_DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class NormalField:
    normals: np.ndarray      # (M, 3) unit vectors, ValidSubset order
    k: int
    degenerate: np.ndarray   # (M,) bool; collinear neighborhoods

    @property
    def degenerate_count(self) -> int:
        return int(self.degenerate.sum())


def knn(coords: np.ndarray, k: int) -> np.ndarray:
    """Exact k nearest other points for every point, as an (M, k) index array.

    Ties in distance are broken by lower index. The query point itself is
    never a neighbor. Raises TooFewPoints when M <= k.
    """
    coords = np.asarray(coords, dtype=np.float64)
    m = coords.shape[0]
    if k < 1:
        raise ValueError("k must satisfy k >= 1")
    if m <= k:
        raise TooFewPoints(f"k-NN with k={k} needs more than k points, got {m}")

    tree = cKDTree(coords)
    out = np.empty((m, k), dtype=np.int64)
    pending = np.arange(m)
    kq = min(m, k + 2)  # self + k + at least one sentinel beyond the cut
    while pending.size:
        dist, idx = tree.query(coords[pending], k=kq)
        if kq == 1:
            dist = dist[:, None]
            idx = idx[:, None]
        unresolved = []
        for row, i in enumerate(pending):
            d = dist[row]
            nb = idx[row]
            keep = nb != i
            d = d[keep]
            nb = nb[keep]
            order = np.lexsort((nb, d))
            d = d[order]
            nb = nb[order]
            # The cut is trustworthy once some retrieved distance strictly
            # exceeds the boundary: every tied point is then already here.
            # Otherwise the tie group may extend past the query; go wider.
            if kq < m and d[-1] == d[k - 1]:
                unresolved.append(i)
                continue
            out[i] = nb[:k]
        pending = np.asarray(unresolved, dtype=np.int64)
        kq = min(m, kq * 2)
    return out


def estimate_normals(coords: np.ndarray, neighbors: np.ndarray,
                     normal_axis: np.ndarray) -> NormalField:
    """Smallest-eigenvalue eigenvector of each neighbor covariance.

    Neighbors are centered on their own mean; C = Qc^T Qc is decomposed per
    point and the resulting normal is flipped to satisfy
    ``normal . normal_axis >= 0``. Neighborhoods whose two smallest
    eigenvalues both fall under 1e-12 * trace(C) (collinear) get
    ``normal_axis`` substituted and are flagged.
    """
    coords = np.asarray(coords, dtype=np.float64)
    neighbors = np.asarray(neighbors, dtype=np.int64)
    normal_axis = np.asarray(normal_axis, dtype=np.float64)
    k = neighbors.shape[1]

    nbr = coords[neighbors]                      # (M, k, 3)
    centered = nbr - nbr.mean(axis=1, keepdims=True)
    cov = np.einsum("mki,mkj->mij", centered, centered)  # (M, 3, 3)
    evals, evecs = np.linalg.eigh(cov)           # ascending eigenvalues
    normals = evecs[:, :, 0].copy()

    trace = np.einsum("mii->m", cov)
    degenerate = (
        (evals[:, 0] < _DEGENERACY_TOL * trace)
        & (evals[:, 1] < _DEGENERACY_TOL * trace)
    ) | (trace == 0.0)
    normals[degenerate] = normal_axis

    flip = normals @ normal_axis < 0.0
    normals[flip] *= -1.0
    return NormalField(normals=normals, k=k, degenerate=degenerate)
