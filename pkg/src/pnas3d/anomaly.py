"""Masked, locally normalized displacement of points along their normals.

``synthesize`` is the end-to-end pipeline: extract valid points, project
onto the PCA plane, build the seeded noise grid over the projected bounds,
sample a noise value per point, estimate normals on the original
coordinates, self-adjust the threshold so at most a ``mask_ratio`` fraction
of points is displaced, rescale above-threshold magnitudes to fade to zero
at the mask boundary, displace along the normals, and reintegrate invalid
points untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cloud import PointCloud, extract_valid, reintegrate
from .errors import InvalidThreshold, PnasError
from .noise import NoiseParams, build_grid
from .normals import estimate_normals, knn
from .surface import parameterize


@dataclass(frozen=True)
class AnomalyParams:
    """Full parameter set for one synthesis run."""

    noise: NoiseParams = field(default_factory=NoiseParams)
    threshold: float = 0.6
    mask_ratio: float = 0.05
    strength: float = 0.05
    grid_res: int = 64
    knn: int = 10

    def __post_init__(self):
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must satisfy 0 < threshold < 1")
        if not 0 < self.mask_ratio < 1:
            raise ValueError("mask_ratio must satisfy 0 < mask_ratio < 1")
        if not self.strength > 0:
            raise ValueError("strength must satisfy strength > 0")
        if int(self.grid_res) != self.grid_res or self.grid_res < 2:
            raise ValueError("grid_res must satisfy grid_res >= 2")
        if int(self.knn) != self.knn or self.knn < 3:
            raise ValueError("knn must satisfy knn >= 3")


@dataclass(frozen=True)
class ResultWarnings:
    constant_field: bool = False
    degenerate_neighborhoods: int = 0


@dataclass(frozen=True)
class AnomalyResult:
    """Augmented cloud plus per-point labels, full cloud length.

    ``mask`` (0/1) and ``signed_magnitude`` are zero at invalid and
    unmasked points; ``signed_magnitude[i]`` is the signed displacement
    along the stored normal (positive = protrusion, negative = intrusion).
    """

    augmented: PointCloud
    mask: np.ndarray              # (N_p,) uint8
    signed_magnitude: np.ndarray  # (N_p,) float64
    effective_threshold: float
    warnings: ResultWarnings
    normals: np.ndarray | None = None  # (N_p, 3); zero rows at invalid points


def mask_points(nu: np.ndarray, threshold: float) -> np.ndarray:
    """Binary mask: 1 where |nu| strictly exceeds the threshold."""
    return (np.abs(nu) > threshold).astype(np.uint8)


def adapt_threshold(nu: np.ndarray, threshold: float, mask_ratio: float) -> float:
    """Self-adjust the threshold when too many points exceed it.

    If the exceeding fraction is already <= mask_ratio the threshold is
    returned unchanged. Otherwise the (K+1)-th largest |nu| with
    K = floor(mask_ratio * M) becomes the new threshold, so at most K
    points strictly exceed it. One-sided: the threshold is never lowered.
    """
    magnitudes = np.abs(np.asarray(nu, dtype=np.float64))
    m = magnitudes.size
    avg_mask = np.count_nonzero(magnitudes > threshold) / m
    if avg_mask <= mask_ratio:
        return threshold
    k = math.floor(mask_ratio * m)
    descending = np.sort(magnitudes)[::-1]
    return float(descending[k])


def local_normalize(nu: np.ndarray, mask: np.ndarray, threshold: float) -> np.ndarray:
    """Rescale masked magnitudes from (threshold, 1] onto (0, 1], keep sign.

    Unmasked entries are 0. Raises InvalidThreshold if a threshold >= 1
    reaches this stage (the denominator would vanish).
    """
    if threshold >= 1.0:
        raise InvalidThreshold(f"threshold {threshold} >= 1 reached normalization")
    nu = np.asarray(nu, dtype=np.float64)
    out = np.zeros_like(nu)
    masked = np.asarray(mask, dtype=bool)
    out[masked] = np.sign(nu[masked]) * (np.abs(nu[masked]) - threshold) / (1.0 - threshold)
    return out


def displace(coords: np.ndarray, normals: np.ndarray, nu_hat: np.ndarray,
             strength: float) -> np.ndarray:
    """coords + nu_hat * strength * normal, leaving zero-nu_hat rows bit-exact."""
    coords = np.asarray(coords, dtype=np.float64)
    out = coords.copy()
    moved = np.asarray(nu_hat, dtype=np.float64) != 0.0
    out[moved] = coords[moved] + (nu_hat[moved] * strength)[:, None] * normals[moved]
    return out


class _Stage:
    """Re-raise library errors with the pipeline stage name attached."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if isinstance(exc, PnasError) and exc.stage is None:
            exc.with_stage(self.name)
        return False


def synthesize(cloud: PointCloud, params: AnomalyParams, seed: int) -> AnomalyResult:
    """Run the full anomaly synthesis pipeline on one cloud.

    Deterministic in (cloud bytes, params, seed); the given seed replaces
    whatever seed the noise params carry.
    """
    with _Stage("extract-valid"):
        subset = extract_valid(cloud)
    with _Stage("parameterize"):
        surf = parameterize(subset)
    with _Stage("noise-grid"):
        grid = build_grid(
            surf.bound_min, surf.bound_max, params.grid_res,
            params.noise.with_seed(seed),
        )
    with _Stage("noise-sample"):
        nu = grid.sample(surf.coords2d)
    with _Stage("normals"):
        neighbor_idx = knn(subset.coords, params.knn)
        field_ = estimate_normals(subset.coords, neighbor_idx, surf.normal_axis)
    with _Stage("threshold"):
        tau = adapt_threshold(nu, params.threshold, params.mask_ratio)
        mask_valid = mask_points(nu, tau)
    with _Stage("normalize"):
        if mask_valid.any():
            nu_hat = local_normalize(nu, mask_valid, tau)
        else:
            nu_hat = np.zeros_like(nu)
    with _Stage("displace"):
        new_coords = displace(subset.coords, field_.normals, nu_hat, params.strength)
    with _Stage("reintegrate"):
        augmented = reintegrate(cloud, subset, new_coords)

    n = cloud.n_points
    mask = np.zeros(n, dtype=np.uint8)
    mask[subset.index_map] = mask_valid
    signed_magnitude = np.zeros(n, dtype=np.float64)
    signed_magnitude[subset.index_map] = nu_hat * params.strength
    normals_full = np.zeros((n, 3), dtype=np.float64)
    normals_full[subset.index_map] = field_.normals

    return AnomalyResult(
        augmented=augmented,
        mask=mask,
        signed_magnitude=signed_magnitude,
        effective_threshold=float(tau),
        warnings=ResultWarnings(
            constant_field=grid.constant_field,
            degenerate_neighborhoods=field_.degenerate_count,
        ),
        normals=normals_full,
    )
