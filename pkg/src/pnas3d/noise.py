"""Seeded fractal gradient noise over the projected 2D bounds.

The single-octave kernel is 2002-style improved Perlin noise: quintic fade
``6t^5 - 15t^4 + 10t^3`` and eight unit gradients at 45 degree increments.
The permutation table is derived from the seed by a counter-based integer
hash (splitmix64), so there is no global state and identical seeds give
bit-identical fields on any platform.

A built grid is min-max normalized to [0, 1] and then mapped through
``2x - 1``, so non-degenerate grids attain exactly -1 and +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateBounds

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

# Eight unit gradient directions at 45 degree steps.
_HALF_SQRT2 = math.sqrt(0.5)
_GRADIENTS = np.array(
    [
        (1.0, 0.0),
        (_HALF_SQRT2, _HALF_SQRT2),
        (0.0, 1.0),
        (-_HALF_SQRT2, _HALF_SQRT2),
        (-1.0, 0.0),
        (-_HALF_SQRT2, -_HALF_SQRT2),
        (0.0, -1.0),
        (_HALF_SQRT2, -_HALF_SQRT2),
    ],
    dtype=np.float64,
)


def _mix64(x: int) -> int:
    """splitmix64 finalizer; a bijective avalanche on 64-bit integers."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def permutation_table(seed: int) -> np.ndarray:
    """Doubled 512-entry permutation of 0..255 derived from ``seed``.

    Fisher-Yates driven by the splitmix64 output stream; pure integer
    arithmetic, so the table is identical across platforms.
    """
    state = seed & _MASK64
    perm = list(range(256))
    for i in range(255, 0, -1):
        state = (state + _GAMMA) & _MASK64
        j = _mix64(state) % (i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return np.array(perm + perm, dtype=np.int64)


def octave_seed(seed: int, octave: int) -> int:
    """Sub-seed for one fractal octave; decorrelates the octave layers."""
    return _mix64((seed ^ ((octave + 1) * _GAMMA)) & _MASK64)


def _fade(t: np.ndarray) -> np.ndarray:
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def perlin2(u, v, seed: int):
    """Improved Perlin gradient noise at (u, v).

    Accepts scalars or arrays (broadcast together). Values lie in
    [-sqrt(2)/2, sqrt(2)/2] and are exactly 0.0 at integer lattice points;
    the field is C1-continuous everywhere.
    """
    perm = permutation_table(seed)
    return _perlin2_table(np.asarray(u, dtype=np.float64),
                          np.asarray(v, dtype=np.float64), perm)


def _perlin2_table(u: np.ndarray, v: np.ndarray, perm: np.ndarray):
    scalar = u.ndim == 0 and v.ndim == 0
    u, v = np.broadcast_arrays(u, v)
    xi = np.floor(u)
    yi = np.floor(v)
    xf = u - xi
    yf = v - yi
    # Python/numpy & is two's-complement, so the mask also wraps negatives.
    xi = xi.astype(np.int64) & 255
    yi = yi.astype(np.int64) & 255
    xi1 = (xi + 1) & 255
    yi1 = (yi + 1) & 255

    g00 = _GRADIENTS[perm[perm[xi] + yi] & 7]
    g10 = _GRADIENTS[perm[perm[xi1] + yi] & 7]
    g01 = _GRADIENTS[perm[perm[xi] + yi1] & 7]
    g11 = _GRADIENTS[perm[perm[xi1] + yi1] & 7]

    n00 = g00[..., 0] * xf + g00[..., 1] * yf
    n10 = g10[..., 0] * (xf - 1.0) + g10[..., 1] * yf
    n01 = g01[..., 0] * xf + g01[..., 1] * (yf - 1.0)
    n11 = g11[..., 0] * (xf - 1.0) + g11[..., 1] * (yf - 1.0)

    fu = _fade(xf)
    fv = _fade(yf)
    nx0 = n00 + fu * (n10 - n00)
    nx1 = n01 + fu * (n11 - n01)
    out = nx0 + fv * (nx1 - nx0)
    return float(out) if scalar else out


@dataclass(frozen=True)
class NoiseParams:
    """Fractal noise controls: base frequency, octave count, amplitude
    decay (persistence), frequency growth (lacunarity) and the seed.

    ``coordinate_mode`` selects how grid coordinates enter the noise: in
    "normalized" mode (default) bounds are rescaled to the unit square
    before frequency scaling, so ``scale`` counts noise periods across the
    object regardless of its physical size; "physical" multiplies raw
    coordinates directly.
    """

    scale: float = 2.0
    octaves: int = 2
    persistence: float = 0.5
    lacunarity: float = 2.0
    seed: int = 0
    coordinate_mode: str = "normalized"

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must satisfy scale > 0")
        if int(self.octaves) != self.octaves or self.octaves < 1:
            raise ValueError("octaves must satisfy octaves >= 1")
        if not 0 < self.persistence <= 1:
            raise ValueError("persistence must satisfy 0 < persistence <= 1")
        if not self.lacunarity >= 1:
            raise ValueError("lacunarity must satisfy lacunarity >= 1")
        if not 0 <= self.seed < (1 << 64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.coordinate_mode not in ("normalized", "physical"):
            raise ValueError("coordinate_mode must be 'normalized' or 'physical'")

    def with_seed(self, seed: int) -> "NoiseParams":
        return replace(self, seed=seed)


def fractal(u, v, params: NoiseParams):
    """Sum of ``octaves`` perlin2 layers.

    Octave j contributes amplitude persistence**j at frequency
    scale * lacunarity**j, each with its own sub-seed. Raw (unnormalized);
    |value| <= sum of persistence**j.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    scalar = u.ndim == 0 and v.ndim == 0
    total = np.zeros(np.broadcast_shapes(u.shape, v.shape), dtype=np.float64)
    for j in range(params.octaves):
        freq = params.scale * params.lacunarity**j
        amp = params.persistence**j
        perm = permutation_table(octave_seed(params.seed, j))
        total += amp * _perlin2_table(u * freq, v * freq, perm)
    return float(total) if scalar else total


@dataclass(frozen=True)
class NoiseGrid:
    """An r x r noise field over 2D bounds, normalized to [-1, 1].

    ``constant_field`` marks the degenerate case where the raw field was
    constant; such grids are all zeros instead of dividing by zero.
    """

    resolution: int
    bound_min: np.ndarray  # (2,)
    bound_max: np.ndarray  # (2,)
    values: np.ndarray     # (r, r); [i, j] = value at (axis_u[i], axis_v[j])
    axis_u: np.ndarray     # (r,) node positions along bounds axis 0
    axis_v: np.ndarray     # (r,) node positions along bounds axis 1
    constant_field: bool = False

    def sample(self, queries: np.ndarray) -> np.ndarray:
        """Bilinear interpolation at (..., 2) query points.

        Queries are clamped to the bounds (round-off can push projected
        coordinates marginally outside). Exact at grid nodes.
        """
        q = np.asarray(queries, dtype=np.float64)
        scalar = q.ndim == 1
        q = np.atleast_2d(q)
        qu = np.clip(q[..., 0], self.axis_u[0], self.axis_u[-1])
        qv = np.clip(q[..., 1], self.axis_v[0], self.axis_v[-1])

        i0 = np.clip(np.searchsorted(self.axis_u, qu, side="right") - 1,
                     0, self.resolution - 2)
        j0 = np.clip(np.searchsorted(self.axis_v, qv, side="right") - 1,
                     0, self.resolution - 2)
        # Weights measured from the actual node coordinates keep node
        # queries bit-exact (fu is exactly 0.0 or 1.0 there).
        fu = (qu - self.axis_u[i0]) / (self.axis_u[i0 + 1] - self.axis_u[i0])
        fv = (qv - self.axis_v[j0]) / (self.axis_v[j0 + 1] - self.axis_v[j0])

        v00 = self.values[i0, j0]
        v10 = self.values[i0 + 1, j0]
        v01 = self.values[i0, j0 + 1]
        v11 = self.values[i0 + 1, j0 + 1]
        # Two-sided lerp is bit-exact at both endpoints (fu, fv in {0, 1}).
        nx0 = (1.0 - fu) * v00 + fu * v10
        nx1 = (1.0 - fu) * v01 + fu * v11
        out = (1.0 - fv) * nx0 + fv * nx1
        return float(out[0]) if scalar else out


def normalize_field(raw: np.ndarray) -> tuple[np.ndarray, bool]:
    """Min-max normalize to [0, 1] then map through 2x - 1 onto [-1, 1].

    A constant raw field maps to all zeros with the degenerate flag set.
    """
    lo = raw.min()
    hi = raw.max()
    if hi == lo:
        return np.zeros_like(raw), True
    return 2.0 * ((raw - lo) / (hi - lo)) - 1.0, False


def build_grid(bound_min, bound_max, resolution: int, params: NoiseParams) -> NoiseGrid:
    """Evaluate the fractal field on a regular grid spanning the bounds.

    Raises DegenerateBounds if either axis has zero extent.
    """
    bound_min = np.asarray(bound_min, dtype=np.float64).reshape(2)
    bound_max = np.asarray(bound_max, dtype=np.float64).reshape(2)
    if resolution < 2:
        raise ValueError("resolution must satisfy resolution >= 2")
    if bound_min[0] >= bound_max[0] or bound_min[1] >= bound_max[1]:
        raise DegenerateBounds(
            f"projected bounds have zero extent: min={bound_min}, max={bound_max}"
        )

    axis_u = np.linspace(bound_min[0], bound_max[0], resolution)
    axis_v = np.linspace(bound_min[1], bound_max[1], resolution)
    if params.coordinate_mode == "normalized":
        nu = np.linspace(0.0, 1.0, resolution)
        uu, vv = np.meshgrid(nu, nu, indexing="ij")
    else:
        uu, vv = np.meshgrid(axis_u, axis_v, indexing="ij")

    raw = fractal(uu, vv, params)
    values, constant = normalize_field(raw)
    return NoiseGrid(
        resolution=resolution,
        bound_min=bound_min,
        bound_max=bound_max,
        values=values,
        axis_u=axis_u,
        axis_v=axis_v,
        constant_field=constant,
    )
