"""Built-in parameter profiles covering the pronounced-to-subtle range."""

from __future__ import annotations

from .anomaly import AnomalyParams
from .noise import NoiseParams

PROFILES: dict[str, AnomalyParams] = {
    "pronounced": AnomalyParams(
        noise=NoiseParams(scale=1.0, octaves=1, persistence=0.7, lacunarity=2.0),
        threshold=0.5, mask_ratio=0.03, strength=0.1, grid_res=64, knn=10,
    ),
    "medium": AnomalyParams(
        noise=NoiseParams(scale=2.0, octaves=2, persistence=0.5, lacunarity=2.0),
        threshold=0.6, mask_ratio=0.05, strength=0.05, grid_res=64, knn=10,
    ),
    "subtle": AnomalyParams(
        noise=NoiseParams(scale=3.0, octaves=3, persistence=0.4, lacunarity=2.0),
        threshold=0.6, mask_ratio=0.08, strength=0.02, grid_res=64, knn=10,
    ),
}

# Fixed values for the default scale x octaves search matrix.
GRID_SEARCH_S = (1.0, 2.0, 3.0, 4.0)
GRID_SEARCH_O = (1, 2, 3, 4)
GRID_SEARCH_FIXED = AnomalyParams(
    noise=NoiseParams(scale=1.0, octaves=1, persistence=0.5, lacunarity=2.0),
    threshold=0.6, mask_ratio=0.05, strength=0.02, grid_res=64, knn=10,
)


def get_profile(name: str) -> AnomalyParams:
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(
            f"unknown profile {name!r}; choose one of {sorted(PROFILES)}"
        ) from None
