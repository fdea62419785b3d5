"""pnas3d: seeded synthesis of surface anomalies on 3D point clouds.

Points are projected onto their PCA plane, a fractal gradient-noise field
is sampled over the projected bounds, and points whose noise magnitude
exceeds an adaptive threshold are displaced along their estimated surface
normals. Ships as a library, a CLI (``pnas3d``), and an HTTP API backing
the browser parameter explorer.
"""

__version__ = "0.1.0"

from .anomaly import (
    AnomalyParams,
    AnomalyResult,
    ResultWarnings,
    adapt_threshold,
    displace,
    local_normalize,
    mask_points,
    synthesize,
)
from .cloud import PointCloud, ValidSubset, extract_valid, reintegrate
from .io_formats import (
    flatten_params,
    magnitude_colors,
    read_cloud,
    unflatten_params,
    write_cloud,
    write_result,
)
from .noise import NoiseGrid, NoiseParams, build_grid, fractal, perlin2
from .normals import NormalField, estimate_normals, knn
from .profiles import PROFILES, get_profile
from .surface import SurfaceParam, parameterize
from .synthetic import make_plane, make_sphere_cap, save_demo_fixtures

__all__ = [
    "__version__",
    "AnomalyParams", "AnomalyResult", "ResultWarnings",
    "adapt_threshold", "displace", "local_normalize", "mask_points", "synthesize",
    "PointCloud", "ValidSubset", "extract_valid", "reintegrate",
    "read_cloud", "write_cloud", "write_result",
    "flatten_params", "unflatten_params", "magnitude_colors",
    "NoiseGrid", "NoiseParams", "build_grid", "fractal", "perlin2",
    "NormalField", "estimate_normals", "knn",
    "PROFILES", "get_profile",
    "SurfaceParam", "parameterize",
    "make_plane", "make_sphere_cap", "save_demo_fixtures",
]
