"""HTTP surface for the parameter explorer: a stateless adapter over
``synthesize``.

Binary arrays travel as base64 inside JSON: positions/magnitudes/normals
as little-endian float32, the mask as an MSB-first packed bitset. Response
bodies are deterministic per (fixture, params, seed, downsample); compute
time is reported in the ``X-Compute-Ms`` header so identical requests keep
byte-identical bodies.
"""

from __future__ import annotations

import base64
import dataclasses
import logging
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, field_validator

from . import __version__
from .anomaly import AnomalyParams, AnomalyResult, synthesize
from .cloud import PointCloud
from .errors import GeometryError, ParseError
from .io_formats import flatten_params, read_cloud
from .noise import NoiseParams
from .profiles import GRID_SEARCH_FIXED, PROFILES

log = logging.getLogger("pnas3d.server")

_MEDIUM = PROFILES["medium"]


def _b64(array: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(array).tobytes()).decode("ascii")


class InlineCloud(BaseModel):
    positions_b64: str
    height: int | None = None
    width: int | None = None

    def to_cloud(self) -> PointCloud:
        raw = base64.b64decode(self.positions_b64)
        coords = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        if coords.size % 3:
            raise ValueError("inline positions must be float32 triples")
        coords = coords.reshape(-1, 3)
        if self.height and self.width:
            return PointCloud.from_organized(coords.reshape(self.height, self.width, 3))
        return PointCloud(points=coords)


class SynthesizeRequest(BaseModel):
    """One synthesis run; parameter defaults are the medium profile."""

    fixture: str | None = None
    cloud: InlineCloud | None = None
    scale: float = _MEDIUM.noise.scale
    octaves: int = _MEDIUM.noise.octaves
    persistence: float = _MEDIUM.noise.persistence
    lacunarity: float = _MEDIUM.noise.lacunarity
    coordinate_mode: str = "normalized"
    threshold: float = _MEDIUM.threshold
    mask_ratio: float = _MEDIUM.mask_ratio
    strength: float = _MEDIUM.strength
    grid_res: int = _MEDIUM.grid_res
    knn: int = _MEDIUM.knn
    seed: int = 0
    max_points: int | None = Field(default=None, ge=1)
    include_normals: bool = False

    @field_validator("threshold")
    @classmethod
    def _check_threshold(cls, v):
        if not 0 < v < 1:
            raise ValueError("threshold must satisfy 0 < threshold < 1")
        return v

    @field_validator("mask_ratio")
    @classmethod
    def _check_mask_ratio(cls, v):
        if not 0 < v < 1:
            raise ValueError("mask_ratio must satisfy 0 < mask_ratio < 1")
        return v

    @field_validator("strength")
    @classmethod
    def _check_strength(cls, v):
        if not v > 0:
            raise ValueError("strength must satisfy strength > 0")
        return v

    @field_validator("octaves")
    @classmethod
    def _check_octaves(cls, v):
        if v < 1:
            raise ValueError("octaves must satisfy octaves >= 1")
        return v

    @field_validator("scale")
    @classmethod
    def _check_scale(cls, v):
        if not v > 0:
            raise ValueError("scale must satisfy scale > 0")
        return v

    def to_params(self) -> AnomalyParams:
        return AnomalyParams(
            noise=NoiseParams(
                scale=self.scale, octaves=self.octaves,
                persistence=self.persistence, lacunarity=self.lacunarity,
                coordinate_mode=self.coordinate_mode,
            ),
            threshold=self.threshold, mask_ratio=self.mask_ratio,
            strength=self.strength, grid_res=self.grid_res, knn=self.knn,
        )


class GridRequest(BaseModel):
    fixture: str
    s_list: list[float] = Field(default=[1.0, 2.0, 3.0, 4.0], max_length=8)
    o_list: list[int] = Field(default=[1, 2, 3, 4], max_length=8)
    persistence: float = GRID_SEARCH_FIXED.noise.persistence
    lacunarity: float = GRID_SEARCH_FIXED.noise.lacunarity
    coordinate_mode: str = "normalized"
    threshold: float = GRID_SEARCH_FIXED.threshold
    mask_ratio: float = GRID_SEARCH_FIXED.mask_ratio
    strength: float = GRID_SEARCH_FIXED.strength
    grid_res: int = GRID_SEARCH_FIXED.grid_res
    knn: int = GRID_SEARCH_FIXED.knn
    seed: int = 0


def _resolve_fixture(fixtures_dir: Path, name: str) -> Path:
    if "/" in name or "\\" in name or name.startswith("."):
        raise HTTPException(status_code=404, detail=f"unknown fixture {name!r}")
    path = fixtures_dir / name
    if not path.is_file():
        raise HTTPException(status_code=404, detail=f"unknown fixture {name!r}")
    return path


def _load_request_cloud(fixtures_dir: Path, req: SynthesizeRequest) -> PointCloud:
    if req.cloud is not None:
        return req.cloud.to_cloud()
    if req.fixture is None:
        raise HTTPException(status_code=422,
                            detail="request needs either 'fixture' or 'cloud'")
    return read_cloud(_resolve_fixture(fixtures_dir, req.fixture))


def _downsample(m: int, max_points: int | None, seed: int) -> np.ndarray | None:
    """Uniform random index subset, sorted; None when no reduction applies.

    Runs after synthesis so labels stay truthful on the sampled subset.
    """
    if max_points is None or m <= max_points:
        return None
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(m, size=max_points, replace=False))


def _encode_result(result: AnomalyResult, req: SynthesizeRequest) -> dict:
    valid = result.augmented.validity
    positions = result.augmented.points[valid]
    mask = result.mask[valid]
    magnitude = result.signed_magnitude[valid]
    normals = result.normals[valid] if result.normals is not None else None

    full_fraction = float(mask.mean())
    keep = _downsample(positions.shape[0], req.max_points, req.seed)
    if keep is not None:
        positions, mask, magnitude = positions[keep], mask[keep], magnitude[keep]
        if normals is not None:
            normals = normals[keep]

    body = {
        "count": int(positions.shape[0]),
        "positions_b64": _b64(positions.astype("<f4")),
        "mask_b64": _b64(np.packbits(mask.astype(bool))),
        "magnitudes_b64": _b64(magnitude.astype("<f4")),
        "effective_threshold": result.effective_threshold,
        "masked_fraction": full_fraction,
        "warnings": dataclasses.asdict(result.warnings),
        "params": {**flatten_params(req.to_params()), "seed": req.seed},
    }
    if req.include_normals and normals is not None:
        body["normals_b64"] = _b64(normals.astype("<f4"))
    return body


def create_app(fixtures_dir: Path, ui_dir: Path | None = None) -> FastAPI:
    """Build the API app; fixtures are read-only, no request mutates state."""
    fixtures_dir = Path(fixtures_dir)
    app = FastAPI(title="pnas3d explorer", version=__version__)

    @app.middleware("http")
    async def _log_requests(request: Request, call_next):
        start = time.perf_counter()
        response = await call_next(request)
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        response.headers["X-Compute-Ms"] = f"{elapsed_ms:.1f}"
        log.info("%s %s -> %d (%.1f ms)", request.method, request.url.path,
                 response.status_code, elapsed_ms)
        return response

    @app.exception_handler(GeometryError)
    async def _geometry_error(request: Request, exc: GeometryError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ParseError)
    async def _parse_error(request: Request, exc: ParseError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/api/clouds")
    def list_clouds():
        """Names of loadable fixtures."""
        names = sorted(
            p.name for p in fixtures_dir.iterdir()
            if p.is_file() and p.suffix.lower() in (".opc", ".ply", ".xyz")
        ) if fixtures_dir.is_dir() else []
        return {"clouds": names}

    @app.get("/api/profiles")
    def list_profiles():
        """Built-in profiles with their exact parameter values."""
        return {"profiles": [
            {"name": name, **flatten_params(params)}
            for name, params in PROFILES.items()
        ]}

    @app.post("/api/synthesize")
    def api_synthesize(req: SynthesizeRequest):
        cloud = _load_request_cloud(fixtures_dir, req)
        log.info("synthesize: fixture=%s seed=%d params=%s",
                 req.fixture, req.seed, flatten_params(req.to_params()))
        result = synthesize(cloud, req.to_params(), req.seed)
        return _encode_result(result, req)

    @app.post("/api/grid")
    def api_grid(req: GridRequest):
        """Scale x octaves sweep; manifest cells are row-major in (s, o)."""
        if not req.s_list or not req.o_list:
            raise HTTPException(status_code=422, detail="s_list and o_list must be non-empty")
        cloud = read_cloud(_resolve_fixture(fixtures_dir, req.fixture))
        cells = []
        for s in req.s_list:
            for o in req.o_list:
                sub = SynthesizeRequest(
                    fixture=req.fixture, scale=s, octaves=o,
                    persistence=req.persistence, lacunarity=req.lacunarity,
                    coordinate_mode=req.coordinate_mode, threshold=req.threshold,
                    mask_ratio=req.mask_ratio, strength=req.strength,
                    grid_res=req.grid_res, knn=req.knn, seed=req.seed,
                )
                try:
                    result = synthesize(cloud, sub.to_params(), sub.seed)
                    valid = result.augmented.validity
                    cells.append({
                        "s": s, "o": o, "status": "ok",
                        "masked_fraction": float(result.mask[valid].mean()),
                        "max_abs_displacement": float(
                            np.abs(result.signed_magnitude).max()),
                        "effective_threshold": result.effective_threshold,
                        "synthesize_request": sub.model_dump(
                            exclude={"cloud"}, exclude_none=True),
                    })
                except (GeometryError, ParseError, ValueError) as exc:
                    cells.append({"s": s, "o": o, "status": "error",
                                  "error": str(exc)})
        return {
            "fixture": req.fixture,
            "seed": req.seed,
            "s_values": req.s_list,
            "o_values": req.o_list,
            "cells": cells,
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
