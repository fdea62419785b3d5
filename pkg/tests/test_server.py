import base64

import numpy as np
import pytest
from fastapi.testclient import TestClient

from pnas3d import make_plane, write_cloud
from pnas3d.server import create_app


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    fixtures = tmp_path_factory.mktemp("fixtures")
    write_cloud(make_plane(100, 100), fixtures / "plane.opc")
    write_cloud(make_plane(20, 20), fixtures / "small.opc")
    app = create_app(fixtures_dir=fixtures)
    return TestClient(app)


def _floats(b64, dim=3):
    arr = np.frombuffer(base64.b64decode(b64), dtype="<f4")
    return arr.reshape(-1, dim) if dim > 1 else arr


def _mask(b64, count):
    return np.unpackbits(
        np.frombuffer(base64.b64decode(b64), dtype=np.uint8))[:count]


class TestClouds:
    def test_lists_fixture_names(self, client):
        resp = client.get("/api/clouds")
        assert resp.status_code == 200
        assert resp.json()["clouds"] == ["plane.opc", "small.opc"]


class TestProfiles:
    def test_embeds_exact_parameter_values(self, client):
        profiles = {p["name"]: p for p in client.get("/api/profiles").json()["profiles"]}
        assert profiles["pronounced"] | {"name": "pronounced"} == {
            "name": "pronounced", "scale": 1.0, "octaves": 1, "persistence": 0.7,
            "lacunarity": 2.0, "coordinate_mode": "normalized", "threshold": 0.5,
            "mask_ratio": 0.03, "strength": 0.1, "grid_res": 64, "knn": 10,
        }
        assert profiles["medium"]["scale"] == 2.0
        assert profiles["medium"]["octaves"] == 2
        assert profiles["medium"]["persistence"] == 0.5
        assert profiles["medium"]["threshold"] == 0.6
        assert profiles["medium"]["mask_ratio"] == 0.05
        assert profiles["medium"]["strength"] == 0.05
        assert profiles["subtle"]["scale"] == 3.0
        assert profiles["subtle"]["octaves"] == 3
        assert profiles["subtle"]["persistence"] == 0.4
        assert profiles["subtle"]["mask_ratio"] == 0.08
        assert profiles["subtle"]["strength"] == 0.02


class TestSynthesize:
    def test_medium_profile_mask_bound(self, client):
        resp = client.post("/api/synthesize", json={"fixture": "plane.opc", "seed": 7})
        assert resp.status_code == 200
        body = resp.json()
        count = body["count"]
        mask = _mask(body["mask_b64"], count)
        assert body["masked_fraction"] <= 0.05 + 1.0 / count
        assert mask.mean() == pytest.approx(body["masked_fraction"])
        positions = _floats(body["positions_b64"])
        magnitudes = _floats(body["magnitudes_b64"], dim=1)
        assert positions.shape == (count, 3)
        assert magnitudes.shape == (count,)
        assert body["params"]["scale"] == 2.0
        assert body["params"]["seed"] == 7

    def test_identical_requests_byte_identical_bodies(self, client):
        payload = {"fixture": "plane.opc", "seed": 11, "octaves": 3}
        a = client.post("/api/synthesize", json=payload)
        b = client.post("/api/synthesize", json=payload)
        assert a.content == b.content

    def test_unknown_fixture_404(self, client):
        resp = client.post("/api/synthesize", json={"fixture": "nope.opc"})
        assert resp.status_code == 404
        assert "nope.opc" in resp.json()["detail"]

    def test_invalid_threshold_422_names_invariant(self, client):
        resp = client.post("/api/synthesize",
                           json={"fixture": "plane.opc", "threshold": 1.5})
        assert resp.status_code == 422
        assert "0 < threshold < 1" in resp.text

    def test_invalid_mask_ratio_422(self, client):
        resp = client.post("/api/synthesize",
                           json={"fixture": "plane.opc", "mask_ratio": 0.0})
        assert resp.status_code == 422
        assert "mask_ratio" in resp.text

    def test_downsampling_preserves_mask_proportion(self, client):
        full = client.post("/api/synthesize",
                           json={"fixture": "plane.opc", "seed": 7}).json()
        down = client.post("/api/synthesize",
                           json={"fixture": "plane.opc", "seed": 7,
                                 "max_points": 2000}).json()
        assert down["count"] == 2000
        sampled_fraction = _mask(down["mask_b64"], 2000).mean()
        assert abs(sampled_fraction - full["masked_fraction"]) <= 0.02

    def test_downsampled_positions_are_augmented(self, client):
        body = client.post("/api/synthesize",
                           json={"fixture": "plane.opc", "seed": 7}).json()
        positions = _floats(body["positions_b64"])
        mask = _mask(body["mask_b64"], body["count"]).astype(bool)
        # plane sits at z=1; only masked points leave it
        assert np.all(positions[~mask, 2] == 1.0)
        assert np.any(positions[mask, 2] != 1.0)

    def test_inline_cloud(self, client):
        pts = make_plane(12, 12).points.astype("<f4")
        b64 = base64.b64encode(pts.tobytes()).decode()
        resp = client.post("/api/synthesize", json={
            "cloud": {"positions_b64": b64, "height": 12, "width": 12},
            "seed": 5,
        })
        assert resp.status_code == 200
        assert resp.json()["count"] == 144

    def test_needs_fixture_or_cloud(self, client):
        resp = client.post("/api/synthesize", json={"seed": 1})
        assert resp.status_code == 422

    def test_include_normals(self, client):
        body = client.post("/api/synthesize", json={
            "fixture": "small.opc", "seed": 1, "include_normals": True}).json()
        normals = _floats(body["normals_b64"])
        assert normals.shape == (body["count"], 3)
        np.testing.assert_allclose(np.linalg.norm(normals, axis=1), 1.0, atol=1e-6)

    def test_timing_header_present(self, client):
        resp = client.post("/api/synthesize", json={"fixture": "small.opc"})
        assert "x-compute-ms" in resp.headers


class TestGrid:
    def test_default_grid_row_major(self, client):
        resp = client.post("/api/grid", json={"fixture": "plane.opc", "seed": 7})
        assert resp.status_code == 200
        body = resp.json()
        cells = body["cells"]
        assert len(cells) == 16
        expected = [(s, o) for s in (1.0, 2.0, 3.0, 4.0) for o in (1, 2, 3, 4)]
        assert [(c["s"], c["o"]) for c in cells] == expected
        for cell in cells:
            assert cell["status"] == "ok"
            assert cell["masked_fraction"] <= 0.05 + 1e-4
            assert cell["synthesize_request"]["scale"] == cell["s"]
            assert cell["synthesize_request"]["octaves"] == cell["o"]

    def test_single_cell_consistent_with_synthesize(self, client):
        grid = client.post("/api/grid", json={
            "fixture": "plane.opc", "seed": 7, "s_list": [2.0], "o_list": [2],
            "strength": 0.05}).json()
        cell = grid["cells"][0]
        single = client.post("/api/synthesize", json=cell["synthesize_request"]).json()
        assert single["masked_fraction"] == cell["masked_fraction"]
        assert single["effective_threshold"] == cell["effective_threshold"]

    def test_oversized_grid_rejected(self, client):
        resp = client.post("/api/grid", json={
            "fixture": "plane.opc", "s_list": list(map(float, range(1, 10)))})
        assert resp.status_code == 422

    def test_unknown_fixture_404(self, client):
        resp = client.post("/api/grid", json={"fixture": "ghost.opc"})
        assert resp.status_code == 404
