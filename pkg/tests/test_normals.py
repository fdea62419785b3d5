import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from pnas3d import estimate_normals, extract_valid, knn, make_sphere_cap, parameterize
from pnas3d.errors import TooFewPoints


def brute_force_knn(coords, k):
    """O(M^2) scan; ties broken by lower index via stable argsort."""
    coords = np.asarray(coords, dtype=np.float64)
    m = coords.shape[0]
    out = np.empty((m, k), dtype=np.int64)
    for i in range(m):
        d = np.sqrt(((coords - coords[i]) ** 2).sum(axis=1))
        d[i] = np.inf
        out[i] = np.argsort(d, kind="stable")[:k]
    return out


class TestKnn:
    def test_collinear_endpoints(self):
        pts = np.column_stack([np.arange(5.0), np.zeros(5), np.zeros(5)])
        nb = knn(pts, k=2)
        assert set(nb[0]) == {1, 2}
        assert set(nb[4]) == {3, 2}

    def test_collinear_center(self):
        pts = np.column_stack([np.arange(5.0), np.zeros(5), np.zeros(5)])
        nb = knn(pts, k=2)
        assert set(nb[2]) == {1, 3}

    def test_matches_brute_force_random(self, rng):
        for _ in range(10):
            pts = rng.normal(size=(200, 3))
            fast = knn(pts, k=10)
            slow = brute_force_knn(pts, k=10)
            for i in range(200):
                assert set(fast[i]) == set(slow[i]), f"point {i}"

    def test_tie_break_by_lower_index_on_grid(self):
        # Regular grid: equidistant shells everywhere; the cut must prefer
        # lower indices among equal distances.
        xs, ys = np.meshgrid(np.arange(7.0), np.arange(7.0), indexing="ij")
        pts = np.column_stack([xs.ravel(), ys.ravel(), np.zeros(49)])
        nb = knn(pts, k=10)
        slow = brute_force_knn(pts, k=10)
        np.testing.assert_array_equal(np.sort(nb, axis=1), np.sort(slow, axis=1))

    def test_too_few_points(self):
        with pytest.raises(TooFewPoints):
            knn(np.zeros((5, 3)), k=5)

    def test_self_excluded(self, rng):
        pts = rng.normal(size=(50, 3))
        nb = knn(pts, k=8)
        for i in range(50):
            assert i not in nb[i]


class TestEstimateNormals:
    def test_planar_cloud(self, rng):
        pts = np.column_stack([rng.uniform(-1, 1, 300), rng.uniform(-1, 1, 300),
                               np.zeros(300)])
        field = estimate_normals(pts, knn(pts, 10), np.array([0.0, 0.0, 1.0]))
        np.testing.assert_allclose(field.normals, np.tile([0, 0, 1.0], (300, 1)),
                                   atol=1e-9)
        assert field.degenerate_count == 0

    def test_sphere_cap_radial(self):
        cloud = make_sphere_cap(3000, cap_deg=40.0)
        pts = cloud.points
        field = estimate_normals(pts, knn(pts, 10), np.array([0.0, 0.0, 1.0]))
        radial = pts / np.linalg.norm(pts, axis=1, keepdims=True)
        cosine = np.einsum("ij,ij->i", field.normals, radial)
        within_5deg = cosine >= np.cos(np.radians(5.0))
        assert within_5deg.mean() >= 0.99

    def test_unit_norm_and_orientation(self, rng):
        pts = rng.normal(size=(200, 3)) * [1.0, 1.0, 0.2]
        axis = np.array([0.0, 0.0, 1.0])
        field = estimate_normals(pts, knn(pts, 10), axis)
        np.testing.assert_allclose(np.linalg.norm(field.normals, axis=1), 1.0,
                                   atol=1e-9)
        assert np.all(field.normals @ axis >= 0.0)

    def test_collinear_neighborhood_flagged(self):
        pts = np.column_stack([np.arange(12.0), np.zeros(12), np.zeros(12)])
        pts = np.vstack([pts, [[0.0, 5.0, 0.0], [0.0, 0.0, 5.0], [5.0, 5.0, 5.0]]])
        axis = np.array([0.0, 0.0, 1.0])
        nb = knn(pts, k=4)
        field = estimate_normals(pts, nb, axis)
        # interior collinear points see only collinear neighbors
        assert field.degenerate[5]
        np.testing.assert_array_equal(field.normals[5], axis)

    def test_rotation_equivariance(self, rng):
        pts = rng.uniform(-1, 1, size=(500, 3)) * [1.0, 1.0, 0.05]
        axis = np.array([0.0, 0.0, 1.0])
        base = estimate_normals(pts, knn(pts, 10), axis)
        rot = Rotation.from_euler("xyz", [0.3, -0.5, 1.1]).as_matrix()
        turned = estimate_normals(pts @ rot.T, knn(pts @ rot.T, 10), rot @ axis)
        np.testing.assert_allclose(turned.normals, base.normals @ rot.T, atol=1e-7)

    def test_eigen_residual(self, rng):
        pts = rng.normal(size=(300, 3))
        nb = knn(pts, 10)
        field = estimate_normals(pts, nb, np.array([0.0, 0.0, 1.0]))
        for i in range(300):
            q = pts[nb[i]]
            qc = q - q.mean(axis=0)
            cov = qc.T @ qc
            n = field.normals[i]
            lam = n @ cov @ n
            residual = np.linalg.norm(cov @ n - lam * n)
            assert residual <= 1e-9 * np.trace(cov)

    def test_pipeline_axis_matches_surface(self, rng):
        # The surface normal axis orients every estimated normal.
        pts = np.column_stack([rng.uniform(-1, 1, 400), rng.uniform(-1, 1, 400),
                               1.0 + 0.01 * rng.standard_normal(400)])
        from pnas3d import PointCloud

        surf = parameterize(extract_valid(PointCloud(points=pts)))
        field = estimate_normals(pts, knn(pts, 10), surf.normal_axis)
        assert np.all(field.normals @ surf.normal_axis >= 0.0)
