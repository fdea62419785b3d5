import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from pnas3d import PointCloud, extract_valid, parameterize
from pnas3d.errors import DegenerateGeometry, TooFewPoints


def _subset(points):
    return extract_valid(PointCloud(points=np.asarray(points, dtype=float)))


def test_planar_cloud_normal_axis(rng):
    pts = np.column_stack([rng.uniform(-1, 1, 200), rng.uniform(-2, 2, 200),
                           np.zeros(200)])
    surf = parameterize(_subset(pts))
    assert abs(abs(surf.normal_axis[2]) - 1.0) < 1e-9
    assert np.all(np.abs(surf.normal_axis[:2]) < 1e-9)

    # Planar projection preserves pairwise distances.
    idx = rng.integers(0, 200, size=(100, 2))
    d3 = np.linalg.norm(pts[idx[:, 0]] - pts[idx[:, 1]], axis=1)
    d2 = np.linalg.norm(surf.coords2d[idx[:, 0]] - surf.coords2d[idx[:, 1]], axis=1)
    np.testing.assert_allclose(d2, d3, atol=1e-9)


def test_unit_square_diagonal_symmetry():
    surf = parameterize(_subset([(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)]))
    np.testing.assert_allclose(surf.centroid, [0.5, 0.5, 0.0], atol=1e-12)
    np.testing.assert_allclose(surf.singular_values[:2], [1.0, 1.0], atol=1e-9)
    # Projected square keeps its shape up to rotation/reflection.
    d = np.sort([np.linalg.norm(surf.coords2d[i] - surf.coords2d[j])
                 for i in range(4) for j in range(i + 1, 4)])
    np.testing.assert_allclose(d, [1, 1, 1, 1, np.sqrt(2), np.sqrt(2)], atol=1e-9)


def test_rotation_invariance_of_2d_distances(rng):
    pts = np.column_stack([rng.uniform(-1, 1, 150), rng.uniform(-1, 1, 150),
                           0.05 * rng.standard_normal(150)])
    base = parameterize(_subset(pts))
    for rot_seed in range(5):
        rot = Rotation.random(random_state=rot_seed).as_matrix()
        turned = parameterize(_subset(pts @ rot.T))
        idx = rng.integers(0, 150, size=(50, 2))
        d0 = np.linalg.norm(base.coords2d[idx[:, 0]] - base.coords2d[idx[:, 1]], axis=1)
        d1 = np.linalg.norm(turned.coords2d[idx[:, 0]] - turned.coords2d[idx[:, 1]], axis=1)
        np.testing.assert_allclose(d0, d1, atol=1e-9)


def test_basis_orthonormal_and_centered(rng):
    pts = rng.normal(size=(300, 3)) * [2.0, 1.0, 0.1]
    surf = parameterize(_subset(pts))
    gram = surf.basis.T @ surf.basis
    np.testing.assert_allclose(gram, np.eye(2), atol=1e-9)
    np.testing.assert_allclose(surf.basis.T @ surf.normal_axis, [0, 0], atol=1e-9)
    scale = np.abs(surf.coords2d).max()
    assert np.all(np.abs(surf.coords2d.mean(axis=0)) <= 1e-9 * max(scale, 1.0))
    assert np.all(surf.bound_min <= surf.bound_max)


def test_projection_is_contraction(rng):
    pts = rng.normal(size=(100, 3))
    surf = parameterize(_subset(pts))
    idx = rng.integers(0, 100, size=(200, 2))
    d3 = np.linalg.norm(pts[idx[:, 0]] - pts[idx[:, 1]], axis=1)
    d2 = np.linalg.norm(surf.coords2d[idx[:, 0]] - surf.coords2d[idx[:, 1]], axis=1)
    assert np.all(d2 <= d3 + 1e-9)


def test_planar_reconstruction_loss(rng):
    pts = np.column_stack([rng.uniform(-1, 1, 100), rng.uniform(-1, 1, 100),
                           np.full(100, 3.0)])
    surf = parameterize(_subset(pts))
    centered = pts - surf.centroid
    recon = surf.coords2d @ surf.basis.T
    assert np.linalg.norm(centered - recon, axis=1).max() <= 1e-9


def test_sign_determinism(rng):
    pts = rng.normal(size=(80, 3))
    a = parameterize(_subset(pts))
    b = parameterize(_subset(pts.copy()))
    assert a.basis.tobytes() == b.basis.tobytes()
    assert a.coords2d.tobytes() == b.coords2d.tobytes()
    assert a.normal_axis.tobytes() == b.normal_axis.tobytes()
    # Largest-magnitude entry of each principal direction is positive.
    for vec in (a.basis[:, 0], a.basis[:, 1], a.normal_axis):
        assert vec[np.argmax(np.abs(vec))] > 0


def test_too_few_points():
    with pytest.raises(TooFewPoints):
        parameterize(_subset([(0, 0, 0), (1, 1, 1)]))


def test_collinear_points_degenerate():
    pts = np.outer(np.linspace(0, 1, 10), [1.0, 2.0, 3.0])
    with pytest.raises(DegenerateGeometry):
        parameterize(_subset(pts))


def test_coincident_points_degenerate():
    with pytest.raises(DegenerateGeometry):
        parameterize(_subset(np.ones((5, 3))))
