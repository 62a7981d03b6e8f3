"""Tests for the synthetic manifolds."""

import math

import numpy as np
import pytest

from recon.errors import DomainError, MedialAxis
from recon.geometry.linalg import is_frame, orthonormalize, subspace_angle
from recon.manifolds.manifold_zoo import SyntheticManifold
from recon.oracles import grid_nearest


def test_embed_examples(circle2, torus):
    np.testing.assert_allclose(circle2.embed([0.0]), [1.0, 0.0])
    np.testing.assert_allclose(SyntheticManifold("sphere2", 3).embed([0.0, 0.0]), [0.0, 0.0, 1.0])
    np.testing.assert_allclose(torus.embed([0.0, 0.0]), [4.0, 0.0, 0.0])


def test_embed_wrong_arity(circle2, torus):
    with pytest.raises(DomainError):
        circle2.embed([0.0, 1.0])
    with pytest.raises(DomainError):
        torus.embed([0.0])


def test_unit_reach_scaling():
    big = SyntheticManifold("circle", 2, {"r": 5.0})
    assert big.reach == pytest.approx(1.0)
    assert big.scale == pytest.approx(0.2)
    assert np.linalg.norm(big.embed([1.0])) == pytest.approx(1.0)

    thin = SyntheticManifold("torus3", 3, {"R": 2.0, "r": 1.5})
    assert thin.reach == pytest.approx(1.0)


def test_trig_curve_has_unit_reach():
    curve = SyntheticManifold("trig_curve", 4)
    assert curve.reach == pytest.approx(1.0)
    assert curve.intrinsic_dim == 1


def test_invalid_manifolds():
    with pytest.raises(DomainError):
        SyntheticManifold("klein_bottle", 4)
    with pytest.raises(DomainError):
        SyntheticManifold("torus3", 3, {"R": 1.0, "r": 2.0})
    with pytest.raises(DomainError):
        SyntheticManifold("sphere2", 2)
    with pytest.raises(DomainError):
        SyntheticManifold("trig_curve", 4, {"frequencies": [2, 4], "amplitudes": [1.0, 1.0]})


def test_nearest_point_circle(circle2):
    np.testing.assert_allclose(circle2.nearest_point([2.0, 0.0]), [1.0, 0.0])
    with pytest.raises(MedialAxis):
        circle2.nearest_point([0.0, 0.0])


def test_nearest_point_torus_matches_grid_search(torus):
    for x in ([4.5, 0.0, 0.5], [-1.0, 2.5, -0.3], [0.3, -3.2, 0.9]):
        expected = grid_nearest(torus, np.array(x))
        np.testing.assert_allclose(torus.nearest_point(x), expected, atol=1e-6)


def test_torus_axis_is_medial(torus):
    with pytest.raises(MedialAxis):
        torus.nearest_point([0.0, 0.0, 0.5])
    with pytest.raises(MedialAxis):
        torus.nearest_point([3.0, 0.0, 0.0])


def test_nearest_point_recovers_normal_offset():
    for manifold, u in ((SyntheticManifold("sphere2", 3, seed=1), [1.0, 2.0]),
                        (SyntheticManifold("flat_torus4", 5, seed=2), [0.4, 2.2]),
                        (SyntheticManifold("trig_curve", 4), [1.3])):
        z = manifold.embed(u)
        n = manifold.normal_frame(z)[:, 0]
        x = z + 0.05 * n
        np.testing.assert_allclose(manifold.nearest_point(x), z, atol=1e-8)
        assert manifold.distance(x) == pytest.approx(0.05, abs=1e-8)


def test_nearest_point_is_idempotent(torus):
    rng = np.random.default_rng(4)
    for z in torus.embed_many(torus.random_params(rng, 20)):
        x = z + 0.1 * rng.standard_normal(3)
        nu = torus.nearest_point(x)
        np.testing.assert_allclose(torus.nearest_point(nu), nu, atol=1e-10)


def test_tangent_and_normal_frames_circle(circle2):
    z = np.array([1.0, 0.0])
    assert subspace_angle(circle2.tangent_frame(z), np.array([0.0, 1.0])) <= 1e-12
    assert subspace_angle(circle2.normal_frame(z), np.array([1.0, 0.0])) <= 1e-12


def test_sphere_pole_tangent():
    sphere = SyntheticManifold("sphere2", 3)
    T = sphere.tangent_frame(np.array([0.0, 0.0, 1.0]))
    assert is_frame(T)
    assert subspace_angle(T, np.eye(3)[:, :2]) <= 1e-12


def test_torus_tangent_matches_finite_differences():
    torus = SyntheticManifold("torus3", 3, seed=4)
    u = np.array([0.7, 1.3])
    h = 1e-6
    columns = [(torus.embed(u + h * e) - torus.embed(u - h * e)) / (2 * h) for e in np.eye(2)]
    T = torus.tangent_frame(torus.embed(u))
    N = torus.normal_frame(torus.embed(u))
    assert subspace_angle(orthonormalize(columns), T) <= 1e-5
    assert np.max(np.abs(T.T @ N)) <= 1e-10


def test_tangent_frame_off_manifold(circle2):
    with pytest.raises(DomainError):
        circle2.tangent_frame(np.array([2.0, 0.0]))


def test_rotation_preserves_geometry():
    plain = SyntheticManifold("torus3", 5)
    rotated = SyntheticManifold("torus3", 5, seed=8)
    u = np.array([2.0, 0.5])
    assert np.linalg.norm(rotated.embed(u)) == pytest.approx(np.linalg.norm(plain.embed(u)))
    assert not np.allclose(rotated.embed(u), plain.embed(u))


def test_flat_nearest_point_is_orthogonal_projection(plane):
    z = plane.embed([0.1, -0.2])
    n = plane.normal_frame(z)[:, 0]
    np.testing.assert_allclose(plane.nearest_point(z + 0.3 * n), z, atol=1e-12)
    assert math.isinf(plane.reach)


def test_interior_box_shrinks_region(torus):
    box = torus.interior_box([(0.0, 0.25), (-0.25, 0.25)], 0.05)
    assert 0.0 < box[0][0] < box[0][1] < 0.25
    assert -0.25 < box[1][0] < box[1][1] < 0.25
    with pytest.raises(DomainError):
        torus.interior_box([(0.0, 0.01), (0.0, 0.01)], 0.05)


def test_descriptor_round_trip():
    manifold = SyntheticManifold("trig_curve", 6, {"frequencies": [1, 3], "amplitudes": [1.0, 0.3]}, seed=3)
    rebuilt = SyntheticManifold.from_descriptor(manifold.descriptor())
    np.testing.assert_array_equal(rebuilt.embed([0.9]), manifold.embed([0.9]))
    assert rebuilt.descriptor() == manifold.descriptor()
