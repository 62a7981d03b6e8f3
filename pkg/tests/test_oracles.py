"""Cross-checks between the fast routines and the brute-force references."""

import math

import numpy as np
import pytest

from conftest import near_points
from recon.errors import DomainError
from recon.field.implicit_fn import neighbors
from recon.geometry.linalg import orthonormalize, subspace_angle, sym_eig
from recon.oracles import grid_nearest, jacobi_eig, sampled_angle, scan_neighbors
from recon.sampling.cloud import SampleCloud


def test_jacobi_diagonal():
    values, vectors = jacobi_eig(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(values, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(np.abs(vectors), np.eye(3)[:, [1, 2, 0]])


def test_jacobi_householder_conjugate():
    v = np.array([1.0, 2.0, -1.0, 0.5])
    H = np.eye(4) - 2.0 * np.outer(v, v) / (v @ v)
    A = H @ np.diag([0.1, 0.2, 0.7, 1.0]) @ H
    values, vectors = jacobi_eig(A)
    np.testing.assert_allclose(values, [0.1, 0.2, 0.7, 1.0], atol=1e-10)
    np.testing.assert_allclose(vectors @ np.diag(values) @ vectors.T, A, atol=1e-10)


def test_jacobi_agrees_with_sym_eig():
    rng = np.random.default_rng(0)
    for _ in range(100):
        A = rng.standard_normal((6, 6))
        A = A + A.T
        fast_values, fast_vectors = sym_eig(A)
        slow_values, slow_vectors = jacobi_eig(A)
        np.testing.assert_allclose(fast_values, slow_values, atol=1e-8)
        np.testing.assert_allclose(fast_vectors, slow_vectors, atol=1e-8)


def test_sampled_angle_examples():
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert sampled_angle(e1, e1) <= 1e-6
    assert sampled_angle(e1, e2) >= math.pi / 2 - 0.02


def test_sampled_angle_agrees_with_subspace_angle():
    rng = np.random.default_rng(1)
    for _ in range(50):
        d = int(rng.integers(4, 7))
        k1 = int(rng.integers(1, 4))
        k2 = int(rng.integers(k1, d))
        U = orthonormalize(list(rng.standard_normal((k1, d))))
        V = orthonormalize(list(rng.standard_normal((k2, d))))
        assert sampled_angle(U, V) == pytest.approx(subspace_angle(U, V), abs=0.02)


def test_sampled_angle_needs_enough_directions():
    with pytest.raises(DomainError):
        sampled_angle(np.array([1.0, 0.0]), np.array([0.0, 1.0]), n_dirs=100)


def test_scan_agrees_with_tree_search(circle3_cloud, torus_cloud):
    rng = np.random.default_rng(2)
    for cloud in (circle3_cloud, torus_cloud):
        for x in near_points(cloud, rng, 500, scale=1.5):
            np.testing.assert_array_equal(neighbors(x, cloud), scan_neighbors(x, cloud))


def test_scan_empty_cloud():
    empty = SampleCloud(points=np.empty((0, 2)), frames=np.empty((0, 2, 1)), m=1, eps=0.01)
    assert scan_neighbors([0.0, 0.0], empty).size == 0
    assert neighbors([0.0, 0.0], empty).size == 0


def test_support_boundary_is_excluded(one_sample_cloud):
    on_boundary = [one_sample_cloud.support_radius, 0.0]
    assert neighbors(on_boundary, one_sample_cloud).size == 0
    assert scan_neighbors(on_boundary, one_sample_cloud).size == 0


def test_grid_nearest_circle(circle2):
    np.testing.assert_allclose(grid_nearest(circle2, np.array([2.0, 0.0])), [1.0, 0.0], atol=1e-6)
