"""Tests for eigendecomposition, subspace angles and frame helpers."""

import math

import numpy as np
import pytest

from recon.errors import DomainError, NumericError, RankDeficient
from recon.geometry.linalg import (
    complement_frame,
    is_frame,
    orthonormalize,
    random_rotation,
    subspace_angle,
    sym_eig,
)


def test_sym_eig_diagonal():
    values, vectors = sym_eig(np.diag([0.0, 1.0]))
    np.testing.assert_allclose(values, [0.0, 1.0])
    np.testing.assert_allclose(vectors, np.eye(2))


def test_sym_eig_scalar_matrix():
    values, vectors = sym_eig(0.5 * np.eye(2))
    np.testing.assert_allclose(values, [0.5, 0.5])
    assert is_frame(vectors)
    for column in vectors.T:
        assert column[np.argmax(np.abs(column))] > 0


def test_sym_eig_sign_convention_and_order():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((5, 5))
    values, vectors = sym_eig(A + A.T)
    assert np.all(np.diff(values) >= 0)
    for column in vectors.T:
        assert column[np.argmax(np.abs(column))] > 0
    np.testing.assert_allclose(vectors @ np.diag(values) @ vectors.T, A + A.T, atol=1e-10)


def test_sym_eig_rejects_non_finite():
    with pytest.raises(NumericError):
        sym_eig(np.array([[1.0, np.nan], [np.nan, 1.0]]))


def test_subspace_angle_examples():
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert subspace_angle(e1, e1) == pytest.approx(0.0, abs=1e-12)
    assert subspace_angle(e1, e2) == pytest.approx(math.pi / 2)
    rotated = math.cos(0.3) * e1 + math.sin(0.3) * e2
    assert subspace_angle(e1, rotated) == pytest.approx(0.3, abs=1e-10)


def test_subspace_angle_needs_smaller_first_subspace():
    with pytest.raises(DomainError):
        subspace_angle(np.eye(3)[:, :2], np.eye(3)[:, :1])
    with pytest.raises(DomainError):
        subspace_angle(np.eye(3)[:, :1], np.eye(4)[:, :1])


def test_subspace_angle_line_in_plane():
    plane = np.eye(3)[:, :2]
    tilted = np.array([1.0, 0.0, 1.0]) / math.sqrt(2.0)
    assert subspace_angle(tilted, plane) == pytest.approx(math.pi / 4)


def test_subspace_angle_symmetric_and_rotation_invariant():
    rng = np.random.default_rng(3)
    for _ in range(20):
        U = orthonormalize(list(rng.standard_normal((2, 5))))
        V = orthonormalize(list(rng.standard_normal((2, 5))))
        Q = random_rotation(rng, 5)
        assert subspace_angle(U, V) == pytest.approx(subspace_angle(V, U), abs=1e-10)
        assert subspace_angle(Q @ U, Q @ V) == pytest.approx(subspace_angle(U, V), abs=1e-9)


def test_sym_eig_is_deterministic():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((4, 4))
    first, second = sym_eig(A + A.T), sym_eig(A + A.T)
    assert first.eigenvalues.tobytes() == second.eigenvalues.tobytes()
    assert first.eigenvectors.tobytes() == second.eigenvectors.tobytes()


def test_orthonormalize_examples():
    np.testing.assert_allclose(orthonormalize([np.array([1.0, 0.0]), np.array([0.0, 2.0])]), np.eye(2))

    F = orthonormalize([np.array([1.0, 1.0, 0.0]), np.array([1.0, 0.0, 0.0])])
    s = 1.0 / math.sqrt(2.0)
    np.testing.assert_allclose(F, [[s, s], [s, -s], [0.0, 0.0]], atol=1e-15)


def test_orthonormalize_rank_deficient():
    with pytest.raises(RankDeficient):
        orthonormalize([np.array([1.0, 0.0]), np.array([2.0, 0.0])])


def test_orthonormalize_preserves_span():
    rng = np.random.default_rng(1)
    vectors = [rng.standard_normal(5) for _ in range(3)]
    F = orthonormalize(vectors)
    assert is_frame(F)
    for v in vectors:
        assert np.linalg.norm(v - F @ (F.T @ v)) <= 1e-10 * np.linalg.norm(v)


def test_complement_frame():
    F = np.eye(3)[:, :1]
    N = complement_frame(F)
    assert N.shape == (3, 2)
    assert is_frame(N)
    assert np.max(np.abs(F.T @ N)) <= 1e-12


def test_is_frame():
    assert is_frame(np.eye(3)[:, :2])
    assert not is_frame(np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert not is_frame(np.ones((2, 3)))


def test_random_rotation_is_orthogonal_and_seeded():
    Q1 = random_rotation(np.random.default_rng(9), 4)
    Q2 = random_rotation(np.random.default_rng(9), 4)
    np.testing.assert_allclose(Q1.T @ Q1, np.eye(4), atol=1e-12)
    np.testing.assert_array_equal(Q1, Q2)
