"""Tests for the bump function and normalized weights."""

import numpy as np
import pytest

from conftest import near_points
from recon.errors import DomainError, OutOfSupport
from recon.geometry.weights import WeightParams, bump, normalized_weights
from recon.sampling.cloud import SampleCloud


def test_bump_at_zero_is_one():
    assert bump(0.0, WeightParams(2, 0.1)) == 1.0


def test_bump_vanishes_at_support_boundary():
    for params in (WeightParams(1, 0.04), WeightParams(3, 0.2)):
        assert bump(params.support_radius, params) == 0.0
        assert bump(2.0 * params.support_radius, params) == 0.0


def test_bump_hand_value():
    value = bump(0.03, WeightParams(1, 0.04))
    assert value == pytest.approx(0.15625, abs=1e-15)
    assert value > 0.06


def test_bump_is_vectorized_and_continuous_at_boundary():
    params = WeightParams(2, 0.05)
    s = np.array([0.0, 0.05, 0.1, 0.1 - 1e-9, 0.2])
    values = bump(s, params)
    assert values.shape == s.shape
    assert values[-1] == 0.0
    assert values[3] < 1e-20


def test_bump_is_nonincreasing():
    for params in (WeightParams(1, 0.04), WeightParams(2, 0.1), WeightParams(4, 0.02)):
        s = np.linspace(0.0, params.support_radius, 2001)
        assert np.all(np.diff(bump(s, params)) <= 1e-15)


def test_bump_cutoff_is_smooth():
    for m in (1, 2, 3):
        params = WeightParams(m, 0.1)
        delta = 1e-3 * params.support_radius
        ratio = delta / params.support_radius
        assert bump(params.support_radius - delta, params) <= (2 * m + 1) * ratio ** (2 * m)


def test_bump_rejects_negative_distance():
    with pytest.raises(DomainError):
        bump(-0.1, WeightParams(1, 0.04))


def test_weight_params_validation():
    with pytest.raises(DomainError):
        WeightParams(0, 0.1)
    with pytest.raises(DomainError):
        WeightParams(1, 0.0)


def test_single_sample_gets_full_weight(one_sample_cloud):
    indices, weights = normalized_weights(np.array([0.0, 0.01]), one_sample_cloud)
    assert indices.tolist() == [0]
    assert weights.tolist() == [1.0]


def test_equidistant_samples_share_weight():
    cloud = SampleCloud(points=np.array([[-0.01, 0.0], [0.01, 0.0]]),
                        frames=np.array([[[1.0], [0.0]], [[1.0], [0.0]]]), m=1, eps=0.01)
    indices, weights = normalized_weights(np.array([0.0, 0.005]), cloud)
    assert indices.tolist() == [0, 1]
    np.testing.assert_allclose(weights, [0.5, 0.5], atol=1e-15)


def test_no_sample_in_support(one_sample_cloud):
    with pytest.raises(OutOfSupport):
        normalized_weights(np.array([1.0, 1.0]), one_sample_cloud)


def test_sample_exactly_at_support_radius_is_excluded(one_sample_cloud):
    x = np.array([one_sample_cloud.support_radius, 0.0])
    with pytest.raises(OutOfSupport):
        normalized_weights(x, one_sample_cloud)


def test_partition_of_unity(circle3_cloud, torus_cloud):
    rng = np.random.default_rng(0)
    for cloud in (circle3_cloud, torus_cloud):
        for x in near_points(cloud, rng, 500):
            _, weights = normalized_weights(x, cloud)
            assert abs(weights.sum() - 1.0) <= 1e-12
            assert np.all(weights > 0)
