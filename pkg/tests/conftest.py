"""Shared fixtures: manifolds and sample clouds reused across test modules."""

import numpy as np
import pytest

from recon.config import Config
from recon.manifolds.manifold_zoo import SyntheticManifold
from recon.sampling.cloud import SampleCloud
from recon.sampling.sampler import generate_sample

Config.VERBOSE = False

TORUS_PATCH = [(0.0, 0.25), (-0.25, 0.25)]


@pytest.fixture(scope="session")
def circle2():
    return SyntheticManifold("circle", 2)


@pytest.fixture(scope="session")
def circle3():
    return SyntheticManifold("circle", 3)


@pytest.fixture(scope="session")
def torus():
    return SyntheticManifold("torus3", 3)


@pytest.fixture(scope="session")
def circle2_cloud(circle2):
    return generate_sample(circle2, 0.01, seed=7)


@pytest.fixture(scope="session")
def circle2_fine_cloud(circle2):
    return generate_sample(circle2, 0.005, seed=7)


@pytest.fixture(scope="session")
def circle3_cloud(circle3):
    return generate_sample(circle3, 0.01, seed=3)


@pytest.fixture(scope="session")
def circle3_fine_cloud(circle3):
    return generate_sample(circle3, 0.005, seed=3)


@pytest.fixture(scope="session")
def torus_cloud(torus):
    return generate_sample(torus, 0.01, seed=11, region=TORUS_PATCH)


@pytest.fixture(scope="session")
def torus_fine_cloud(torus):
    return generate_sample(torus, 0.005, seed=11, region=TORUS_PATCH)


@pytest.fixture(scope="session")
def plane():
    return SyntheticManifold("flat", 3, {"m": 2}, seed=5)


@pytest.fixture(scope="session")
def plane_cloud(plane):
    return generate_sample(plane, 0.02, seed=1, region=[(-0.5, 0.5), (-0.5, 0.5)])


@pytest.fixture(scope="session")
def line():
    return SyntheticManifold("flat", 2, {"m": 1}, seed=2)


@pytest.fixture(scope="session")
def line_cloud(line):
    return generate_sample(line, 0.01, seed=1, region=[(-0.5, 0.5)])


@pytest.fixture
def one_sample_cloud():
    """d=2, m=1: a single sample at the origin with tangent e1 (mγ = 0.04)."""
    return SampleCloud(points=np.zeros((1, 2)), frames=np.array([[[1.0], [0.0]]]), m=1, eps=0.01)


def near_points(cloud, rng, n, scale=0.5):
    """Random points within scale·mγ of random samples."""
    picks = cloud.points[rng.integers(0, cloud.size, n)]
    direction = rng.standard_normal(picks.shape)
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return picks + direction * (scale * cloud.support_radius * rng.random(n))[:, None]
