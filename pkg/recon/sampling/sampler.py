"""
Sample Generator
Builds uniform (ε, κ)-samples of synthetic manifolds and attaches tangent
frames (exact, perturbed within an angular budget, or estimated by local PCA).
"""

import math
import warnings
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from recon.config import Config
from recon.console import status
from recon.errors import DegenerateSample, DomainError, InsufficientNeighbors
from recon.geometry.linalg import subspace_angle, sym_eig
from recon.manifolds.manifold_zoo import SyntheticManifold
from recon.sampling.cloud import SampleCloud

# accepted samples are pairwise farther apart than this fraction of eps
SEPARATION = 0.75
# candidate grid covering radius as a fraction of eps
CANDIDATE_COVER = 0.2
MAX_CANDIDATES = 5_000_000


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, stream])


def _greedy_disk(points: np.ndarray, order: np.ndarray, radius: float,
                 blocked: Optional[np.ndarray] = None) -> np.ndarray:
    """Accept points in the given order, skipping any within `radius` of an accepted one."""
    tree = cKDTree(points)
    blocked = np.zeros(len(points), dtype=bool) if blocked is None else blocked
    chosen = []
    for i in order:
        if blocked[i]:
            continue
        chosen.append(i)
        blocked[tree.query_ball_point(points[i], radius)] = True
    return np.array(chosen, dtype=np.intp)


def measure_kappa(points: np.ndarray, eps: float, rng: np.random.Generator,
                  n_centers: Optional[int] = None) -> int:
    """
    Largest number of samples inside a closed ε-ball, over centers placed at
    random samples shifted by a random offset of length at most ε.
    """
    n_centers = n_centers or Config.KAPPA_CENTERS
    if len(points) == 0:
        return 0
    centers = _centers_near(points, eps, rng, n_centers)
    counts = cKDTree(points).query_ball_point(centers, eps, return_length=True)
    return max(int(np.max(counts)), 1)


def _centers_near(points: np.ndarray, eps: float, rng: np.random.Generator, n: int) -> np.ndarray:
    picks = points[rng.integers(0, len(points), n)]
    direction = rng.standard_normal(picks.shape)
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return picks + direction * (eps * rng.random(n))[:, None]


def check_density(cloud: SampleCloud, manifold: SyntheticManifold,
                  points_per_dim: Optional[int] = None) -> Tuple[float, np.ndarray]:
    """
    Distance from a parametric test grid on M to the nearest sample.

    Returns:
        (largest distance, grid parameters of the test points)
    """
    m = manifold.intrinsic_dim
    total = (points_per_dim or Config.DENSITY_POINTS) * m
    per_axis = int(math.ceil(total ** (1.0 / m)))
    box = list(cloud.region) if cloud.region is not None else manifold.param_box()
    spacing = [(hi - lo) / per_axis for lo, hi in box]
    U = manifold.param_grid(box, spacing)
    if cloud.size == 0:
        return math.inf, U
    dist, _ = cloud.index.query(manifold.embed_many(U))
    return float(np.max(dist)), U


def generate_sample(manifold: SyntheticManifold, eps: float, seed: Optional[int] = None,
                    region: Optional[Sequence[Tuple[float, float]]] = None) -> SampleCloud:
    """
    Generate an ε-dense sample of M with exact tangent frames.

    Candidates come from a parameter grid fine enough that every point of M
    is within 0.2ε of one. They are visited in random order and accepted when
    farther than 0.75ε from every accepted sample, which leaves the sample
    ε-dense and pairwise separated by more than ε/2.

    Args:
        manifold: ground-truth manifold
        eps: sampling density
        seed: random seed (defaults to Config.SEED)
        region: optional parameter box restricting the sample to a patch

    Returns:
        SampleCloud with exact frames and measured κ
    """
    if not (eps > 0 and math.isfinite(eps)):
        raise DomainError(f"eps must be positive, got {eps}")
    seed = Config.SEED if seed is None else int(seed)
    if eps > 0.25 * manifold.reach:
        warnings.warn(f"eps={eps} exceeds a quarter of the reach; the sample may be degenerate",
                      DegenerateSample, stacklevel=2)

    m = manifold.intrinsic_dim
    box = [tuple(b) for b in region] if region is not None else manifold.param_box()
    if len(box) != m:
        raise DomainError(f"region needs {m} intervals, got {len(box)}")
    if any(not hi > lo for lo, hi in box):
        raise DomainError("region intervals must have lo < hi")

    status(f"  → Sampling {manifold.kind} (d={manifold.ambient_dim}, m={m}) at eps={eps}...")

    spacing = [CANDIDATE_COVER * 2.0 * eps / (speed * math.sqrt(m)) for speed in manifold.max_speed]
    counts = [(hi - lo) / step for (lo, hi), step in zip(box, spacing)]
    if math.prod(c + 1 for c in counts) > MAX_CANDIDATES:
        raise DomainError("sample would be too large at this eps; restrict it with a region")

    U = manifold.param_grid(box, spacing)
    X = manifold.embed_many(U)
    rng = _rng(seed, 0)
    chosen = _greedy_disk(X, rng.permutation(len(X)), SEPARATION * eps)
    params, points = U[chosen], X[chosen]

    cloud = _with_exact_frames(manifold, params, points, eps, seed, region)
    cloud = _densify(cloud, manifold, params, rng)

    kappa = measure_kappa(cloud.points, eps, _rng(seed, 1))
    cloud = SampleCloud(points=cloud.points, frames=cloud.frames, m=m, eps=eps,
                        kappa_measured=kappa, seed=seed, region=cloud.region)

    if cloud.size < 3:
        warnings.warn(f"only {cloud.size} sample(s) generated", DegenerateSample, stacklevel=2)
    status(f"  ✓ {cloud.size} samples, kappa_measured={kappa}")
    return cloud


def _with_exact_frames(manifold, params, points, eps, seed, region) -> SampleCloud:
    frames = manifold.frames_at_params(params) if len(params) else np.empty((0, manifold.ambient_dim,
                                                                              manifold.intrinsic_dim))
    return SampleCloud(points=points, frames=frames, m=manifold.intrinsic_dim, eps=eps,
                       seed=seed, region=region)


def _densify(cloud: SampleCloud, manifold: SyntheticManifold, params: np.ndarray,
             rng: np.random.Generator, rounds: int = 10) -> SampleCloud:
    # add uncovered test-grid points until the density check passes
    for _ in range(rounds):
        worst, U = check_density(cloud, manifold)
        if worst <= cloud.eps:
            return cloud
        X = manifold.embed_many(U)
        dist, _ = cloud.index.query(X)
        uncovered = np.flatnonzero(dist > cloud.eps)
        status(f"    ⚠ {len(uncovered)} test points uncovered, densifying")
        picked = uncovered[_greedy_disk(X[uncovered], rng.permutation(len(uncovered)),
                                        SEPARATION * cloud.eps)]
        params = np.vstack([params, U[picked]])
        points = np.vstack([cloud.points, X[picked]])
        cloud = _with_exact_frames(manifold, params, points, cloud.eps, cloud.seed, cloud.region)

    worst, _ = check_density(cloud, manifold)
    if worst > cloud.eps:
        warnings.warn(f"sample is not eps-dense (worst gap {worst:.3g})", DegenerateSample, stacklevel=3)
    return cloud


def exact_frames(cloud: SampleCloud, manifold: SyntheticManifold) -> SampleCloud:
    """Replace the frames with the true tangent frames of M."""
    _check_match(cloud, manifold)
    frames = manifold.tangent_frames(cloud.points) if cloud.size else cloud.frames
    return cloud.with_frames(frames, "exact")


def frame_errors(cloud: SampleCloud, manifold: SyntheticManifold) -> np.ndarray:
    """Angle between each frame and the true tangent space at its sample."""
    _check_match(cloud, manifold)
    if cloud.size == 0:
        return np.empty(0)
    truth = manifold.tangent_frames(cloud.points)
    return np.array([subspace_angle(F, T) for F, T in zip(cloud.frames, truth)])


def perturb_frames(cloud: SampleCloud, max_angle: float, seed: Optional[int] = None) -> SampleCloud:
    """
    Rotate every frame by an independent angle drawn uniformly from
    [0, max_angle] inside a random plane spanned by one tangent and one
    normal direction of that frame.
    """
    if not 0.0 <= max_angle < math.pi / 4:
        raise DomainError(f"max_angle must lie in [0, π/4), got {max_angle}")

    rng = _rng(cloud.seed if seed is None else seed, 2)
    T = cloud.frames
    n, d, m = T.shape
    status(f"  → Perturbing {n} frames by up to {max_angle:.4g} rad...")

    t = np.einsum("nij,nj->ni", T, rng.standard_normal((n, m)))
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    g = rng.standard_normal((n, d))
    g -= np.einsum("nij,nj->ni", T, np.einsum("nij,ni->nj", T, g))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    theta = rng.uniform(0.0, max_angle, n)

    # rotation in span{t, g}: only the component of T along t moves
    along = np.einsum("ni,nij->nj", t, T)
    shift = (np.cos(theta) - 1.0)[:, None] * t + np.sin(theta)[:, None] * g
    frames = T + np.einsum("ni,nj->nij", shift, along)

    return cloud.with_frames(frames, "perturbed", float(max_angle))


def estimate_frames_pca(cloud: SampleCloud, radius: float,
                        manifold: Optional[SyntheticManifold] = None) -> SampleCloud:
    """
    Tangent frames from local PCA: at each sample, the m most dominant
    eigenvectors of the centered second-moment matrix of the samples within
    `radius`.

    Raises:
        InsufficientNeighbors: a sample has fewer than m + 1 samples within radius
    """
    if radius < 2.0 * cloud.eps:
        raise DomainError(f"radius must be at least 2·eps = {2.0 * cloud.eps}, got {radius}")

    m = cloud.m
    status(f"  → Estimating {cloud.size} frames by local PCA (radius {radius:.4g})...")
    neighborhoods = cloud.index.query_ball_point(cloud.points, radius) if cloud.size else []

    frames = np.empty_like(cloud.frames)
    for i, found in enumerate(neighborhoods):
        if len(found) < m + 1:
            raise InsufficientNeighbors(i, len(found), m + 1)
        local = cloud.points[np.sort(found)]
        centered = local - local.mean(axis=0)
        spectrum = sym_eig(centered.T @ centered)
        frames[i] = spectrum.eigenvectors[:, -m:]

    estimated = cloud.with_frames(frames, "pca", float(radius))
    if manifold is not None and cloud.size:
        status(f"  ✓ Max angular error vs exact frames: {frame_errors(estimated, manifold).max():.4g} rad")
    return estimated


def verify_packing(cloud: SampleCloud, t: float, n_centers: int = 100,
                   seed: Optional[int] = None) -> Dict:
    """
    Count samples in balls of radius t·ε around random centers within 2ε of M
    and compare with the packing bound (4t + 1)^m · κ.

    Returns:
        {"max_count", "bound", "pass"}
    """
    t_max = 1.0 / math.sqrt(2.0 * cloud.eps)
    if not 1.0 <= t <= t_max:
        raise DomainError(f"t must lie in [1, {t_max:.4g}], got {t}")

    bound = (4.0 * t + 1.0) ** cloud.m * cloud.kappa_measured
    if cloud.size == 0:
        return {"max_count": 0, "bound": bound, "pass": True}

    rng = _rng(cloud.seed if seed is None else seed, 3)
    centers = _centers_near(cloud.points, cloud.eps, rng, n_centers)
    counts = cloud.index.query_ball_point(centers, t * cloud.eps, return_length=True)
    max_count = int(np.max(counts))
    return {"max_count": max_count, "bound": bound, "pass": max_count <= bound}


def _check_match(cloud: SampleCloud, manifold: SyntheticManifold):
    if cloud.d != manifold.ambient_dim or cloud.m != manifold.intrinsic_dim:
        raise DomainError(
            f"cloud (d={cloud.d}, m={cloud.m}) does not match manifold "
            f"(d={manifold.ambient_dim}, m={manifold.intrinsic_dim})"
        )
