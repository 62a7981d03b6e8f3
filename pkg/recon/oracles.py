"""
Brute-force reference implementations.

Slow, independent versions of the eigensolver, subspace angle, nearest-point
map and neighbor search, used by the test suite to cross-check the fast
ones. Nothing here calls into the routines it checks.
"""

import math
from typing import List, Optional

import numpy as np

from recon.errors import DomainError
from recon.geometry.linalg import SymmetricSpectrum
from recon.manifolds.manifold_zoo import SyntheticManifold
from recon.sampling.cloud import SampleCloud

JACOBI_TOL = 1e-12
MAX_SWEEPS = 100


def jacobi_eig(C) -> SymmetricSpectrum:
    """
    Cyclic Jacobi rotations until the off-diagonal Frobenius norm is at most
    1e-12 (relative to the matrix norm when that exceeds 1).

    Eigenvalues ascend; each eigenvector has its largest-magnitude entry
    positive.
    """
    A = np.array(C, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = max(1.0, float(np.sqrt(np.sum(A * A))))

    for _ in range(MAX_SWEEPS):
        off = math.sqrt(float(np.sum((A - np.diag(np.diag(A))) ** 2)))
        if off <= JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                for k in range(n):
                    akp, akq = A[k, p], A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk, aqk = A[p, k], A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp, vkq = V[k, p], V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq

    order = sorted(range(n), key=lambda i: A[i, i])
    values = np.array([A[i, i] for i in order])
    vectors = V[:, order]
    for j in range(n):
        lead = max(range(n), key=lambda i: abs(vectors[i, j]))
        if vectors[lead, j] < 0:
            vectors[:, j] = -vectors[:, j]
    return SymmetricSpectrum(values, vectors)


def sampled_angle(U, V, n_dirs: int = 10_000, seed: int = 0) -> float:
    """
    Largest angle between a direction of col U and its projection onto
    col V, maximized over n_dirs random unit directions of col U.
    """
    if n_dirs < 10_000:
        raise DomainError("sampled_angle needs at least 10^4 directions")
    U = np.asarray(U, dtype=float).reshape(len(U), -1)
    V = np.asarray(V, dtype=float).reshape(len(V), -1)
    rng = np.random.default_rng(seed)

    directions = rng.standard_normal((U.shape[1], n_dirs))
    vectors = U @ directions
    vectors /= np.sqrt(np.sum(vectors * vectors, axis=0))
    inside = V @ (V.T @ vectors)
    along = np.sqrt(np.sum(inside * inside, axis=0))
    across = np.sqrt(np.sum((vectors - inside) ** 2, axis=0))
    return float(np.max(np.arctan2(across, along)))


def grid_nearest(manifold: SyntheticManifold, x, grid_density: int = 1000,
                 refinements: int = 8) -> np.ndarray:
    """
    Nearest point of M to x found by exhaustive search over a parameter grid
    with grid_density points per intrinsic dimension, followed by zoomed-in
    grids around the best point.
    """
    if grid_density < 1000:
        raise DomainError("grid_density must be at least 10^3 per dimension")
    x = np.asarray(x, dtype=float)
    box = manifold.param_box()
    m = len(box)
    # curves get a finer grid so every kind starts from about 10^6 points
    per_dim = max(grid_density, int(round(1e6 ** (1.0 / m))))

    axes = [np.linspace(lo, hi, per_dim) for lo, hi in box]
    spacing = [(hi - lo) / (per_dim - 1) for lo, hi in box]
    best = _grid_argmin(manifold, x, axes)

    for _ in range(refinements):
        axes = [np.linspace(u - 2.0 * h, u + 2.0 * h, 41) for u, h in zip(best, spacing)]
        spacing = [h / 10.0 for h in spacing]
        best = _grid_argmin(manifold, x, axes)

    return manifold.embed(best)


def _grid_argmin(manifold: SyntheticManifold, x: np.ndarray, axes: List[np.ndarray]) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing="ij")
    U = np.column_stack([g.ravel() for g in mesh])
    best_u: Optional[np.ndarray] = None
    best_d = math.inf
    for start in range(0, len(U), 250_000):
        chunk = U[start:start + 250_000]
        d2 = np.sum((manifold.embed_many(chunk) - x) ** 2, axis=1)
        i = int(np.argmin(d2))
        if d2[i] < best_d:
            best_d, best_u = float(d2[i]), chunk[i]
    return best_u


def scan_neighbors(x, cloud: SampleCloud) -> np.ndarray:
    """Indices of samples strictly closer than mγ to x, by linear scan."""
    radius = cloud.m * (4.0 * cloud.eps)
    x = [float(v) for v in np.asarray(x).ravel()]
    found = [i for i, p in enumerate(cloud.points.tolist()) if math.dist(p, x) < radius]
    return np.array(found, dtype=np.intp)
