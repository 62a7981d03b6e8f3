"""
The implicit field φ.

At a query point x the samples within mγ are weighted by ω, their tangent
projectors are averaged into C_x, and the (d - m) least dominant eigenvectors
of C_x span the approximate normal space L_x. With B an orthonormal basis of
L_x and a_x the ω-weighted centroid of the samples,

    φ(x) = Bᵗ (x - a_x).

φ is zero wherever no sample lies strictly within mγ of x.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, NamedTuple, Optional

import numpy as np

from recon.config import Config
from recon.errors import DegenerateSpectrum, DomainError, OutOfSupport
from recon.geometry.linalg import sym_eig
from recon.geometry.weights import normalized_weights
from recon.sampling.cloud import SampleCloud


class SupportStatus(str, Enum):
    IN_SUPPORT = "InSupport"
    OUT_OF_SUPPORT = "OutOfSupport"


class NormalSplit(NamedTuple):
    normal_frame: np.ndarray
    tangent_frame: np.ndarray
    eigenvalues: np.ndarray
    spectral_gap: float
    degenerate: bool


@dataclass(frozen=True, eq=False)
class EvalResult:
    """φ(x) together with everything computed on the way."""
    phi: np.ndarray
    status: SupportStatus
    normal_frame: Optional[np.ndarray] = None
    tangent_frame: Optional[np.ndarray] = None
    eigenvalues: Optional[np.ndarray] = None
    centroid: Optional[np.ndarray] = None
    spectral_gap: float = 0.0
    neighbor_count: int = 0

    @property
    def in_support(self) -> bool:
        return self.status is SupportStatus.IN_SUPPORT

    @property
    def phi_norm(self) -> float:
        return float(np.linalg.norm(self.phi))

    def to_record(self) -> Dict:
        def listed(a):
            return None if a is None else a.tolist()

        return {
            "status": self.status.value,
            "phi": self.phi.tolist(),
            "phi_norm": self.phi_norm,
            "spectral_gap": self.spectral_gap,
            "eigenvalues": listed(self.eigenvalues),
            "centroid": listed(self.centroid),
            "neighbor_count": self.neighbor_count,
        }


def neighbors(x, cloud: SampleCloud) -> np.ndarray:
    """Indices of the samples strictly closer than mγ to x, ascending."""
    indices, _ = cloud.neighbors_within(np.asarray(x, dtype=float), cloud.support_radius)
    return indices


def _covariance(cloud: SampleCloud, indices: np.ndarray, weights: np.ndarray) -> np.ndarray:
    T = cloud.frames[indices]
    C = np.einsum("n,nij,nkj->ik", weights, T, T)
    return 0.5 * (C + C.T)


def assemble_covariance(x, cloud: SampleCloud) -> np.ndarray:
    """
    C_x = Σ ω(x, p) T_p T_pᵗ.

    Raises:
        OutOfSupport: no sample within mγ of x
    """
    indices, weights = normalized_weights(x, cloud)
    return _covariance(cloud, indices, weights)


def local_normal_frame(C: np.ndarray, m: int, gap_warning: Optional[float] = None) -> NormalSplit:
    """
    Split the spectrum of C into its (d - m) least dominant eigenvectors
    (the normal frame B) and m most dominant ones (the tangent frame A).

    The spectral gap is λ_{d-m+1} - λ_{d-m} in ascending 1-based order. A gap
    below `gap_warning` (Config.GAP_WARNING by default) raises a
    DegenerateSpectrum warning and sets `degenerate`.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {C.shape}")
    d = C.shape[0]
    if not 1 <= m < d:
        raise DomainError(f"need 1 <= m < d, got m={m}, d={d}")
    if np.max(np.abs(C - C.T)) > 1e-12 * max(1.0, float(np.max(np.abs(C)))):
        raise DomainError("covariance matrix is not symmetric")

    eigenvalues, V = sym_eig(C)
    k = d - m
    gap = float(eigenvalues[k] - eigenvalues[k - 1])
    threshold = Config.GAP_WARNING if gap_warning is None else gap_warning
    degenerate = gap < threshold
    if degenerate:
        warnings.warn(f"spectral gap {gap:.3g} below {threshold}", DegenerateSpectrum, stacklevel=2)
    return NormalSplit(V[:, :k], V[:, k:], eigenvalues, gap, degenerate)


def evaluate(x, cloud: SampleCloud) -> EvalResult:
    """
    Evaluate φ at x.

    Returns:
        EvalResult; OutOfSupport (with φ = 0) when no sample is within mγ
    """
    x = np.asarray(x, dtype=float)
    try:
        indices, weights = normalized_weights(x, cloud)
    except OutOfSupport:
        return EvalResult(phi=np.zeros(cloud.d - cloud.m), status=SupportStatus.OUT_OF_SUPPORT)

    centroid = weights @ cloud.points[indices]
    split = local_normal_frame(_covariance(cloud, indices, weights), cloud.m)
    phi = split.normal_frame.T @ (x - centroid)

    return EvalResult(
        phi=phi,
        status=SupportStatus.IN_SUPPORT,
        normal_frame=split.normal_frame,
        tangent_frame=split.tangent_frame,
        eigenvalues=split.eigenvalues,
        centroid=centroid,
        spectral_gap=split.spectral_gap,
        neighbor_count=len(indices),
    )


def evaluate_family_member(x, cloud: SampleCloud, mixing: np.ndarray) -> np.ndarray:
    """
    ϱ(x) = (B G)ᵗ (x - a_x) for an invertible (d - m) x (d - m) matrix G.

    Any basis of L_x defines a function with the same zero set as φ; G picks
    one of them.
    """
    G = np.asarray(mixing, dtype=float)
    k = cloud.d - cloud.m
    if G.shape != (k, k):
        raise DomainError(f"mixing matrix must be {k} x {k}, got {G.shape}")
    if np.linalg.matrix_rank(G) < k:
        raise DomainError("mixing matrix is singular")

    result = evaluate(x, cloud)
    if not result.in_support:
        return np.zeros(k)
    return (result.normal_frame @ G).T @ (np.asarray(x, dtype=float) - result.centroid)


def evaluate_many(points, cloud: SampleCloud, threads: Optional[int] = None) -> List[EvalResult]:
    """Evaluate φ at many points; results follow input order."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    threads = threads or Config.THREADS
    if threads <= 1:
        return [evaluate(x, cloud) for x in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda x: evaluate(x, cloud), points))
