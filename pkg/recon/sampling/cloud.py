"""
Sample cloud: points of P with per-point tangent frames and sampling metadata.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from recon.errors import DomainError
from recon.geometry.linalg import FRAME_TOL
from recon.geometry.weights import WeightParams

FRAME_MODES = ("exact", "perturbed", "pca")


@dataclass(frozen=True, eq=False)
class SampleCloud:
    """
    Uniform (ε, κ)-sample with approximate tangent frames.

    Attributes:
        points: (n, d) sample positions
        frames: (n, d, m) orthonormal tangent frames T_p
        m: intrinsic dimension
        eps: sampling density ε; the neighborhood radius is γ = 4ε
        kappa_measured: largest sample count seen in an ε-ball
        frame_mode: how the frames were produced (exact, perturbed, pca)
        frame_param: max angle for perturbed frames, radius for pca frames
        seed: seed of the generating random stream
        region: parameter box the sample was restricted to, if any
    """
    points: np.ndarray
    frames: np.ndarray
    m: int
    eps: float
    kappa_measured: int = 0
    frame_mode: str = "exact"
    frame_param: Optional[float] = None
    seed: int = 0
    region: Optional[Tuple[Tuple[float, float], ...]] = field(default=None)

    def __post_init__(self):
        points = np.ascontiguousarray(self.points, dtype=float)
        if points.ndim != 2:
            raise DomainError(f"points must be an (n, d) array, got shape {points.shape}")
        n, d = points.shape
        frames = np.ascontiguousarray(self.frames, dtype=float).reshape(n, d, self.m)

        if not self.eps > 0 or not np.isfinite(self.eps):
            raise DomainError(f"eps must be positive, got {self.eps}")
        if not 1 <= self.m < d:
            raise DomainError(f"need 1 <= m < d, got m={self.m}, d={d}")
        if self.frame_mode not in FRAME_MODES:
            raise DomainError(f"unknown frame mode '{self.frame_mode}'")
        if not np.all(np.isfinite(points)):
            raise DomainError("points contain non-finite values")
        if n:
            gram = np.einsum("nij,nik->njk", frames, frames) - np.eye(self.m)
            if np.max(np.abs(gram)) > FRAME_TOL:
                raise DomainError("tangent frames must have orthonormal columns")

        points.setflags(write=False)
        frames.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "frames", frames)
        if self.region is not None:
            object.__setattr__(self, "region", tuple((float(lo), float(hi)) for lo, hi in self.region))

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def gamma(self) -> float:
        return 4.0 * self.eps

    @property
    def weight_params(self) -> WeightParams:
        return WeightParams(self.m, self.gamma)

    @property
    def support_radius(self) -> float:
        return self.m * self.gamma

    @cached_property
    def index(self) -> cKDTree:
        return cKDTree(self.points)

    def neighbors_within(self, x, radius: float) -> Tuple[np.ndarray, np.ndarray]:
        """
        Samples strictly closer than `radius` to x.

        Returns:
            (ascending indices, distances)
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise DomainError(f"expected a point in R^{self.d}, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise DomainError(f"query point has non-finite coordinates: {x.tolist()}")
        if self.size == 0:
            return np.empty(0, dtype=np.intp), np.empty(0)

        # slightly widened query, then the exact strict test
        found = np.sort(np.asarray(self.index.query_ball_point(x, radius * (1.0 + 1e-12)), dtype=np.intp))
        distances = np.linalg.norm(self.points[found] - x, axis=1)
        keep = distances < radius
        return found[keep], distances[keep]

    def with_frames(self, frames: np.ndarray, mode: str, param: Optional[float] = None) -> "SampleCloud":
        return replace(self, frames=frames, frame_mode=mode, frame_param=param)

    def subset(self, indices: Sequence[int]) -> "SampleCloud":
        """Cloud restricted to the given samples, relative order preserved."""
        keep = np.sort(np.asarray(indices, dtype=np.intp))
        return replace(self, points=self.points[keep], frames=self.frames[keep])

    def to_record(self) -> Dict:
        return {
            "d": self.d,
            "m": self.m,
            "eps": self.eps,
            "gamma": self.gamma,
            "kappa_measured": self.kappa_measured,
            "frame_mode": self.frame_mode,
            "frame_param": self.frame_param,
            "seed": self.seed,
            "region": [list(b) for b in self.region] if self.region is not None else None,
            "points": self.points.tolist(),
            "frames": self.frames.reshape(self.size, -1).tolist(),
        }

    @classmethod
    def from_record(cls, record: Dict) -> "SampleCloud":
        try:
            d, m, eps = int(record["d"]), int(record["m"]), float(record["eps"])
            if float(record["gamma"]) != 4.0 * eps:
                raise DomainError("cloud record breaks gamma = 4·eps")
            points = np.array(record["points"], dtype=float).reshape(-1, d)
            frames = np.array(record["frames"], dtype=float).reshape(points.shape[0], d, m)
            return cls(
                points=points,
                frames=frames,
                m=m,
                eps=eps,
                kappa_measured=int(record.get("kappa_measured", 0)),
                frame_mode=record.get("frame_mode", "exact"),
                frame_param=record.get("frame_param"),
                seed=int(record.get("seed", 0)),
                region=record.get("region"),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, DomainError):
                raise
            raise DomainError(f"malformed cloud record: {e}") from e
