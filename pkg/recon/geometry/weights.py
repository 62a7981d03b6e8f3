"""
Compactly supported bump h and the normalized weight field ω.

h(s) = (1 - s/(mγ))^(2m) · (2s/γ + 1) on [0, mγ] and 0 beyond. The weight of
a sample p at x is h(‖x - p‖) divided by the sum over all samples.
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from recon.errors import DomainError, OutOfSupport

if TYPE_CHECKING:
    from recon.sampling.cloud import SampleCloud


@dataclass(frozen=True)
class WeightParams:
    """Intrinsic dimension m and neighborhood radius γ."""
    m: int
    gamma: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m}")
        if not self.gamma > 0 or not np.isfinite(self.gamma):
            raise DomainError(f"gamma must be positive, got {self.gamma}")

    @property
    def support_radius(self) -> float:
        return self.m * self.gamma


class WeightedNeighbors(NamedTuple):
    """Sample indices (ascending) with their normalized weights."""
    indices: np.ndarray
    weights: np.ndarray


def bump(s, params: WeightParams):
    """
    Evaluate h at one distance or an array of distances.

    Raises:
        DomainError: any distance is negative
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0) or np.any(np.isnan(s_arr)):
        raise DomainError("bump is only defined for nonnegative distances")

    radius = params.support_radius
    inside = s_arr <= radius
    t = np.where(inside, 1.0 - s_arr / radius, 0.0)
    values = np.where(inside, t ** (2 * params.m) * (2.0 * s_arr / params.gamma + 1.0), 0.0)

    if np.ndim(s) == 0:
        return float(values)
    return values


def normalized_weights(x, cloud: "SampleCloud") -> WeightedNeighbors:
    """
    ω(x, p) for every sample strictly inside the support radius of x.

    Raises:
        OutOfSupport: no sample lies within mγ of x
    """
    params = cloud.weight_params
    x = np.asarray(x, dtype=float)
    indices, distances = cloud.neighbors_within(x, params.support_radius)
    if len(indices) == 0:
        raise OutOfSupport("no sample within the support radius")

    h = bump(distances, params)
    total = h.sum()
    if total <= 0.0:
        raise OutOfSupport("all neighbor weights vanish")
    return WeightedNeighbors(indices, h / total)
