"""
Exceptions and warnings raised across the toolkit.
"""


class ReconError(Exception):
    """Base class for all toolkit errors."""


class DomainError(ReconError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class NumericError(ReconError):
    """Non-finite values reached a numerical routine."""


class RankDeficient(ReconError):
    """Vectors handed to orthonormalization are linearly dependent."""


class OutOfSupport(ReconError):
    """No sample lies strictly inside the support radius of the query point."""


class MedialAxis(ReconError):
    """The query point is too close to the medial axis to have a unique nearest point."""


class InsufficientNeighbors(ReconError):
    """Too few samples around a point to estimate its tangent frame."""

    def __init__(self, index: int, found: int, needed: int):
        self.index = index
        self.found = found
        self.needed = needed
        super().__init__(f"sample {index}: {found} neighbors, need at least {needed}")


class LeftSupport(ReconError):
    """A projection iterate has no sample within the support radius."""


class InsufficientData(ReconError):
    """Not enough trace data to compute a statistic."""


class DegenerateSample(UserWarning):
    """A generated sample is too coarse to be meaningful."""


class DegenerateSpectrum(UserWarning):
    """The covariance spectrum has no usable gap between normal and tangent parts."""


class ReliabilityWarning(UserWarning):
    """Too many projections failed for an estimate to be trusted."""
