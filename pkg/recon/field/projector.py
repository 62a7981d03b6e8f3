"""
Projection operator onto the zero set of φ.

One step moves x to the projection of a_x onto the affine subspace x + L_x:

    x' = x + B Bᵗ (a_x - x) = x - B φ(x)

so a step has length exactly ‖φ(x)‖ and x is a fixed point iff φ(x) = 0.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import numpy as np
from scipy.stats import gmean

from recon.config import Config
from recon.errors import DomainError, InsufficientData, LeftSupport
from recon.field.implicit_fn import evaluate, neighbors
from recon.sampling.cloud import SampleCloud


class ProjectionStatus(str, Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    LEFT_SUPPORT = "LeftSupport"


@dataclass(frozen=True)
class ProjectionOptions:
    max_iters: int = field(default_factory=lambda: Config.MAX_ITERS)
    step_tol: float = field(default_factory=lambda: Config.STEP_TOL)
    residual_tol: float = field(default_factory=lambda: Config.RESIDUAL_TOL)

    def __post_init__(self):
        if int(self.max_iters) != self.max_iters or self.max_iters < 0:
            raise DomainError(f"max_iters must be a nonnegative integer, got {self.max_iters}")
        if not (self.step_tol > 0 and self.residual_tol > 0):
            raise DomainError("tolerances must be positive")


@dataclass(frozen=True, eq=False)
class ProjectionTrace:
    """Iterates x_0..x_k, residuals ‖φ(x_i)‖ and how the run ended."""
    iterates: np.ndarray
    residuals: np.ndarray
    status: ProjectionStatus

    @property
    def limit(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def iterations(self) -> int:
        return len(self.iterates) - 1

    @property
    def final_residual(self) -> float:
        return float(self.residuals[-1])

    @property
    def converged(self) -> bool:
        return self.status is ProjectionStatus.CONVERGED

    def to_record(self) -> Dict:
        return {
            "status": self.status.value,
            "iterates": self.iterates.tolist(),
            "residuals": self.residuals.tolist(),
        }

    @classmethod
    def from_record(cls, record: Dict) -> "ProjectionTrace":
        return cls(
            iterates=np.array(record["iterates"], dtype=float),
            residuals=np.array(record["residuals"], dtype=float),
            status=ProjectionStatus(record["status"]),
        )


def step(x, cloud: SampleCloud) -> np.ndarray:
    """
    One application of the projection operator.

    Raises:
        LeftSupport: x has no sample within mγ
    """
    x = np.asarray(x, dtype=float)
    result = evaluate(x, cloud)
    if not result.in_support:
        raise LeftSupport("no sample within the support radius")
    B = result.normal_frame
    return x + B @ (B.T @ (result.centroid - x))


def project(x0, cloud: SampleCloud, opts: Optional[ProjectionOptions] = None) -> ProjectionTrace:
    """
    Iterate the projection operator from x0.

    Stops when ‖φ‖ drops to residual_tol, the last step was at most step_tol,
    the iteration budget is spent, or an iterate leaves the support. A
    residual is recorded for every iterate (0 for one outside the support,
    where φ vanishes by definition).

    Raises:
        DomainError: x0 has no sample within mγ
    """
    opts = opts or ProjectionOptions()
    x = np.asarray(x0, dtype=float)
    if len(neighbors(x, cloud)) == 0:
        raise DomainError("starting point has no sample within the support radius")

    iterates = [x]
    residuals = []
    last_step = math.inf
    status = ProjectionStatus.MAX_ITERS

    for it in range(opts.max_iters + 1):
        result = evaluate(x, cloud)
        if not result.in_support:
            residuals.append(0.0)
            status = ProjectionStatus.LEFT_SUPPORT
            break

        residual = result.phi_norm
        residuals.append(residual)
        if residual <= opts.residual_tol or last_step <= opts.step_tol:
            status = ProjectionStatus.CONVERGED
            break
        if it == opts.max_iters:
            break

        B = result.normal_frame
        x_next = x + B @ (B.T @ (result.centroid - x))
        last_step = float(np.linalg.norm(x_next - x))
        iterates.append(x_next)
        x = x_next

    return ProjectionTrace(np.array(iterates), np.array(residuals), status)


def project_many(seeds, cloud: SampleCloud, opts: Optional[ProjectionOptions] = None,
                 threads: Optional[int] = None) -> List[ProjectionTrace]:
    """
    Project every seed; results follow input order.

    A seed with no sample within mγ yields a one-point LeftSupport trace.
    """
    seeds = np.asarray(seeds, dtype=float).reshape(-1, cloud.d)
    opts = opts or ProjectionOptions()

    def run(x):
        if len(neighbors(x, cloud)) == 0:
            return ProjectionTrace(x[None, :].copy(), np.zeros(1), ProjectionStatus.LEFT_SUPPORT)
        return project(x, cloud, opts)

    threads = threads or Config.THREADS
    if threads <= 1:
        return [run(x) for x in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, seeds))


def contraction_factor(trace: ProjectionTrace, residual_tol: Optional[float] = None) -> float:
    """
    Geometric mean of successive residual ratios ‖φ(x_{i+1})‖ / ‖φ(x_i)‖ for
    i >= 1, over the leading run of residuals above residual_tol.

    Raises:
        InsufficientData: fewer than three such residuals
    """
    tol = Config.RESIDUAL_TOL if residual_tol is None else residual_tol
    residuals = np.asarray(trace.residuals, dtype=float)
    above = residuals > tol
    run_length = len(residuals) if above.all() else int(np.argmin(above))
    if run_length < 3:
        raise InsufficientData(f"need 3 residuals above {tol}, got {run_length}")

    tail = residuals[1:run_length]
    return float(gmean(tail[1:] / tail[:-1]))
