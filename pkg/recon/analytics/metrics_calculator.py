"""
Metrics Calculator
Measures how faithfully the zero set of φ reconstructs a known manifold.
"""

import math
import warnings
from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from recon.config import Config
from recon.console import status
from recon.errors import DomainError, InsufficientData, MedialAxis, ReliabilityWarning
from recon.field.implicit_fn import evaluate_many
from recon.field.projector import (
    ProjectionOptions,
    ProjectionTrace,
    contraction_factor,
    project_many,
)
from recon.geometry.linalg import complement_frame, subspace_angle
from recon.manifolds.manifold_zoo import SyntheticManifold
from recon.sampling.cloud import SampleCloud

# seeds for the convergence run sit at most this fraction of mγ from M
SEED_OFFSET = 0.5
# tolerated share of non-converged projections before results are flagged
RELIABILITY_SHARE = 0.01

_NORMAL_STREAM, _SURFACE_STREAM, _SEED_STREAM, _INJECTIVITY_STREAM, _TANGENT_STREAM = range(5)


@dataclass
class FidelityReport:
    """Empirical counterparts of the reconstruction guarantees for one cloud."""
    eps: float
    max_normal_angle: float
    mean_normal_angle: float
    hausdorff_M_to_Z: Optional[float]
    hausdorff_Z_to_M: Optional[float]
    zero_offset_max: Optional[float]
    contraction_median: Optional[float]
    n_test_points: int
    n_seeds: int
    drift_max: Optional[float] = None
    first_iterate_offset_max: Optional[float] = None
    max_iterations: int = 0
    non_converged: int = 0
    excluded_points: int = 0
    limits_outside_offset: int = 0
    injectivity_min_distance: Optional[float] = None

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, record: Dict) -> "FidelityReport":
        known = {f.name for f in fields(cls)}
        missing = {"eps", "max_normal_angle", "n_test_points"} - set(record)
        if missing:
            raise DomainError(f"report is missing {', '.join(sorted(missing))}")
        return cls(**{k: v for k, v in record.items() if k in known})


def _max_or_none(values) -> Optional[float]:
    values = np.asarray(values, dtype=float)
    return float(values.max()) if values.size else None


class MetricsCalculator:
    """Fidelity metrics of a sample cloud against the manifold it was drawn from."""

    def __init__(self, cloud: SampleCloud, manifold: SyntheticManifold, seed: Optional[int] = None,
                 opts: Optional[ProjectionOptions] = None, threads: Optional[int] = None):
        if cloud.d != manifold.ambient_dim or cloud.m != manifold.intrinsic_dim:
            raise DomainError(
                f"cloud (d={cloud.d}, m={cloud.m}) does not match manifold "
                f"(d={manifold.ambient_dim}, m={manifold.intrinsic_dim})"
            )
        if cloud.size == 0:
            raise DomainError("cannot measure an empty cloud")

        self.cloud = cloud
        self.manifold = manifold
        self.seed = Config.SEED if seed is None else int(seed)
        self.opts = opts or ProjectionOptions()
        self.threads = threads or Config.THREADS
        self._surface_runs: Dict[int, Tuple[np.ndarray, List[ProjectionTrace]]] = {}

        # every test point and its neighborhood stay inside the sampled patch
        margin = (1.0 + SEED_OFFSET) * cloud.support_radius + 2.0 * cloud.eps
        self.test_box = manifold.interior_box(cloud.region, margin)
        status(f"Metrics Calculator initialized ({manifold.kind}, eps={cloud.eps}, |P|={cloud.size})")

    def _rng(self, stream: int) -> np.random.Generator:
        return np.random.default_rng([self.seed & 0xFFFFFFFFFFFFFFFF, stream])

    def _surface_points(self, rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
        U = self.manifold.random_params(rng, n, self.test_box)
        return U, self.manifold.embed_many(U)

    def _nearest(self, x) -> Optional[np.ndarray]:
        try:
            return self.manifold.nearest_point(x)
        except MedialAxis:
            return None

    # ------------------------------------------------------------------
    # Normal space accuracy
    # ------------------------------------------------------------------

    def normal_angle_error(self, n_points: int, offset: Optional[float] = None) -> Dict:
        """
        Angle between the estimated normal space L_x and the true normal
        space at ν(x), over random x within `offset` (default ε) of M.

        Returns:
            {"max", "mean", "n_points", "excluded"}
        """
        offset = self.cloud.eps if offset is None else offset
        if not 0.0 <= offset <= self.cloud.eps:
            raise DomainError(f"offset must lie in [0, eps], got {offset}")
        status(f"  → Calculating normal angle error ({n_points} points within {offset:.4g} of M)...")

        rng = self._rng(_NORMAL_STREAM)
        U, Z = self._surface_points(rng, n_points)
        T = self.manifold.frames_at_params(U)
        direction = rng.standard_normal(Z.shape)
        direction -= np.einsum("nij,nj->ni", T, np.einsum("nij,ni->nj", T, direction))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        X = Z + direction * (offset * rng.random(n_points))[:, None]

        angles, excluded = [], 0
        for x, result in zip(X, evaluate_many(X, self.cloud, self.threads)):
            nu = self._nearest(x) if result.in_support else None
            if nu is None:
                excluded += 1
                continue
            normal = complement_frame(self.manifold.tangent_frames(nu[None, :])[0])
            angles.append(subspace_angle(result.normal_frame, normal))

        if not angles:
            raise InsufficientData("no test point was inside the support")
        angles = np.array(angles)
        status(f"    ✓ Normal angle: max {angles.max():.4g} rad, mean {angles.mean():.4g} rad")
        if excluded:
            status(f"    ⚠ {excluded} test point(s) excluded")
        return {"max": float(angles.max()), "mean": float(angles.mean()),
                "n_points": len(angles), "excluded": excluded}

    # ------------------------------------------------------------------
    # Zero set location
    # ------------------------------------------------------------------

    def _surface_projections(self, n: int) -> Tuple[np.ndarray, List[ProjectionTrace]]:
        # shared by hausdorff_upper and zero_offset
        if n not in self._surface_runs:
            _, Z = self._surface_points(self._rng(_SURFACE_STREAM), n)
            status(f"  → Projecting {n} manifold points...")
            self._surface_runs[n] = (Z, project_many(Z, self.cloud, self.opts, self.threads))
        return self._surface_runs[n]

    def _check_reliability(self, failures: int, total: int, what: str):
        if total and failures > RELIABILITY_SHARE * total:
            warnings.warn(f"{failures} of {total} {what} did not converge", ReliabilityWarning, stacklevel=3)

    def hausdorff_upper(self, n_seeds: int) -> Dict:
        """
        Directed Hausdorff estimates between M and the zero set.

        M → Z_φ is the largest distance from a manifold point to its projector
        limit; Z_φ → M is the largest distance from a limit to M. Only
        converged limits count. Limits farther than ε from M are counted in
        `limits_outside_offset`.

        Returns:
            {"M_to_Z", "Z_to_M", "n_seeds", "non_converged", "limits_outside_offset"}
        """
        if n_seeds < 1:
            raise DomainError("n_seeds must be positive")
        Z, traces = self._surface_projections(n_seeds)

        landing, off_manifold = [], []
        for z, trace in zip(Z, traces):
            if not trace.converged:
                continue
            nu = self._nearest(trace.limit)
            if nu is None:
                continue
            landing.append(np.linalg.norm(trace.limit - z))
            off_manifold.append(np.linalg.norm(trace.limit - nu))

        non_converged = sum(not t.converged for t in traces)
        self._check_reliability(non_converged, n_seeds, "projections")
        outside = int(np.sum(np.asarray(off_manifold) > self.cloud.eps))

        report = {
            "M_to_Z": _max_or_none(landing),
            "Z_to_M": _max_or_none(off_manifold),
            "n_seeds": n_seeds,
            "non_converged": non_converged,
            "limits_outside_offset": outside,
        }
        status(f"    ✓ Hausdorff M→Z {report['M_to_Z']}, Z→M {report['Z_to_M']}")
        return report

    def zero_offset(self, n_points: int) -> Dict:
        """
        Distance from manifold points to the zero found by projecting them.

        Returns:
            {"offsets": per converged point, "max", "excluded"}
        """
        if n_points < 1:
            raise DomainError("n_points must be positive")
        Z, traces = self._surface_projections(n_points)
        offsets = np.array([np.linalg.norm(t.limit - z) for z, t in zip(Z, traces) if t.converged])
        excluded = n_points - len(offsets)
        status(f"    ✓ Zero offset max: {_max_or_none(offsets)}")
        return {"offsets": offsets, "max": _max_or_none(offsets), "excluded": excluded}

    # ------------------------------------------------------------------
    # Projector behavior
    # ------------------------------------------------------------------

    def convergence_seeds(self, n_seeds: int) -> np.ndarray:
        """Points of M moved by a random offset of length at most SEED_OFFSET·mγ."""
        rng = self._rng(_SEED_STREAM)
        _, Z = self._surface_points(rng, n_seeds)
        direction = rng.standard_normal(Z.shape)
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = SEED_OFFSET * self.cloud.support_radius * rng.random(n_seeds)
        return Z + direction * radius[:, None]

    def convergence(self, n_seeds: int) -> Tuple[List[ProjectionTrace], Dict, Dict]:
        """
        Project off-manifold seeds.

        Returns:
            (traces, convergence_report, drift_report)
        """
        status(f"  → Projecting {n_seeds} off-manifold seeds...")
        traces = project_many(self.convergence_seeds(n_seeds), self.cloud, self.opts, self.threads)
        summary = convergence_report(traces, self.opts.residual_tol)
        self._check_reliability(summary["failures"], n_seeds, "seeds")
        status(f"    ✓ Median contraction {summary['contraction_median']}, "
               f"max iterations {summary['max_iterations']}, failures {summary['failures']}")
        return traces, summary, drift_report(traces, self.manifold)

    def injectivity_check(self, n_points: int) -> Dict:
        """
        Project manifold points pairwise at least ε/2 apart and report how
        close their limits come to each other.

        Returns:
            {"min_limit_distance", "min_seed_distance", "n_points", "distinct"}
        """
        status(f"  → Checking injectivity on {n_points} points...")
        separation = 0.5 * self.cloud.eps
        rng = self._rng(_INJECTIVITY_STREAM)

        chosen: List[np.ndarray] = []
        for _ in range(100):
            _, Z = self._surface_points(rng, 4 * n_points)
            for z in Z:
                if len(chosen) == n_points:
                    break
                if not chosen or cKDTree(chosen).query(z)[0] >= separation:
                    chosen.append(z)
            if len(chosen) == n_points:
                break
        if len(chosen) < 2:
            raise InsufficientData("could not place two well-separated points")

        seeds = np.array(chosen)
        traces = project_many(seeds, self.cloud, self.opts, self.threads)
        limits = np.array([t.limit for t in traces if t.converged])
        min_limit = float(pdist(limits).min()) if len(limits) > 1 else None
        result = {
            "min_limit_distance": min_limit,
            "min_seed_distance": float(pdist(seeds).min()),
            "n_points": len(seeds),
            "distinct": min_limit is not None and min_limit >= 0.25 * self.cloud.eps,
        }
        status(f"    ✓ Closest limits {min_limit}")
        return result

    # ------------------------------------------------------------------
    # Full suite
    # ------------------------------------------------------------------

    def calculate_fidelity(self, n_points: int = 200, n_seeds: int = 100,
                           injectivity_points: int = 0) -> FidelityReport:
        """
        Run every metric and collect the results.

        Args:
            n_points: test points for the normal angle error
            n_seeds: manifold points projected for the Hausdorff and
                convergence measurements
            injectivity_points: points for the injectivity check; 0 skips it
        """
        if n_points < 1 or n_seeds < 1:
            raise DomainError("n_points and n_seeds must be positive")
        status(f"\nCalculating fidelity for eps={self.cloud.eps}")

        angles = self.normal_angle_error(n_points)
        hausdorff = self.hausdorff_upper(n_seeds)
        offsets = self.zero_offset(n_seeds)
        _, summary, drift = self.convergence(n_seeds)
        injectivity = self.injectivity_check(injectivity_points) if injectivity_points else None

        return FidelityReport(
            eps=self.cloud.eps,
            max_normal_angle=angles["max"],
            mean_normal_angle=angles["mean"],
            hausdorff_M_to_Z=hausdorff["M_to_Z"],
            hausdorff_Z_to_M=hausdorff["Z_to_M"],
            zero_offset_max=offsets["max"],
            contraction_median=summary["contraction_median"],
            n_test_points=angles["n_points"],
            n_seeds=n_seeds,
            drift_max=drift["drift_max"],
            first_iterate_offset_max=drift["first_iterate_offset_max"],
            max_iterations=summary["max_iterations"],
            non_converged=hausdorff["non_converged"] + summary["failures"],
            excluded_points=angles["excluded"],
            limits_outside_offset=hausdorff["limits_outside_offset"],
            injectivity_min_distance=injectivity["min_limit_distance"] if injectivity else None,
        )


def convergence_report(traces: Sequence[ProjectionTrace], residual_tol: Optional[float] = None) -> Dict:
    """
    Aggregate contraction factors over traces. Traces too short to measure
    are skipped; with none left the median is None.
    """
    factors = []
    for trace in traces:
        try:
            factors.append(contraction_factor(trace, residual_tol))
        except InsufficientData:
            continue

    return {
        "contraction_median": float(np.median(factors)) if factors else None,
        "measured": len(factors),
        "max_iterations": max((t.iterations for t in traces), default=0),
        "failures": sum(not t.converged for t in traces),
        "n_traces": len(traces),
    }


def drift_report(traces: Sequence[ProjectionTrace], manifold: SyntheticManifold) -> Dict:
    """
    How far iterates wander from the manifold point nearest their seed:
    ‖x_1 - ν(x_0)‖ and the largest ‖x_i - ν(x_0)‖ for i >= 1.
    """
    first, worst = [], []
    for trace in traces:
        if trace.iterations < 1:
            continue
        try:
            nu = manifold.nearest_point(trace.iterates[0])
        except MedialAxis:
            continue
        distances = np.linalg.norm(trace.iterates[1:] - nu, axis=1)
        first.append(distances[0])
        worst.append(distances.max())

    return {"first_iterate_offset_max": _max_or_none(first), "drift_max": _max_or_none(worst),
            "measured": len(worst)}


def tangent_sanity(manifold: SyntheticManifold, n_pairs: int = 1000, xi_max: float = 0.1,
                   seed: Optional[int] = None) -> Dict:
    """
    Check two unit-reach facts on random pairs y, z of M with ‖y - z‖ = ξ:
    dist(y, z + T_z) <= ξ²/2 and ∠(N_y, N_z) <= 4ξ.

    Returns:
        worst excess over each bound (negative when it holds with room)
    """
    if not 0.0 < xi_max <= 0.5:
        raise DomainError(f"xi_max must lie in (0, 0.5], got {xi_max}")
    if manifold.reach < 1.0 - 1e-9:
        raise DomainError("tangent sanity needs a unit-reach manifold")

    rng = np.random.default_rng([Config.SEED if seed is None else int(seed), _TANGENT_STREAM])
    m = manifold.intrinsic_dim
    U = manifold.random_params(rng, n_pairs)
    direction = rng.standard_normal((n_pairs, m))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    # ‖Δembed‖ <= Σ_j |δ_j|·speed_j <= xi_max
    step = direction * (xi_max * rng.random(n_pairs) / math.sqrt(m))[:, None] / np.array(manifold.max_speed)
    V = U + step

    Z, Y = manifold.embed_many(U), manifold.embed_many(V)
    Tz, Ty = manifold.frames_at_params(U), manifold.frames_at_params(V)
    xi = np.linalg.norm(Y - Z, axis=1)

    D = Y - Z
    off_tangent = np.linalg.norm(D - np.einsum("nij,nj->ni", Tz, np.einsum("nij,ni->nj", Tz, D)), axis=1)
    normal_angles = np.array([subspace_angle(complement_frame(a), complement_frame(b)) for a, b in zip(Ty, Tz)])

    tangent_excess = float(np.max(off_tangent - xi ** 2 / 2.0))
    normal_excess = float(np.max(normal_angles - 4.0 * xi))
    return {
        "n_pairs": n_pairs,
        "xi_max": float(xi.max()),
        "tangent_excess": tangent_excess,
        "normal_excess": normal_excess,
        "pass": tangent_excess <= 1e-9 and normal_excess <= 1e-9,
    }
