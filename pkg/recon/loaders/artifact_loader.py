"""
Artifact Loader
Reads and writes run artifacts: clouds, manifold descriptors, traces and
reports as JSON, projected points as CSV.
"""

import json
from pathlib import Path
from typing import Dict, List, Sequence, Union

import pandas as pd

from recon.analytics.metrics_calculator import FidelityReport
from recon.console import status
from recon.errors import DomainError
from recon.field.projector import ProjectionTrace
from recon.manifolds.manifold_zoo import SyntheticManifold
from recon.sampling.cloud import SampleCloud

PathLike = Union[str, Path]

# 17 significant digits round-trip every double
FLOAT_FORMAT = "%.17g"


def to_json(record: Dict) -> str:
    return json.dumps(record, indent=2) + "\n"


class ArtifactLoader:
    """Load and store artifacts on the local filesystem."""

    @staticmethod
    def _output_path(path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def write_json(self, record: Dict, path: PathLike) -> Path:
        path = self._output_path(path)
        path.write_text(to_json(record))
        return path

    def read_json(self, path: PathLike) -> Dict:
        path = Path(path)
        try:
            record = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise DomainError(f"{path} is not valid JSON: {e}") from e
        if not isinstance(record, dict):
            raise DomainError(f"{path} does not hold a JSON object")
        return record

    # ------------------------------------------------------------------
    # Clouds and manifolds
    # ------------------------------------------------------------------

    def save_cloud(self, cloud: SampleCloud, path: PathLike) -> Path:
        status(f"  → Saving {cloud.size} samples to {path}...")
        return self.write_json(cloud.to_record(), path)

    def load_cloud(self, path: PathLike) -> SampleCloud:
        cloud = SampleCloud.from_record(self.read_json(path))
        status(f"  ✓ Loaded {cloud.size} samples (d={cloud.d}, m={cloud.m}, eps={cloud.eps}) from {path}")
        return cloud

    def save_manifold(self, manifold: SyntheticManifold, path: PathLike) -> Path:
        return self.write_json(manifold.descriptor(), path)

    def load_manifold(self, path: PathLike) -> SyntheticManifold:
        return SyntheticManifold.from_descriptor(self.read_json(path))

    # ------------------------------------------------------------------
    # Projection results
    # ------------------------------------------------------------------

    def save_traces(self, traces: Sequence[ProjectionTrace], path: PathLike) -> Path:
        return self.write_json({"traces": [t.to_record() for t in traces]}, path)

    def load_traces(self, path: PathLike) -> List[ProjectionTrace]:
        record = self.read_json(path)
        try:
            return [ProjectionTrace.from_record(r) for r in record["traces"]]
        except (KeyError, TypeError, ValueError) as e:
            raise DomainError(f"malformed trace file {path}: {e}") from e

    def projections_frame(self, traces: Sequence[ProjectionTrace], d: int) -> pd.DataFrame:
        """One row per trace: limit coordinates, final residual, iterations, status."""
        columns = [f"x{i}" for i in range(d)]
        frame = pd.DataFrame([t.limit for t in traces], columns=columns, dtype=float)
        frame["residual"] = [t.final_residual for t in traces]
        frame["iterations"] = [t.iterations for t in traces]
        frame["status"] = [t.status.value for t in traces]
        return frame

    def save_projections(self, traces: Sequence[ProjectionTrace], d: int, path: PathLike) -> Path:
        """
        Write projected points as CSV. An empty trace list writes an empty
        file.
        """
        path = self._output_path(path)
        status(f"  → Writing {len(traces)} projected points to {path}...")
        if not traces:
            path.write_text("")
            return path
        self.projections_frame(traces, d).to_csv(path, index=False, float_format=FLOAT_FORMAT)
        return path

    def load_projections(self, path: PathLike) -> pd.DataFrame:
        path = Path(path)
        if path.stat().st_size == 0:
            return pd.DataFrame()
        return pd.read_csv(path, float_precision="round_trip")

    # ------------------------------------------------------------------
    # Reports
    # ------------------------------------------------------------------

    def save_report(self, report: FidelityReport, path: PathLike) -> Path:
        status(f"  → Saving fidelity report to {path}...")
        return self.write_json(report.to_dict(), path)

    def load_report(self, path: PathLike) -> FidelityReport:
        return FidelityReport.from_dict(self.read_json(path))
