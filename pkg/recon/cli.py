"""
Command-line front end.

Stages compose through files:

    python -m recon sample   --manifold circle --d 2 --eps 0.01 --seed 7 --out cloud.json
    python -m recon frames   --cloud cloud.json --mode perturbed --out noisy.json
    python -m recon eval     --cloud cloud.json --point 1.0,0.01
    python -m recon project  --cloud cloud.json --seeds seeds.csv --out limits.csv
    python -m recon evaluate --cloud cloud.json --manifold circle --d 2 --out report.json

Exit codes: 0 success, 1 usage or input error, 2 numeric or convergence failure.
"""

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from recon.analytics.metrics_calculator import MetricsCalculator
from recon.config import Config
from recon.console import banner, status
from recon.errors import DomainError, InsufficientData, NumericError, RankDeficient, ReconError
from recon.extractors.seeds_csv_importer import SeedsCSVImporter
from recon.field.implicit_fn import evaluate
from recon.field.projector import ProjectionOptions, ProjectionStatus, project_many
from recon.loaders.artifact_loader import ArtifactLoader, to_json
from recon.manifolds.manifold_zoo import KINDS, SyntheticManifold
from recon.reporting.fidelity_reporter import FidelityReporter
from recon.sampling.sampler import estimate_frames_pca, exact_frames, generate_sample, perturb_frames

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2

NUMERIC_ERRORS = (NumericError, RankDeficient, InsufficientData)


class CommandError(Exception):
    """A command finished but must report failure through its exit code."""

    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class ReconArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    """Everything needed to repeat a command."""
    command: str
    seed: int
    threads: int
    options: Dict = field(default_factory=dict)

    def to_json(self) -> str:
        return to_json(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        record = json.loads(text)
        return cls(command=record["command"], seed=int(record["seed"]), threads=int(record["threads"]),
                   options=record.get("options", {}))

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        skip = {"command", "seed", "threads", "handler", "record"}
        options = {k: v for k, v in vars(args).items() if k not in skip}
        # normalize to the JSON form (paths to strings, tuples to lists)
        options = json.loads(json.dumps(options, default=str))
        return cls(command=args.command, seed=args.seed, threads=args.threads, options=options)


# ----------------------------------------------------------------------
# Argument parsing helpers
# ----------------------------------------------------------------------

def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a number") from None
    if not value > 0 or value == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return value


def nonnegative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not an integer") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return value


def positive_int(text: str) -> int:
    value = nonnegative_int(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be positive, got 0")
    return value


def parse_point(text: str, d: int) -> np.ndarray:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise DomainError(f"point '{text}' is not a comma-separated list of reals") from None
    if len(values) != d or not np.all(np.isfinite(values)):
        raise DomainError(f"point '{text}' must have {d} finite coordinates")
    return np.array(values)


def parse_region(text: str) -> List[List[float]]:
    """'lo:hi,lo:hi' -> [[lo, hi], [lo, hi]]"""
    region = []
    for part in text.split(","):
        bounds = part.split(":")
        if len(bounds) != 2:
            raise argparse.ArgumentTypeError(f"region interval '{part}' is not lo:hi")
        try:
            lo, hi = float(bounds[0]), float(bounds[1])
        except ValueError:
            raise argparse.ArgumentTypeError(f"region interval '{part}' is not numeric") from None
        if not lo < hi:
            raise argparse.ArgumentTypeError(f"region interval '{part}' needs lo < hi")
        region.append([lo, hi])
    return region


def parse_param(text: str):
    """'key=value' with value read as JSON when possible ('R=3', 'frequencies=[1,3]')."""
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"parameter '{text}' is not key=value")
    try:
        return key, json.loads(raw)
    except json.JSONDecodeError:
        raise argparse.ArgumentTypeError(f"parameter value '{raw}' is not a number or list") from None


def load_manifold(args: argparse.Namespace, loader: ArtifactLoader) -> Optional[SyntheticManifold]:
    if args.manifold_file:
        return loader.load_manifold(args.manifold_file)
    if not args.manifold:
        return None
    if args.d is None:
        raise DomainError("--d is required with --manifold")
    return SyntheticManifold(args.manifold, args.d, dict(args.param or []), args.rotation_seed)


def require_manifold(args: argparse.Namespace, loader: ArtifactLoader) -> SyntheticManifold:
    manifold = load_manifold(args, loader)
    if manifold is None:
        raise DomainError("a manifold is required (--manifold ... or --manifold-file)")
    return manifold


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------

def cmd_sample(args: argparse.Namespace, loader: ArtifactLoader) -> int:
    banner("SAMPLING MANIFOLD")
    manifold = require_manifold(args, loader)
    cloud = generate_sample(manifold, args.eps, seed=args.seed, region=args.region)
    loader.save_cloud(cloud, args.out)
    if args.manifold_out:
        loader.save_manifold(manifold, args.manifold_out)
    print(f"samples={cloud.size} kappa_measured={cloud.kappa_measured} gamma={cloud.gamma!r}")
    return EXIT_OK


def cmd_frames(args: argparse.Namespace, loader: ArtifactLoader) -> int:
    banner(f"FRAMES ({args.mode.upper()})")
    cloud = loader.load_cloud(args.cloud)
    manifold = load_manifold(args, loader)

    if args.mode == "exact":
        if manifold is None:
            raise DomainError("exact frames need the manifold")
        cloud = exact_frames(cloud, manifold)
    elif args.mode == "perturbed":
        max_angle = args.max_angle if args.max_angle is not None else cloud.m * cloud.gamma
        cloud = perturb_frames(cloud, max_angle, seed=args.seed)
    else:
        radius = args.radius if args.radius is not None else cloud.gamma
        cloud = estimate_frames_pca(cloud, radius, manifold)

    loader.save_cloud(cloud, args.out)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, loader: ArtifactLoader) -> int:
    cloud = loader.load_cloud(args.cloud)
    x = parse_point(args.point, cloud.d)
    result = evaluate(x, cloud)
    sys.stdout.write(to_json(result.to_record()))
    return EXIT_OK


def cmd_project(args: argparse.Namespace, loader: ArtifactLoader) -> int:
    banner("PROJECTING SEEDS")
    cloud = loader.load_cloud(args.cloud)
    seeds = SeedsCSVImporter(args.seeds, cloud.d).get_seeds()
    opts = ProjectionOptions(
        max_iters=Config.MAX_ITERS if args.max_iters is None else args.max_iters,
        step_tol=args.step_tol or Config.STEP_TOL,
        residual_tol=args.residual_tol or Config.RESIDUAL_TOL,
    )

    traces = project_many(seeds, cloud, opts, args.threads)
    loader.save_projections(traces, cloud.d, args.out)
    if args.trace_out:
        loader.save_traces(traces, args.trace_out)

    counts = {s.value: sum(t.status is s for t in traces) for s in ProjectionStatus}
    status(f"  ✓ {len(traces)} seeds: " + ", ".join(f"{k} {v}" for k, v in counts.items()))

    failed = len(traces) - counts[ProjectionStatus.CONVERGED.value]
    if failed and not args.allow_partial:
        raise CommandError(f"{failed} seed(s) did not converge", EXIT_NUMERIC)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace, loader: ArtifactLoader) -> int:
    banner("EVALUATING RECONSTRUCTION FIDELITY")
    cloud = loader.load_cloud(args.cloud)
    manifold = require_manifold(args, loader)

    calculator = MetricsCalculator(cloud, manifold, seed=args.seed, threads=args.threads)
    report = calculator.calculate_fidelity(args.n_points, args.n_seeds, args.injectivity_points)
    loader.save_report(report, args.out)
    sys.stdout.write(FidelityReporter().format_table(report))
    return EXIT_OK


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = ReconArgumentParser(add_help=False)
    common.add_argument("--seed", type=nonnegative_int, default=Config.SEED, help="Random seed")
    common.add_argument("--threads", type=positive_int, default=Config.THREADS, help="Batch worker threads")
    common.add_argument("--record", type=Path, default=None, help="Write the run configuration as JSON")

    manifold = ReconArgumentParser(add_help=False)
    manifold.add_argument("--manifold", choices=KINDS, help="Manifold kind")
    manifold.add_argument("--d", type=positive_int, help="Ambient dimension")
    manifold.add_argument("--param", type=parse_param, action="append", metavar="KEY=VALUE",
                          help="Shape parameter (repeatable)")
    manifold.add_argument("--rotation-seed", type=nonnegative_int, default=None,
                          help="Seed of the random rotation into R^d")
    manifold.add_argument("--manifold-file", type=Path, help="Manifold descriptor JSON")

    parser = ReconArgumentParser(prog="recon", description="Implicit manifold reconstruction toolkit.")
    commands = parser.add_subparsers(dest="command", required=True)

    sample = commands.add_parser("sample", parents=[common, manifold], help="Generate a sample cloud")
    sample.add_argument("--eps", type=positive_float, required=True, help="Sampling density")
    sample.add_argument("--region", type=parse_region, default=None, metavar="LO:HI[,LO:HI...]",
                        help="Restrict sampling to a parameter box")
    sample.add_argument("--out", type=Path, required=True, help="Cloud JSON output")
    sample.add_argument("--manifold-out", type=Path, default=None, help="Manifold descriptor output")
    sample.set_defaults(handler=cmd_sample)

    frames = commands.add_parser("frames", parents=[common, manifold], help="Replace tangent frames")
    frames.add_argument("--cloud", type=Path, required=True, help="Cloud JSON input")
    frames.add_argument("--mode", choices=("exact", "perturbed", "pca"), required=True)
    frames.add_argument("--max-angle", type=float, default=None, help="Perturbation budget (default mγ)")
    frames.add_argument("--radius", type=positive_float, default=None, help="PCA radius (default γ)")
    frames.add_argument("--out", type=Path, required=True, help="Cloud JSON output")
    frames.set_defaults(handler=cmd_frames)

    evaluate_one = commands.add_parser("eval", parents=[common], help="Evaluate φ at one point")
    evaluate_one.add_argument("--cloud", type=Path, required=True, help="Cloud JSON input")
    evaluate_one.add_argument("--point", required=True, help="Comma-separated coordinates")
    evaluate_one.set_defaults(handler=cmd_eval)

    project = commands.add_parser("project", parents=[common], help="Project seed points")
    project.add_argument("--cloud", type=Path, required=True, help="Cloud JSON input")
    project.add_argument("--seeds", type=Path, required=True, help="Seeds CSV (d columns, no header)")
    project.add_argument("--out", type=Path, required=True, help="Projected points CSV output")
    project.add_argument("--trace-out", type=Path, default=None, help="Trace JSON output")
    project.add_argument("--max-iters", type=nonnegative_int, default=None)
    project.add_argument("--step-tol", type=positive_float, default=None)
    project.add_argument("--residual-tol", type=positive_float, default=None)
    project.add_argument("--allow-partial", action="store_true",
                         help="Exit 0 even when some seeds do not converge")
    project.set_defaults(handler=cmd_project)

    fidelity = commands.add_parser("evaluate", parents=[common, manifold], help="Run the fidelity metrics")
    fidelity.add_argument("--cloud", type=Path, required=True, help="Cloud JSON input")
    fidelity.add_argument("--n-points", type=positive_int, default=200, help="Normal-angle test points")
    fidelity.add_argument("--n-seeds", type=positive_int, default=100, help="Projected seeds")
    fidelity.add_argument("--injectivity-points", type=nonnegative_int, default=0)
    fidelity.add_argument("--out", type=Path, required=True, help="Report JSON output")
    fidelity.set_defaults(handler=cmd_evaluate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK

    loader = ArtifactLoader()
    try:
        if args.record:
            args.record.write_text(RunConfig.from_args(args).to_json())
        return args.handler(args, loader)
    except CommandError as e:
        print(f"❌ {e}", file=sys.stderr)
        return e.code
    except NUMERIC_ERRORS as e:
        print(f"❌ Numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ReconError, OSError, ValueError) as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_INPUT
