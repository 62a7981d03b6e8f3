"""
Fidelity Report Comparison
Compares two fidelity reports taken at different eps and checks that each
error shrinks at the expected rate (angles linearly in eps, zero-set
distances quadratically).

    python tools/compare_reports.py coarse.json fine.json [--check]
"""

import argparse
import os
import sys

import pandas as pd

# Add parent directory to path so we can import from recon
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from recon.analytics.metrics_calculator import FidelityReport
from recon.loaders.artifact_loader import ArtifactLoader

# metric -> power of the eps ratio it is expected to scale with
SCALING = {
    "max_normal_angle": 1,
    "mean_normal_angle": 1,
    "hausdorff_M_to_Z": 2,
    "hausdorff_Z_to_M": 2,
    "zero_offset_max": 2,
}

# accepted ratio window, relative to the expected ratio, per power
TOLERANCE = {1: (0.7, 1.3), 2: (0.625, 1.375)}


def print_header(title):
    """Print a formatted header."""
    print("\n" + "=" * 80)
    print(f"  {title}")
    print("=" * 80)


def compare(coarse: FidelityReport, fine: FidelityReport) -> pd.DataFrame:
    """
    One row per scaled metric: both values, their ratio, the expected ratio
    and whether the ratio falls inside the accepted window.
    """
    if not coarse.eps > fine.eps:
        raise ValueError(f"first report must have the larger eps ({coarse.eps} vs {fine.eps})")
    eps_ratio = coarse.eps / fine.eps

    rows = []
    for metric, power in SCALING.items():
        a, b = getattr(coarse, metric), getattr(fine, metric)
        expected = eps_ratio ** power
        low, high = (expected * f for f in TOLERANCE[power])
        ratio = a / b if a is not None and b else None
        rows.append({
            "metric": metric,
            "coarse": a,
            "fine": b,
            "ratio": ratio,
            "expected": expected,
            "low": low,
            "high": high,
            "within": ratio is not None and low <= ratio <= high,
        })
    return pd.DataFrame(rows).set_index("metric")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Compare fidelity reports at two eps values.")
    parser.add_argument("coarse", help="Report JSON at the larger eps")
    parser.add_argument("fine", help="Report JSON at the smaller eps")
    parser.add_argument("--check", action="store_true", help="Exit 1 if any ratio is out of its window")
    args = parser.parse_args(argv)

    loader = ArtifactLoader()
    coarse, fine = loader.load_report(args.coarse), loader.load_report(args.fine)
    table = compare(coarse, fine)

    print_header(f"SCALING: eps {coarse.eps} → {fine.eps}")
    print(table.to_string(float_format=lambda v: f"{v:.4g}"))

    if args.check and not table["within"].all():
        failing = ", ".join(table.index[~table["within"]])
        print(f"\n❌ Out of window: {failing}")
        return 1
    print("\n✓ Done")
    return 0


if __name__ == "__main__":
    sys.exit(main())
