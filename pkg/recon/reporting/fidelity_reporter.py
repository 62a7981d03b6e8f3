"""
Fidelity Reporter
Renders fidelity reports as plain-text tables.
"""

from typing import Dict, Optional

import pandas as pd

from recon.analytics.metrics_calculator import FidelityReport

ROWS = [
    ("eps", "eps"),
    ("max_normal_angle", "Max normal angle (rad)"),
    ("mean_normal_angle", "Mean normal angle (rad)"),
    ("hausdorff_M_to_Z", "Hausdorff M → Z"),
    ("hausdorff_Z_to_M", "Hausdorff Z → M"),
    ("zero_offset_max", "Max zero offset"),
    ("contraction_median", "Median contraction"),
    ("drift_max", "Max iterate drift"),
    ("first_iterate_offset_max", "Max first-iterate offset"),
    ("max_iterations", "Max iterations"),
    ("n_test_points", "Test points"),
    ("n_seeds", "Seeds"),
    ("non_converged", "Non-converged"),
    ("excluded_points", "Excluded points"),
    ("limits_outside_offset", "Limits outside eps-offset"),
    ("injectivity_min_distance", "Closest distinct limits"),
]


class FidelityReporter:
    """Format fidelity reports for the terminal and for files."""

    def format_table(self, report: FidelityReport, title: Optional[str] = None) -> str:
        """
        Two-column summary. Lengths are also shown relative to γ² and angles
        relative to γ so runs at different eps can be compared by eye.
        """
        values = report.to_dict()
        rows = {label: _cell(values[key]) for key, label in ROWS if key in values}
        rows.update(self._scaled(values))

        table = pd.Series(rows, name="value").to_frame()
        table.index.name = "metric"
        header = title or f"Fidelity report (eps={report.eps})"
        return f"{header}\n{'=' * 50}\n{table.to_string()}\n"

    def _scaled(self, values: Dict) -> Dict[str, str]:
        gamma = 4.0 * values["eps"]
        scaled = {"Max normal angle / γ": _ratio(values["max_normal_angle"], gamma)}
        for key, label in (("hausdorff_Z_to_M", "Hausdorff Z → M / γ²"),
                           ("zero_offset_max", "Max zero offset / γ²")):
            scaled[label] = _ratio(values.get(key), gamma ** 2)
        return scaled


def _cell(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool) or isinstance(value, int):
        return str(value)
    return f"{value:.6g}"


def _ratio(value, scale: float) -> str:
    return "n/a" if value is None else f"{value / scale:.4g}"
