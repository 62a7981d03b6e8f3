"""
Seeds CSV Importer
Reads projection starting points from plain CSV files.
"""

import csv
import math
from typing import List

import numpy as np

from recon.console import status
from recon.errors import DomainError


class SeedsCSVImporter:
    """Import seed points from a CSV file."""

    def __init__(self, seeds_csv: str, dimension: int):
        """
        Initialize CSV importer.

        Args:
            seeds_csv: Path to the seeds file
            dimension: expected number of columns per row (ambient dimension d)
        """
        self.seeds_csv = seeds_csv
        self.dimension = dimension

    def get_seeds(self) -> np.ndarray:
        """
        Import seeds from CSV.

        Expected format: one point per row, `dimension` comma-separated reals,
        no header. Blank lines and lines starting with '#' are skipped.

        Returns:
            (n, d) array; (0, d) for an empty file

        Raises:
            DomainError: a row has the wrong number of columns or a value is
                not a finite real; the message names the line
        """
        status(f"  → Importing seeds from {self.seeds_csv}...")

        rows: List[List[float]] = []
        with open(self.seeds_csv, "r", newline="") as f:
            for line_no, row in enumerate(csv.reader(f), start=1):
                if not row or all(not cell.strip() for cell in row) or row[0].lstrip().startswith("#"):
                    continue
                if len(row) != self.dimension:
                    raise DomainError(
                        f"{self.seeds_csv}, line {line_no}: expected {self.dimension} values, got {len(row)}"
                    )
                try:
                    values = [float(cell) for cell in row]
                except ValueError:
                    raise DomainError(f"{self.seeds_csv}, line {line_no}: non-numeric value in {row}") from None
                if not all(math.isfinite(v) for v in values):
                    raise DomainError(f"{self.seeds_csv}, line {line_no}: non-finite value in {row}")
                rows.append(values)

        status(f"  ✓ Imported {len(rows)} seeds")
        return np.array(rows, dtype=float).reshape(-1, self.dimension)
