"""
Configuration management for the reconstruction toolkit.
Loads environment variables and provides defaults to other modules.
"""

import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _flag(name: str, default: str) -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


class Config:
    """Central configuration class."""

    # Randomness
    SEED = int(os.getenv("RECON_SEED", "0"))

    # Projection operator
    MAX_ITERS = int(os.getenv("RECON_MAX_ITERS", "100"))
    STEP_TOL = float(os.getenv("RECON_STEP_TOL", "1e-12"))
    RESIDUAL_TOL = float(os.getenv("RECON_RESIDUAL_TOL", "1e-11"))

    # Field evaluation
    GAP_WARNING = float(os.getenv("RECON_GAP_WARNING", "0.1"))

    # Sampling
    KAPPA_CENTERS = int(os.getenv("RECON_KAPPA_CENTERS", "100"))
    DENSITY_POINTS = int(os.getenv("RECON_DENSITY_POINTS", "10000"))

    # Batch work
    THREADS = int(os.getenv("RECON_THREADS", "1"))

    # Output
    VERBOSE = _flag("RECON_VERBOSE", "true")

    @classmethod
    def validate(cls):
        """Validate configuration values."""
        positive = {
            "RECON_STEP_TOL": cls.STEP_TOL,
            "RECON_RESIDUAL_TOL": cls.RESIDUAL_TOL,
            "RECON_GAP_WARNING": cls.GAP_WARNING,
            "RECON_KAPPA_CENTERS": cls.KAPPA_CENTERS,
            "RECON_DENSITY_POINTS": cls.DENSITY_POINTS,
            "RECON_THREADS": cls.THREADS,
        }

        invalid = [key for key, value in positive.items() if not value > 0]
        if cls.MAX_ITERS < 0:
            invalid.append("RECON_MAX_ITERS")

        if invalid:
            raise ValueError(f"Invalid configuration: {', '.join(invalid)}")

        return True


# Validate config on import
Config.validate()
