import os
from pathlib import Path

from dotenv import load_dotenv

# Pick up CAVITY_FOCK_OUTPUT_DIR from a local .env when present
load_dotenv()


class Config:
    # Base paths
    BASE_DIR = Path(__file__).parent.parent

    # Default output directory (the only setting read from the environment)
    OUTPUT_DIR = Path(
        os.getenv("CAVITY_FOCK_OUTPUT_DIR", str(BASE_DIR / "output"))
    )

    # Photon-number truncation
    TAIL_EPSILON = 1e-12

    # Two-level propagator
    WINDOW = 20.0
    TOL = 1e-10
    INTEGRATOR = "DOP853"
    NORM_DRIFT_LIMIT = 1e-6
    PROBABILITY_CLAMP = 1e-12

    # Closed-form filters
    MAX_SAFE_LAMBDA = 50.0
    ORACLE_TOLERANCE = 1e-6

    # Measurement
    MAX_BRUTE_FORCE_ATOMS = 20
    IMPOSSIBLE_PROBABILITY = 1e-300
    NORMALIZATION_TOLERANCE = 1e-9

    # Trapping experiments
    REALIZATIONS = 200
    FOCK_THRESHOLD = 0.99
    TRAP_TOLERANCE = 1e-9

    # Export
    CSV_DIGITS = 17

    @classmethod
    def setup_output_dir(cls) -> Path:
        """Create the output directory if it doesn't exist."""
        cls.OUTPUT_DIR.mkdir(parents=True, exist_ok=True)
        return cls.OUTPUT_DIR

    @classmethod
    def default_output_path(cls, stem: str, fmt: str) -> Path:
        """Path inside the output directory for an experiment without --out."""
        return cls.OUTPUT_DIR / f"{stem}.{fmt}"
