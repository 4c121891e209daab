"""
Configuration settings for the isomonodromy verification engine
"""
import os
from contextlib import contextmanager
from pathlib import Path

_REPO_ROOT = Path(__file__).resolve().parent.parent


class Settings:
    """Application settings"""

    # Terms computed beyond the leading exponent of a Laurent/Puiseux solution
    series_order: int = int(os.getenv("SERIES_ORDER", "12"))

    # Deeper expansions used when limits need heavy cancellation
    reduction_order: int = int(os.getenv("REDUCTION_ORDER", "20"))
    quasi_order: int = int(os.getenv("QUASI_ORDER", "14"))

    # Leading-balance search window (in units of 1/ramification)
    exponent_min: int = int(os.getenv("EXPONENT_MIN", "-6"))
    exponent_max: int = int(os.getenv("EXPONENT_MAX", "0"))

    # Numeric lab
    numeric_hbar: float = float(os.getenv("NUMERIC_HBAR", "1.0"))
    numeric_tol: float = float(os.getenv("NUMERIC_TOL", "1e-10"))
    near_pole_threshold: float = float(os.getenv("NEAR_POLE_THRESHOLD", "1e-12"))
    blowup_threshold: float = float(os.getenv("BLOWUP_THRESHOLD", "1e30"))
    branch_min_samples: int = int(os.getenv("BRANCH_MIN_SAMPLES", "20"))

    # Threading configuration
    max_threads: int = int(os.getenv("MAX_THREADS", "4"))

    # Logging level
    log_level: str = os.getenv("LOG_LEVEL", "INFO")

    # Golden files
    golden_dir: Path = Path(os.getenv("GOLDEN_DIR", str(_REPO_ROOT / "golden")))

    # API configuration
    api_title: str = "Isomonodromy Reduction API"
    api_version: str = "1.0.0"
    api_description: str = "Exact verification of singularity reductions of isomonodromy systems"

    # CORS settings
    allow_origins: list = ["*"]
    allow_credentials: bool = True
    allow_methods: list = ["*"]
    allow_headers: list = ["*"]

# Global settings instance
settings = Settings()


@contextmanager
def overridden(**values):
    """Temporarily replace settings for one invocation"""
    unknown = [k for k in values if not hasattr(settings, k)]
    if unknown:
        raise AttributeError(f"unknown settings: {', '.join(unknown)}")
    previous = {k: getattr(settings, k) for k in values}
    for k, v in values.items():
        setattr(settings, k, v)
    try:
        yield settings
    finally:
        for k, v in previous.items():
            setattr(settings, k, v)
