"""
Configuration settings for the relative-smoothness toolkit.
"""

import os
from typing import Optional

from dotenv import load_dotenv

from .exceptions import ConfigurationError

load_dotenv()

_ENV_PREFIX = "RELSMOOTH_"


def _env_float(name: str, default: float) -> float:
    raw: Optional[str] = os.getenv(_ENV_PREFIX + name)
    return float(raw) if raw not in (None, "") else default


def _env_int(name: str, default: int) -> int:
    raw: Optional[str] = os.getenv(_ENV_PREFIX + name)
    return int(raw) if raw not in (None, "") else default


class Config:
    """Application configuration."""

    # Scalar root finding
    ROOT_TOL: float = _env_float("ROOT_TOL", 1e-12)
    ROOT_MAX_ITER: int = _env_int("ROOT_MAX_ITER", 200)
    ROOT_MAX_EXPANSIONS: int = _env_int("ROOT_MAX_EXPANSIONS", 128)
    GOLDEN_WIDTH: float = _env_float("GOLDEN_WIDTH", 1e-10)

    # Bregman machinery
    BREGMAN_SLACK: float = _env_float("BREGMAN_SLACK", 1e-12)
    SIMPLEX_LO_OFFSET: float = 1e-14
    SIMPLEX_SUM_TOL: float = _env_float("SIMPLEX_SUM_TOL", 1e-9)

    # Certification
    CERT_TOL: float = _env_float("CERT_TOL", 1e-9)
    CERT_SAMPLES: int = _env_int("CERT_SAMPLES", 1000)
    CERT_WORKERS: int = _env_int("CERT_WORKERS", 1)
    SAMPLE_MARGIN: float = _env_float("SAMPLE_MARGIN", 1e-6)
    SAMPLE_RADIUS: float = _env_float("SAMPLE_RADIUS", 3.0)
    FD_GRADIENT_STEP: float = _env_float("FD_GRADIENT_STEP", 1e-5)
    FD_HESSIAN_STEP: float = _env_float("FD_HESSIAN_STEP", 1e-4)
    RANK_TOL: float = _env_float("RANK_TOL", 1e-10)

    # Solvers
    DENSE_RECORD_UNTIL: int = _env_int("DENSE_RECORD_UNTIL", 1000)
    SPARSE_RECORD_EVERY: int = _env_int("SPARSE_RECORD_EVERY", 10)
    FW_REFACTOR_EVERY: int = _env_int("FW_REFACTOR_EVERY", 50)
    FW_ORACLE_MAX_ITERS: int = _env_int("FW_ORACLE_MAX_ITERS", 200000)
    ORACLE_GAP_FRACTION: float = _env_float("ORACLE_GAP_FRACTION", 0.01)
    MONOTONE_SLACK: float = _env_float("MONOTONE_SLACK", 1e-12)

    # Instances and output
    DEFAULT_SEED: int = _env_int("DEFAULT_SEED", 0)
    PRNG_NAME: str = "numpy.PCG64"
    TRACE_FLOAT_FORMAT: str = "%.17g"
    LOG_LEVEL: str = os.getenv(_ENV_PREFIX + "LOG_LEVEL", "WARNING")

    @classmethod
    def validate(cls) -> bool:
        """Validate configuration settings."""
        for name in ("ROOT_TOL", "GOLDEN_WIDTH", "BREGMAN_SLACK", "SIMPLEX_SUM_TOL", "CERT_TOL",
                     "SAMPLE_MARGIN", "SAMPLE_RADIUS", "FD_GRADIENT_STEP",
                     "FD_HESSIAN_STEP", "RANK_TOL", "ORACLE_GAP_FRACTION", "MONOTONE_SLACK"):
            if not getattr(cls, name) > 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(cls, name)}")
        for name in ("ROOT_MAX_ITER", "ROOT_MAX_EXPANSIONS", "CERT_SAMPLES", "CERT_WORKERS",
                     "DENSE_RECORD_UNTIL", "SPARSE_RECORD_EVERY", "FW_REFACTOR_EVERY",
                     "FW_ORACLE_MAX_ITERS"):
            if getattr(cls, name) < 1:
                raise ConfigurationError(f"{name} must be at least 1, got {getattr(cls, name)}")
        return True
