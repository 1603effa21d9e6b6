"""Configuration via pydantic-settings: reads .env and environment variables.

All env vars are prefixed with SFLAB_. Example: SFLAB_CUTOFF=128,
SFLAB_EIGENSOLVER=jacobi.
"""

from pathlib import Path
from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict

# Resolve .env relative to the package root (where pyproject.toml lives)
_PACKAGE_ROOT = Path(__file__).resolve().parent.parent
_ENV_FILE = _PACKAGE_ROOT / ".env"


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=str(_ENV_FILE),
        env_file_encoding="utf-8",
        env_prefix="SFLAB_",
        extra="ignore",
    )

    # Discretization
    cutoff: int = 64  # Fourier modes -K..K on the circle
    grid_nodes: int = 512  # nodes per periodic axis of the twist chart
    s_samples: int = 65  # Simpson samples in the family parameter
    fd_scheme: Literal["central4", "spectral"] = "central4"

    # Spectral flow
    s_resolution: int = 16  # initial partition of [a, b]
    interval_samples: int = 33  # spectra sampled per partition interval
    gap_margin: float = 1e-6
    zero_tol: float = 1e-9
    max_bisect_depth: int = 12
    eigensolver: Literal["lapack", "jacobi"] = "lapack"

    # Verification
    residual_tol: float = 1e-6
    imag_tol: float = 1e-6
    ledger_path: Path = Path(".sflab/ledger.json")

    # Runtime
    n_jobs: int = 1  # joblib workers for scenarios and interval sampling
    log_level: str = "INFO"


settings = Settings()
