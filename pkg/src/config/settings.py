"""Application settings configuration."""
import os
from functools import lru_cache
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic.v1 import BaseSettings

# Load .env file before initializing settings
load_dotenv()


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Parallel sweeps; overrides the --jobs flag when set
    COUPLED_WAVES_THREADS: Optional[int] = None

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_DIR: str = "logs"

    # Outputs
    OUTPUT_DIR: str = "out"

    # Quadrature
    GAUSS_HERMITE_ORDER: int = 61
    QUADRATURE_TOLERANCE: float = 1e-10
    MONTE_CARLO_SAMPLES: int = 1_000_000
    MONTE_CARLO_SEED: int = 0xC0DE

    @property
    def output_path(self) -> Path:
        """Get the absolute path of the output directory."""
        if os.path.isabs(self.OUTPUT_DIR):
            return Path(self.OUTPUT_DIR)
        return Path.cwd() / self.OUTPUT_DIR

    class Config:
        case_sensitive = True


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
