import logging
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from .Paths import Paths

load_dotenv()


class Config(BaseSettings):
    """Process-wide settings loaded from environment variables and ``.env``."""

    model_config = SettingsConfigDict(arbitrary_types_allowed=True, extra="ignore")

    VERSION: str = "0.1.0"
    paths: Paths = Field(default_factory=Paths)

    # Datasets and run output
    TSDL_DATA_DIR: Path | None = Field(default=None)
    TSDL_OUTPUT_DIR: Path | None = Field(default=None)

    # Verification
    JACOBIAN_COLUMN_CAP: int = Field(default=200, gt=0)
    GRADCHECK_STEP: float = Field(default=1e-5, gt=0.0)

    # Sweeps
    SWEEP_WORKERS: int = Field(default=1, ge=1)

    # Logging
    LOG_LEVEL: str = Field(default="INFO")

    @property
    def data_dir(self) -> Path:
        return self.TSDL_DATA_DIR or self.paths.path_to_data

    @property
    def output_dir(self) -> Path:
        return self.TSDL_OUTPUT_DIR or self.paths.path_to_runs


@lru_cache()
def get_config() -> Config:
    return Config()


def setup_logging(level: str = "INFO") -> None:
    """Configure logging for the application."""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%H:%M:%S",
    )


config = get_config()
