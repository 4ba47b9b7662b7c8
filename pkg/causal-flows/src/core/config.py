import logging
import os
from pathlib import Path

from pydantic import Field, ValidationInfo, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8")

    PROJECT_ROOT_PATH: Path = Path(__file__).parent.parent.parent
    PROJECT_NAME: str = Field(default="causal-flows")
    PROJECT_DESCRIPTION: str = Field(
        default="causal-graphical normalizing flows for effect estimation"
    )
    VERSION: str = Field(default="v1")

    LOGGING_CONFIG_PATH: Path = PROJECT_ROOT_PATH / "logconfig.yml"
    LOG_LEVEL: int = Field(default=logging.INFO)

    DEFAULT_SEED: int = Field(default=20240101)
    WORKERS: int | None = Field(default=None, validate_default=True)

    # flow
    QUADRATURE_NODES: int = Field(default=32, ge=1)
    EMBEDDING_WIDTH: int = Field(default=10, ge=1)
    MODEL_FORMAT_VERSION: int = Field(default=1)

    # data
    DISCRETE_MAX_LEVELS: int = Field(default=10, ge=1)

    # sampling
    DEFAULT_SAMPLE_COUNT: int = Field(default=1_000_000, ge=1)
    SAMPLE_CHUNK_SIZE: int = Field(default=8192, ge=1)

    # bench
    ORACLE_DRAWS: int = Field(default=100_000_000, ge=1)
    DESK_REPLICATIONS: int = Field(default=20, ge=1)
    PAPER_REPLICATIONS: int = Field(default=400, ge=1)

    @field_validator("WORKERS", mode="before")
    @classmethod
    def build_workers(cls, v: int | str | None, values: ValidationInfo) -> int:
        if v not in (None, ""):
            return int(v)  # type: ignore[arg-type]

        return max(os.cpu_count() or 1, 1)


settings = Settings()
