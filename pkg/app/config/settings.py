from functools import lru_cache
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Application settings
    APP_NAME: str = Field(default="Triplet Clustering Toolkit", description="Application name")
    APP_ENV: str = Field(default="development", description="Application environment")
    LOG_LEVEL: str = Field(default="INFO", description="Root logging level")

    # Storage settings
    OUTPUT_DIR: str = Field(default="./outputs", description="Directory for checkpoints, CSVs and reports")
    CIFAR10_DIR: Optional[str] = Field(default=None, description="Directory holding the CIFAR-10 binary batches")

    # Execution settings
    MAX_WORKERS: int = Field(default=1, ge=1, description="Worker processes used for grid cells")

    # Solver settings
    BRUTE_FORCE_MAX_NODES: int = Field(default=12, ge=1, description="Largest graph the exhaustive multicut oracle accepts")
    KMEANS_MAX_ITER: int = Field(default=300, ge=1, description="Lloyd iterations per k-means restart")
    PROBABILITY_EPSILON: float = Field(default=1e-6, gt=0, lt=0.5, description="Clamp applied to probabilities before logit")


@lru_cache
def get_settings() -> Settings:
    """
    Get cached settings instance.

    Returns:
        Settings: Application settings
    """
    return Settings()
