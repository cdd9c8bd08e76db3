"""
Application configuration settings.
"""
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings."""

    model_config = SettingsConfigDict(
        env_prefix="ANONHIST_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Environment Configuration
    environment: str = Field(default="development")
    debug: bool = Field(default=False)

    # Logging Configuration
    log_level: str = Field(default="INFO")
    log_format: str = Field(default="json")
    log_file: Optional[str] = Field(default=None)

    # Experiment Configuration
    default_seed: int = Field(default=0, ge=0, lt=2**64)
    default_trials: int = Field(default=200, ge=1)
    utility_constant: float = Field(default=10.0, gt=0)
    experiment_workers: int = Field(default=1, ge=1)
    show_progress: bool = Field(default=False)

    # Guardrails for exhaustive oracles
    enumeration_limit: int = Field(default=40, ge=0)
    oracle_limit: int = Field(default=12, ge=0)
    exhaustive_decode_limit: int = Field(default=20, ge=1)

    # Lower-bound constructions
    packing_attempts: int = Field(default=100_000, ge=1)

    @field_validator("log_level")
    @classmethod
    def normalize_log_level(cls, v: str) -> str:
        """Upper-case the log level name."""
        level = v.strip().upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level: {v}")
        return level

    @field_validator("log_format")
    @classmethod
    def validate_log_format(cls, v: str) -> str:
        """Only json and console renderers are supported."""
        if v not in ("json", "console"):
            raise ValueError("log_format must be one of: json, console")
        return v


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get application settings."""
    return settings
