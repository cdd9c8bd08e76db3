"""
Privacy parameter models.
"""
import math

from pydantic import BaseModel, ConfigDict, Field, field_validator


class PrivacyBudget(BaseModel):
    """An (epsilon, delta) differential privacy guarantee."""

    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(..., gt=0, description="Multiplicative privacy loss")
    delta: float = Field(default=0.0, ge=0, lt=1, description="Additive slack")

    @field_validator("epsilon")
    @classmethod
    def validate_epsilon(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("epsilon must be finite")
        return v


class GeometricNoise(BaseModel):
    """Two-sided geometric distribution: Pr[i] = alpha^|i| (1 - alpha) / (1 + alpha)."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(..., gt=0, lt=1)
