"""
Release request models.
"""
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class MechanismKind(str, Enum):
    """Available release mechanisms."""

    ALG1 = "alg1"
    ALG2 = "alg2"
    BASELINE = "baseline"


class ReleaseConfig(BaseModel):
    """Parameters of one private release."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "epsilon": 3.0,
                "size_bound": 10000,
                "mechanism_kind": "alg1",
                "seed": 0
            }
        },
    )

    epsilon: float = Field(..., gt=0, description="Privacy parameter")
    size_bound: Optional[int] = Field(
        default=None,
        ge=1,
        description="Known upper bound n on the partition size (alg1, baseline)"
    )
    mechanism_kind: MechanismKind = Field(default=MechanismKind.ALG1)
    seed: int = Field(default=0, ge=0, lt=2**64, description="64-bit seed")

    @model_validator(mode="after")
    def check_mechanism_parameters(self) -> "ReleaseConfig":
        if self.mechanism_kind == MechanismKind.ALG2:
            if self.size_bound is not None:
                raise ValueError("alg2 does not take a size bound")
            if self.epsilon < 2:
                raise ValueError("alg2 requires epsilon >= 2")
        elif self.size_bound is None:
            raise ValueError(f"{self.mechanism_kind.value} requires a size bound")
        return self


class InputShape(str, Enum):
    """Canonical inputs for utility experiments."""

    STAIRCASE = "staircase"
    FLAT = "flat"
    BLOCK = "block"
