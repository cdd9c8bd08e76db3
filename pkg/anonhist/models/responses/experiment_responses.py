"""
Response models for experiments and audits.
"""
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from anonhist.models.partition import IntegerPartition
from anonhist.models.requests.release_requests import MechanismKind


class ExperimentReport(BaseModel):
    """Monte-Carlo estimate of E||A(p) - p||_1 for one mechanism and input."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "mechanism_kind": "alg1",
                "n": 10000,
                "epsilon": 3.0,
                "trials": 200,
                "mean_error": 41.3,
                "std_error": 6.2,
                "max_error": 63,
                "seed": 0,
                "wall_time_ms": None,
                "input_label": "staircase",
                "bound": 49.787068367863945
            }
        },
    )

    mechanism_kind: MechanismKind
    n: int = Field(..., ge=0, description="Size bound (alg1, baseline) or input size (alg2)")
    epsilon: float = Field(..., gt=0)
    trials: int = Field(..., ge=1)
    mean_error: float = Field(..., ge=0)
    std_error: float = Field(..., ge=0, description="Sample standard deviation over trials")
    max_error: int = Field(..., ge=0)
    seed: int = Field(..., ge=0)
    wall_time_ms: Optional[float] = Field(None, description="Only set when timing is requested")
    input_label: str = Field(default="input", description="Canonical shape name or 'input'")
    bound: Optional[float] = Field(None, description="Audited utility bound C sqrt(n) e^-eps")


class AuditReport(BaseModel):
    """Exhaustive sensitivity audit over all neighbouring pairs of I_{<=n}."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=0)
    pairs_checked: int = Field(..., ge=0, description="Ordered pairs at l1 distance exactly 1")
    max_image_distance: int = Field(..., ge=0)


class OracleProjection(BaseModel):
    """Exact argmin over I_{<=n} and its l1 cost."""

    model_config = ConfigDict(frozen=True)

    partition: IntegerPartition
    cost: int = Field(..., ge=0)
