"""
Lower-bound encoding models.
"""
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from anonhist.models.partition import IntegerPartition
from anonhist.models.privacy import PrivacyBudget


class EncodingSpec(BaseModel):
    """Parameter schedule of the multi-level bit-vector encoding.

    Level l (1-based) holds R codes. Code r of level l takes the value
    p_grid[l-1][r] for bit 0 or p_grid[l-1][r-1] for bit 1, repeated 2^(l-1)
    times, with p_grid[l-1][r] = s[l-1] + (R - r) d[l-1].
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="Size bound of the encoded partitions")
    delta: int = Field(..., ge=1, description="Target l1 diameter")
    levels: int = Field(..., ge=1, description="L")
    ranks: int = Field(..., ge=1, description="R = floor(n / delta)")
    m: int = Field(..., ge=1, description="Code length L * R")
    s: Tuple[int, ...] = Field(..., description="Per-level base value")
    d: Tuple[int, ...] = Field(..., description="Per-level step")
    p_grid: Tuple[Tuple[int, ...], ...] = Field(..., description="Per-level values for r = 0..R")

    @model_validator(mode="after")
    def check_shapes(self) -> "EncodingSpec":
        if self.m != self.levels * self.ranks:
            raise ValueError("m must equal levels * ranks")
        if len(self.s) != self.levels or len(self.d) != self.levels or len(self.p_grid) != self.levels:
            raise ValueError("per-level tables must have one entry per level")
        if any(len(row) != self.ranks + 1 for row in self.p_grid):
            raise ValueError("each p_grid row must have ranks + 1 entries")
        return self

    @property
    def length(self) -> int:
        """Number of parts of every encoded partition."""
        return self.ranks * (2**self.levels - 1)


class PackingCertificate(BaseModel):
    """Exact pairwise distance summary of a packing."""

    model_config = ConfigDict(frozen=True)

    n: int
    delta: int
    levels: int
    ranks: int
    m: int
    attempts: int = Field(..., ge=1)
    count: int = Field(..., ge=0)
    min_code_distance: int = Field(..., ge=1, description="ceil(0.1 m) Hamming separation")
    lower_limit: int = Field(..., description="ceil(0.01 delta)")
    upper_limit: int = Field(..., description="delta")
    min_pairwise: Optional[int] = Field(None, description="None when fewer than two partitions")
    max_pairwise: Optional[int] = None


class PackingResult(BaseModel):
    """Certified packing: partitions pairwise within [ceil(0.01 delta), delta] in l1."""

    model_config = ConfigDict(frozen=True)

    partitions: List[IntegerPartition]
    certification: PackingCertificate


class ReductionProbeResult(BaseModel):
    """Mean decoding error of a mechanism behind an encoding, with its floor."""

    model_config = ConfigDict(frozen=True)

    m: int = Field(..., ge=1)
    trials: int = Field(..., ge=1)
    mean_error: float = Field(..., ge=0)
    max_error: int = Field(..., ge=0)
    group_size: int = Field(..., ge=1, description="Largest image distance of a single bit flip")
    mechanism_budget: PrivacyBudget
    induced_budget: PrivacyBudget
    error_floor: float = Field(..., ge=0, description="e^-eps m (1 - delta) / 2 for the induced budget")
