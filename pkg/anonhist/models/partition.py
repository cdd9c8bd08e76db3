"""
Integer partition value objects.

An anonymized histogram is stored as its sorted count vector with the zero
tail left implicit. Prevalence vectors and noised vectors are finite
integer vectors of an explicit length.
"""
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_serializer, model_validator

INT64_MAX = 2**63 - 1


class IntegerPartition(BaseModel):
    """Nonincreasing sequence of positive integers (canonical: no stored zeros)."""

    model_config = ConfigDict(frozen=True)

    parts: Tuple[int, ...] = Field(default=(), description="Parts, largest first")

    @model_validator(mode="before")
    @classmethod
    def accept_sequence(cls, data):
        # a bare list or tuple of parts is the JSON form
        if isinstance(data, (list, tuple)):
            return {"parts": tuple(data)}
        return data

    @field_validator("parts")
    @classmethod
    def validate_parts(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        total = 0
        for i, part in enumerate(v):
            if part < 1:
                raise ValueError(f"part {i} is {part}; stored parts must be positive")
            if i and part > v[i - 1]:
                raise ValueError(f"parts must be nonincreasing (index {i})")
            total += part
        if total > INT64_MAX:
            raise ValueError("partition size overflows a signed 64-bit integer")
        return v

    @model_serializer
    def serialize_parts(self) -> List[int]:
        return list(self.parts)

    @property
    def size(self) -> int:
        """Sum of the parts."""
        return sum(self.parts)

    @property
    def largest(self) -> int:
        """Largest part, 0 for the empty partition."""
        return self.parts[0] if self.parts else 0

    def padded(self, length: int) -> List[int]:
        """First ``length`` coordinates, zero-padded."""
        head = list(self.parts[:length])
        return head + [0] * (length - len(head))

    def __len__(self) -> int:
        return len(self.parts)

    def __str__(self) -> str:
        return "(" + ", ".join(str(part) for part in self.parts) + ")"


class PrevalenceVector(BaseModel):
    """Cumulative prevalences phi_{>=r} for r = origin_rank, origin_rank + 1, ..."""

    model_config = ConfigDict(frozen=True)

    values: Tuple[int, ...] = Field(default=(), description="Nonincreasing prevalences")
    origin_rank: int = Field(default=1, ge=1, description="Threshold of the first entry")

    @field_validator("values")
    @classmethod
    def validate_values(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        for i, value in enumerate(v):
            if value < 0:
                raise ValueError(f"prevalence {i} is negative")
            if i and value > v[i - 1]:
                raise ValueError(f"prevalences must be nonincreasing (index {i})")
        return v

    def __len__(self) -> int:
        return len(self.values)


class NoisedIntVector(BaseModel):
    """Integer vector after noise; sign and order are not guaranteed."""

    model_config = ConfigDict(frozen=True)

    values: Tuple[int, ...] = Field(default=())

    def __len__(self) -> int:
        return len(self.values)


class IsotonicFit(BaseModel):
    """Closest nonincreasing nonnegative integer vector and its l1 cost."""

    model_config = ConfigDict(frozen=True)

    values: Tuple[int, ...] = Field(default=())
    cost: int = Field(default=0, ge=0)
