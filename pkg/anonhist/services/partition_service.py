"""
Integer partition operations.

All functions are pure. Vectors of different lengths are compared with the
missing coordinates treated as zero, which makes the l1 distance between
partitions and between their prevalence vectors well defined.
"""
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from anonhist.models.partition import (
    INT64_MAX,
    IntegerPartition,
    NoisedIntVector,
    PrevalenceVector,
)
from anonhist.utils.exceptions import InvalidPartitionError, PartitionOverflowError

IntVectorLike = Union[IntegerPartition, PrevalenceVector, NoisedIntVector, Sequence[int], np.ndarray]


def as_int_array(v: IntVectorLike) -> np.ndarray:
    """Coerce any supported vector type to an int64 array."""
    if isinstance(v, IntegerPartition):
        data = v.parts
    elif isinstance(v, (PrevalenceVector, NoisedIntVector)):
        data = v.values
    else:
        data = v
    return np.asarray(data, dtype=np.int64).reshape(-1)


def _as_count(c) -> int:
    try:
        value = int(c)
    except (TypeError, ValueError, OverflowError):
        raise InvalidPartitionError(f"count is not an integer: {c!r}", details={"count": repr(c)})
    if value != c:
        raise InvalidPartitionError(f"count is not an integer: {c!r}", details={"count": repr(c)})
    return value


def from_counts(counts: Iterable[int]) -> IntegerPartition:
    """Anonymize a histogram: drop zeros and sort the counts nonincreasing."""
    values = [_as_count(c) for c in counts]
    negative = [c for c in values if c < 0]
    if negative:
        raise InvalidPartitionError(
            "counts must be nonnegative",
            details={"negative_counts": negative[:10]},
        )
    if sum(values) > INT64_MAX:
        raise PartitionOverflowError("histogram size overflows a signed 64-bit integer")
    return IntegerPartition(parts=tuple(sorted((c for c in values if c), reverse=True)))


def l1_distance(a: IntVectorLike, b: IntVectorLike) -> int:
    """Variable-dimension l1 distance (missing coordinates are 0)."""
    x = as_int_array(a)
    y = as_int_array(b)
    length = max(x.size, y.size)
    if x.size < length:
        x = np.pad(x, (0, length - x.size))
    if y.size < length:
        y = np.pad(y, (0, length - y.size))
    return int(np.abs(x - y).sum())


def is_neighbor(p: IntegerPartition, q: IntegerPartition) -> bool:
    """Neighbouring partitions differ by at most one unit in l1."""
    return l1_distance(p, q) <= 1


def prevalence(p: IntegerPartition, length: int) -> PrevalenceVector:
    """(phi_{>=1}(p), ..., phi_{>=length}(p)) where phi_{>=r} counts parts >= r."""
    if length < 1:
        raise InvalidPartitionError("prevalence length must be at least 1", details={"length": length})
    return PrevalenceVector(values=tuple(_prevalence_counts(as_int_array(p), length).tolist()))


def _prevalence_counts(parts: np.ndarray, length: int) -> np.ndarray:
    # parts nonincreasing; count of entries >= r via binary search on the ascending copy
    ascending = parts[::-1]
    thresholds = np.arange(1, length + 1, dtype=np.int64)
    return parts.size - np.searchsorted(ascending, thresholds, side="left")


def conjugate(c: Union[PrevalenceVector, Sequence[int]]) -> IntegerPartition:
    """Partition q with phi_{>=r}(q) = c_r for r <= len(c) and no part above len(c)."""
    values = as_int_array(c)
    if values.size and (values.min() < 0 or np.any(np.diff(values) > 0)):
        raise InvalidPartitionError(
            "conjugate needs a nonincreasing nonnegative vector",
            details={"values": values[:20].tolist()},
        )
    if values.size == 0 or values[0] == 0:
        return IntegerPartition()
    # conjugation is its own inverse: q_i = #{r : c_r >= i}
    parts = _prevalence_counts(values, int(values[0]))
    return IntegerPartition(parts=tuple(parts.tolist()))


def union(p1: IntegerPartition, p2: IntegerPartition) -> IntegerPartition:
    """Multiset union of the parts."""
    if not p2.parts:
        return p1
    if not p1.parts:
        return p2
    return IntegerPartition(parts=tuple(sorted(p1.parts + p2.parts, reverse=True)))


def split_at_rank(p: IntegerPartition, m: int) -> Tuple[Tuple[int, ...], IntegerPartition]:
    """Split into the m largest parts (zero-padded) and the remaining tail."""
    if m < 1:
        raise InvalidPartitionError("split rank must be at least 1", details={"m": m})
    head = tuple(p.padded(m))
    tail = IntegerPartition(parts=p.parts[m:])
    return head, tail
