"""
Projection of noised vectors back onto integer partitions.

The core is l1 isotonic regression by pool-adjacent-violators with block
medians. A nonincreasing fit of v is the reversed nondecreasing fit of the
reversed v. Each block keeps its values in two heaps so merges and medians
stay cheap on long vectors; the block value is the lower median, which is
always an integer for integer input. Clipping the fit at 0 afterwards keeps
it optimal over nonnegative vectors.
"""
import heapq
from typing import List

import numpy as np

from anonhist.models.partition import IntegerPartition, IsotonicFit
from anonhist.services.partition_service import IntVectorLike, as_int_array, conjugate


class _MedianBlock:
    """Multiset with O(log k) insertion and lower-median lookup."""

    __slots__ = ("lower", "upper", "count")

    def __init__(self, value: int):
        self.lower: List[int] = [-value]  # max-heap of the lower half
        self.upper: List[int] = []
        self.count = 1

    @property
    def median(self) -> int:
        return -self.lower[0]

    def push(self, value: int) -> None:
        if value <= -self.lower[0]:
            heapq.heappush(self.lower, -value)
        else:
            heapq.heappush(self.upper, value)
        self.count += 1
        # len(lower) is ceil(count / 2), so its top is the lower median
        if len(self.lower) > len(self.upper) + 1:
            heapq.heappush(self.upper, -heapq.heappop(self.lower))
        elif len(self.upper) > len(self.lower):
            heapq.heappush(self.lower, -heapq.heappop(self.upper))

    def values(self) -> List[int]:
        return [-x for x in self.lower] + self.upper

    def absorb(self, other: "_MedianBlock") -> "_MedianBlock":
        """Merge the smaller block into the larger one and return the survivor."""
        big, small = (self, other) if self.count >= other.count else (other, self)
        for value in small.values():
            big.push(value)
        return big


def _nondecreasing_fit(values: List[int]) -> List[int]:
    blocks: List[_MedianBlock] = []
    for value in values:
        blocks.append(_MedianBlock(value))
        while len(blocks) > 1 and blocks[-2].median > blocks[-1].median:
            last = blocks.pop()
            blocks[-1] = blocks[-1].absorb(last)
    fit: List[int] = []
    for block in blocks:
        fit.extend([block.median] * block.count)
    return fit


def isotonic_l1(v: IntVectorLike) -> IsotonicFit:
    """Closest nonincreasing nonnegative integer vector to v in l1 (lower-median ties)."""
    values = as_int_array(v)
    if values.size == 0:
        return IsotonicFit()
    fit = np.asarray(_nondecreasing_fit(values[::-1].tolist()), dtype=np.int64)[::-1]
    fit = np.maximum(fit, 0)
    return IsotonicFit(values=tuple(fit.tolist()), cost=int(np.abs(fit - values).sum()))


def project_to_partition(v: IntVectorLike) -> IntegerPartition:
    """Closest partition with support inside len(v) (size cap relaxed)."""
    fit = isotonic_l1(v).values
    return IntegerPartition(parts=tuple(x for x in fit if x > 0))


def project_prevalence(v: IntVectorLike) -> IntegerPartition:
    """Partition whose first len(v) prevalences are closest to v in l1."""
    fit = isotonic_l1(v).values
    return conjugate(fit)


def trim_to_size(p: IntegerPartition, cap: int) -> IntegerPartition:
    """Remove size(p) - cap units, smallest parts first; optimal in l1."""
    excess = p.size - max(cap, 0)
    if excess <= 0:
        return p
    parts = list(p.parts)
    while excess > 0:
        taken = min(parts[-1], excess)
        parts[-1] -= taken
        excess -= taken
        if parts[-1] == 0:
            parts.pop()
    return IntegerPartition(parts=tuple(parts))
