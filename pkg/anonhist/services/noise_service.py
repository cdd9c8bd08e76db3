"""
Two-sided geometric (discrete Laplace) noise.

Sampling consumes exactly one 64-bit word per sample. The top bit of the
word is the sign; the low 63 bits give a survival level w in (0, 1) and the
magnitude is the largest k with Pr[|X| >= k] > w, i.e. an inverse CDF on
the magnitude. The all-zero word sits at the top of the survival range and
yields 0, so a zero stream means zero noise.

The epsilon -> alpha calibration (alpha = e^{-epsilon}) is left to callers.
"""
import math
from typing import Callable, NamedTuple

import numpy as np

from anonhist.models.partition import NoisedIntVector
from anonhist.models.privacy import GeometricNoise, PrivacyBudget
from anonhist.services.partition_service import IntVectorLike, as_int_array
from anonhist.utils.exceptions import PrivacyBudgetError
from anonhist.utils.random_streams import NoiseStream

_SIGN_BIT = np.uint64(1 << 63)
_MAGNITUDE_MASK = np.uint64((1 << 63) - 1)
_MAGNITUDE_SCALE = float(2**63)


class GeoStats(NamedTuple):
    """Closed forms of a two-sided geometric distribution."""

    pmf: Callable[[int], float]
    tail: Callable[[int], float]
    expected_abs: float


def words_to_noise(words: np.ndarray, noise: GeometricNoise) -> np.ndarray:
    """Map raw 64-bit words to geometric samples, one word each."""
    words = np.asarray(words, dtype=np.uint64)
    alpha = noise.alpha
    negative = (words & _SIGN_BIT) != 0
    low = words & _MAGNITUDE_MASK
    survival = ((_MAGNITUDE_MASK - low).astype(np.float64) + 0.5) / _MAGNITUDE_SCALE
    # Pr[|X| >= k] = 2 alpha^k / (1 + alpha) for k >= 1
    threshold = np.log(survival * (1.0 + alpha) / 2.0) / math.log(alpha)
    magnitude = np.maximum(np.ceil(threshold) - 1.0, 0.0).astype(np.int64)
    return np.where(negative, -magnitude, magnitude)


def geo_sample(noise: GeometricNoise, stream: NoiseStream) -> int:
    """Draw a single Geo(alpha) sample."""
    return int(words_to_noise(stream.next_words(1), noise)[0])


def geo_samples(noise: GeometricNoise, stream: NoiseStream, size: int) -> np.ndarray:
    """Draw ``size`` independent samples, in stream order."""
    return words_to_noise(stream.next_words(size), noise)


def geo_stats(noise: GeometricNoise) -> GeoStats:
    """pmf, upper tail Pr[X >= k] and E|X| of Geo(alpha)."""
    alpha = noise.alpha
    normalizer = (1.0 - alpha) / (1.0 + alpha)

    def pmf(i: int) -> float:
        return alpha ** abs(i) * normalizer

    def tail(k: int) -> float:
        # symmetric: for k >= 1 this is also Pr[X <= -k]
        if k >= 1:
            return alpha ** k / (1.0 + alpha)
        return 1.0 - alpha ** (1 - k) / (1.0 + alpha)

    return GeoStats(pmf=pmf, tail=tail, expected_abs=2.0 * alpha / (1.0 - alpha * alpha))


def add_geo_noise(v: IntVectorLike, noise: GeometricNoise, stream: NoiseStream) -> NoisedIntVector:
    """Add independent Geo(alpha) noise to every coordinate, in coordinate order."""
    values = as_int_array(v)
    noised = values + geo_samples(noise, stream, values.size)
    return NoisedIntVector(values=tuple(noised.tolist()))


def group_privacy(budget: PrivacyBudget, k: int) -> PrivacyBudget:
    """Guarantee for inputs at distance k: (k eps, delta (e^{k eps} - 1) / (e^{eps} - 1))."""
    if k < 1:
        raise PrivacyBudgetError("group size must be at least 1", details={"k": k})
    if k == 1:
        return budget
    epsilon = k * budget.epsilon
    if budget.delta == 0:
        return PrivacyBudget(epsilon=epsilon, delta=0.0)
    try:
        delta = budget.delta * math.expm1(epsilon) / math.expm1(budget.epsilon)
    except OverflowError:
        delta = math.inf
    if delta >= 1:
        raise PrivacyBudgetError(
            "group privacy delta is vacuous",
            details={"k": k, "epsilon": epsilon, "delta": delta},
        )
    return PrivacyBudget(epsilon=epsilon, delta=delta)
