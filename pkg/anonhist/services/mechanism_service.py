"""
Private release mechanisms for anonymized histograms.

Known size bound (alg1): split the partition by rank at m = ceil(sqrt(n)).
The m largest parts get geometric noise directly; the rest are represented
by their first m cumulative prevalences, which get the same noise. Both
halves are projected back to partitions and merged. The map
p -> (head, tail prevalences) has l1 sensitivity 1, so Geo(e^-eps) noise
makes the release eps-DP.

Unknown size (alg2): spend 1 of the budget on a noisy size n-hat, run alg1
with eps - 1 and n' = 2 max(1, n-hat), then trim the result to size n'.

Noise draws happen in a fixed order: head coordinates, then prevalence
coordinates (alg2 draws its size noise before both).
"""
import math
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field

from anonhist.core.logging_config import get_logger
from anonhist.models.partition import IntegerPartition
from anonhist.models.privacy import GeometricNoise
from anonhist.models.requests.release_requests import MechanismKind, ReleaseConfig
from anonhist.services.noise_service import add_geo_noise, geo_sample
from anonhist.services.partition_service import prevalence, split_at_rank, union
from anonhist.services.projection_service import (
    project_prevalence,
    project_to_partition,
    trim_to_size,
)
from anonhist.utils.exceptions import (
    PreconditionError,
    PrivacyBudgetError,
    SizeBoundExceededError,
)
from anonhist.utils.random_streams import NoiseStream

logger = get_logger(__name__)

SIZE_ESTIMATE_EPSILON = 1.0


class UnknownSizeRelease(BaseModel):
    """Output of the unknown-size mechanism together with its size estimates."""

    model_config = ConfigDict(frozen=True)

    partition: IntegerPartition
    size_estimate: int = Field(..., description="n-hat = size + Geo(1/e)")
    size_cap: int = Field(..., ge=2, description="n' = 2 max(1, n-hat)")


def window_size(n: int) -> int:
    """m = ceil(sqrt(n)) in exact integer arithmetic."""
    if n < 0:
        raise PreconditionError("size bound must be nonnegative", details={"n": n})
    root = math.isqrt(n)
    return root if root * root == n else root + 1


def noise_for_epsilon(epsilon: float) -> GeometricNoise:
    """Geo(e^{-epsilon}), the noise calibrated to sensitivity 1."""
    _require_positive_epsilon(epsilon)
    alpha = math.exp(-epsilon)
    if alpha <= 0.0:
        raise PrivacyBudgetError("epsilon too large for floating point noise", details={"epsilon": epsilon})
    return GeometricNoise(alpha=alpha)


def _require_positive_epsilon(epsilon: float) -> None:
    if not epsilon > 0 or not math.isfinite(epsilon):
        raise PrivacyBudgetError("epsilon must be a positive finite number", details={"epsilon": epsilon})


def _require_size_bound(partition: IntegerPartition, n: int) -> None:
    if n < 1:
        raise PreconditionError("size bound must be positive", details={"n": n})
    if partition.size > n:
        raise SizeBoundExceededError(partition.size, n)


def _rank_split_images(partition: IntegerPartition, m: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    head, tail = split_at_rank(partition, m)
    return head, prevalence(tail, m).values


def sensitivity_map(partition: IntegerPartition, n: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """(p_1..p_m zero-padded, phi_{>=1..m}(p_{m+1}, ...)) with m = ceil(sqrt(n))."""
    _require_size_bound(partition, n)
    return _rank_split_images(partition, window_size(n))


def _release_with_bound(
    partition: IntegerPartition,
    epsilon: float,
    n: int,
    stream: NoiseStream,
) -> IntegerPartition:
    # privacy does not depend on size(p) <= n, so callers may skip that check
    m = window_size(n)
    noise = noise_for_epsilon(epsilon)
    head, low_prevalence = _rank_split_images(partition, m)

    head_noised = add_geo_noise(head, noise, stream)
    low_noised = add_geo_noise(low_prevalence, noise, stream)

    high_private = project_to_partition(head_noised)
    low_private = project_prevalence(low_noised)
    released = union(high_private, low_private)

    logger.debug(
        "Rank-split release",
        window=m,
        epsilon=epsilon,
        size_bound=n,
        released_size=released.size,
    )
    return released


def dp_anon_hist(
    partition: IntegerPartition,
    epsilon: float,
    n: int,
    stream: NoiseStream,
) -> IntegerPartition:
    """eps-DP release of a partition of size at most n."""
    _require_positive_epsilon(epsilon)
    _require_size_bound(partition, n)
    if epsilon < 1:
        logger.warning(
            "Running the rank-split release below epsilon 1; privacy holds but the utility bound is not claimed",
            epsilon=epsilon,
        )
    return _release_with_bound(partition, epsilon, n, stream)


def release_unknown_size(
    partition: IntegerPartition,
    epsilon: float,
    stream: NoiseStream,
) -> UnknownSizeRelease:
    """eps-DP release without a size bound (eps >= 2), with its size estimates."""
    _require_positive_epsilon(epsilon)
    if epsilon < 2:
        raise PrivacyBudgetError("the unknown-size release requires epsilon >= 2", details={"epsilon": epsilon})

    size_estimate = partition.size + geo_sample(noise_for_epsilon(SIZE_ESTIMATE_EPSILON), stream)
    size_cap = 2 * max(1, size_estimate)

    released = _release_with_bound(partition, epsilon - SIZE_ESTIMATE_EPSILON, size_cap, stream)
    trimmed = trim_to_size(released, size_cap)

    logger.debug(
        "Unknown-size release",
        size_estimate=size_estimate,
        size_cap=size_cap,
        trimmed_units=released.size - trimmed.size,
    )
    return UnknownSizeRelease(partition=trimmed, size_estimate=size_estimate, size_cap=size_cap)


def dp_anon_hist_unknown_n(
    partition: IntegerPartition,
    epsilon: float,
    stream: NoiseStream,
) -> IntegerPartition:
    """eps-DP release without a size bound (eps >= 2)."""
    return release_unknown_size(partition, epsilon, stream).partition


def baseline_noise_all(
    partition: IntegerPartition,
    epsilon: float,
    n: int,
    stream: NoiseStream,
) -> IntegerPartition:
    """Benchmark baseline: noise all n leading counts and project."""
    _require_positive_epsilon(epsilon)
    _require_size_bound(partition, n)
    noised = add_geo_noise(partition.padded(n), noise_for_epsilon(epsilon), stream)
    return project_to_partition(noised)


def release(partition: IntegerPartition, config: ReleaseConfig, stream: NoiseStream) -> IntegerPartition:
    """Run the mechanism named by the config."""
    if config.mechanism_kind == MechanismKind.ALG1:
        return dp_anon_hist(partition, config.epsilon, config.size_bound, stream)
    if config.mechanism_kind == MechanismKind.ALG2:
        return dp_anon_hist_unknown_n(partition, config.epsilon, stream)
    return baseline_noise_all(partition, config.epsilon, config.size_bound, stream)


def undershoot_probability(n: int) -> float:
    """Exact Pr[n' < n] for the unknown-size release on a partition of size n.

    n' < n needs n-hat < n / 2 and n >= 3, i.e. Geo(1/e) <= -(floor(n/2) + 1).
    """
    if n <= 2:
        return 0.0
    k = n // 2 + 1
    return math.exp(-k) / (1.0 + math.exp(-1.0))


def utility_bound(n: int, epsilon: float, constant: float) -> float:
    """Audited form of the O(sqrt(n) / e^eps) error bound."""
    return constant * math.sqrt(n) * math.exp(-epsilon)
