"""
Constructive lower-bound machinery.

The multi-level encoding maps bit vectors of length m = L R to partitions of
size at most n so that flipping code (l, r) moves exactly 2^(l-1) positions
by d^l. Codes own disjoint position ranges, laid out level by level:

    level l occupies positions R (2^(l-1) - 1) ... R (2^l - 1) - 1
    code r of level l occupies 2^(l-1) consecutive positions inside it

and both candidate values of a code keep the whole sequence nonincreasing
(2 s^(l+1) <= s^l). Nearest-codeword decoding therefore splits into one
two-way choice per code. The exhaustive decoder scores every candidate and
is kept as the referee for the fast path.

The low-privacy encoding u -> (2(m - i) + u_i) with m = isqrt(n) is an exact
isometry and decodes coordinate by coordinate as well.
"""
import math
from functools import lru_cache
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from anonhist.core.config import settings
from anonhist.core.logging_config import get_logger, log_experiment_event
from anonhist.models.encoding import (
    EncodingSpec,
    PackingCertificate,
    PackingResult,
    ReductionProbeResult,
)
from anonhist.models.partition import IntegerPartition
from anonhist.models.privacy import PrivacyBudget
from anonhist.services.noise_service import group_privacy
from anonhist.utils.exceptions import (
    CertificationError,
    EncodingInvariantError,
    EncodingParameterError,
    GuardrailError,
    PrivacyBudgetError,
)
from anonhist.utils.random_streams import NoiseStream, SeededStream

logger = get_logger(__name__)

ReleaseMechanism = Callable[[IntegerPartition, NoiseStream], IntegerPartition]

_EXHAUSTIVE_CHUNK = 4096


class _CodeTable(NamedTuple):
    value0: np.ndarray
    value1: np.ndarray
    repeats: np.ndarray
    weights: np.ndarray
    owner: np.ndarray  # code index of every position


def _check_precondition(n: int, delta: int) -> None:
    if n < 1 or delta < 1:
        raise EncodingParameterError(
            "n and delta must be positive integers",
            details={"n": n, "delta": delta},
        )
    if delta > n:
        raise EncodingParameterError("delta must not exceed n", details={"n": n, "delta": delta})
    # delta > 10 sqrt(n)  <=>  delta^2 > 100 n
    if delta * delta <= 100 * n:
        raise EncodingParameterError(
            "delta must exceed 10 sqrt(n)",
            details={"n": n, "delta": delta},
        )


def _level_count(n: int, delta: int) -> int:
    # largest L with 16^L n <= delta^2, i.e. floor(0.5 log2(delta / sqrt(n)))
    levels = 0
    while 16 ** (levels + 1) * n <= delta * delta:
        levels += 1
    return levels


def _check_level_bounds(delta: int, levels: int, ranks: int, level: int, s: int, d: int) -> None:
    scale = levels * 2**level
    s_ok = 2 * scale * s >= delta and scale * s <= delta
    d_ok = 4 * scale * ranks * d >= delta and scale * ranks * d <= delta
    if not (s_ok and d_ok):
        raise EncodingInvariantError(
            "level parameters break their bounds",
            details={"level": level, "s": s, "d": d, "delta": delta, "levels": levels, "ranks": ranks},
        )


def build_encoding_spec(n: int, delta: int) -> EncodingSpec:
    """Derive (L, R, m, s, d, p_grid) for n >= delta > 10 sqrt(n) and check every bound."""
    _check_precondition(n, delta)

    levels = _level_count(n, delta)
    ranks = n // delta
    m = levels * ranks
    if levels < 1 or ranks < 1:
        raise EncodingInvariantError("empty encoding", details={"levels": levels, "ranks": ranks})

    s_values: List[int] = []
    d_values: List[int] = []
    grid: List[tuple] = []
    for level in range(1, levels + 1):
        s = delta // (levels * 2**level)
        d = s // ranks
        _check_level_bounds(delta, levels, ranks, level, s, d)
        s_values.append(s)
        d_values.append(d)
        grid.append(tuple(s + (ranks - r) * d for r in range(ranks + 1)))

    logger.debug("Encoding levels derived", n=n, delta=delta, levels=levels, ranks=ranks, s=s_values, d=d_values)

    code_bound = (n / delta) * (math.log2(delta) - 0.5 * math.log2(n)) / 8.0
    if m < code_bound:
        raise EncodingInvariantError(
            "code length below its guaranteed minimum",
            details={"m": m, "bound": code_bound},
        )

    return EncodingSpec(
        n=n,
        delta=delta,
        levels=levels,
        ranks=ranks,
        m=m,
        s=tuple(s_values),
        d=tuple(d_values),
        p_grid=tuple(grid),
    )


@lru_cache(maxsize=32)
def _code_table(spec: EncodingSpec) -> _CodeTable:
    value0, value1, repeats, weights = [], [], [], []
    for level in range(1, spec.levels + 1):
        row = spec.p_grid[level - 1]
        for r in range(1, spec.ranks + 1):
            value0.append(row[r])
            value1.append(row[r - 1])
            repeats.append(2 ** (level - 1))
            weights.append(2 ** (level - 1) * spec.d[level - 1])
    repeats_arr = np.asarray(repeats, dtype=np.int64)
    return _CodeTable(
        value0=np.asarray(value0, dtype=np.int64),
        value1=np.asarray(value1, dtype=np.int64),
        repeats=repeats_arr,
        weights=np.asarray(weights, dtype=np.int64),
        owner=np.repeat(np.arange(spec.m), repeats_arr),
    )


def coordinate_weights(spec: EncodingSpec) -> np.ndarray:
    """l1 image distance of flipping each code: 2^(l-1) d^l."""
    return _code_table(spec).weights.copy()


def _as_bits(z: Sequence[int], length: int, what: str) -> np.ndarray:
    bits = np.asarray(z, dtype=np.int64).reshape(-1)
    if bits.size != length:
        raise EncodingParameterError(
            f"{what} must have length {length}",
            details={"expected": length, "received": int(bits.size)},
        )
    if np.any((bits != 0) & (bits != 1)):
        raise EncodingParameterError(f"{what} must contain only 0 and 1")
    return bits


def _encode_values(spec: EncodingSpec, bits: np.ndarray) -> np.ndarray:
    table = _code_table(spec)
    values = np.where(bits == 1, table.value1, table.value0)
    return np.repeat(values, table.repeats)


def encode(spec: EncodingSpec, z: Sequence[int]) -> IntegerPartition:
    """Encode a length-m bit vector as a partition of size at most n."""
    bits = _as_bits(z, spec.m, "bit vector")
    parts = _encode_values(spec, bits)
    size = int(parts.sum())
    if size > spec.n:
        raise EncodingInvariantError(
            "encoded partition exceeds the size bound",
            details={"size": size, "n": spec.n},
        )
    return IntegerPartition(parts=tuple(parts.tolist()))


def lowpriv_length(n: int) -> int:
    if n < 1:
        raise EncodingParameterError("n must be positive", details={"n": n})
    return math.isqrt(n)


def encode_lowpriv(u: Sequence[int], n: int) -> IntegerPartition:
    """psi(u)_i = 2(m - i) + u_i for i = 1..m, m = isqrt(n); an l1 isometry."""
    m = lowpriv_length(n)
    bits = _as_bits(u, m, "bit vector")
    values = 2 * (m - np.arange(1, m + 1, dtype=np.int64)) + bits
    return IntegerPartition(parts=tuple(int(x) for x in values if x > 0))


def decode_lowpriv(p: IntegerPartition, n: int) -> List[int]:
    """Exact nearest preimage under the low-privacy encoding."""
    m = lowpriv_length(n)
    head = np.asarray(p.padded(m), dtype=np.int64)
    base = 2 * (m - np.arange(1, m + 1, dtype=np.int64))
    return (head > base).astype(np.int64).tolist()


def _padded_positions(spec: EncodingSpec, p: IntegerPartition) -> np.ndarray:
    # positions past the encoding length cost the same for every candidate
    return np.asarray(p.padded(spec.length), dtype=np.int64)


def _decode_fast(spec: EncodingSpec, p: IntegerPartition) -> List[int]:
    table = _code_table(spec)
    observed = _padded_positions(spec, p)
    cost0 = np.zeros(spec.m, dtype=np.int64)
    cost1 = np.zeros(spec.m, dtype=np.int64)
    np.add.at(cost0, table.owner, np.abs(observed - table.value0[table.owner]))
    np.add.at(cost1, table.owner, np.abs(observed - table.value1[table.owner]))
    # ties go to bit 0
    return (cost1 < cost0).astype(np.int64).tolist()


def _candidate_bits(start: int, stop: int, m: int) -> np.ndarray:
    # row k is the binary expansion of k, most significant bit first: lexicographic order
    indices = np.arange(start, stop, dtype=np.int64)[:, None]
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)[None, :]
    return (indices >> shifts) & 1


def _decode_exhaustive(spec: EncodingSpec, p: IntegerPartition) -> List[int]:
    limit = settings.exhaustive_decode_limit
    if spec.m > limit:
        raise GuardrailError(
            f"exhaustive decoding is limited to m <= {limit}",
            limit=limit,
            requested=spec.m,
        )
    table = _code_table(spec)
    observed = _padded_positions(spec, p)
    best_cost, best_index = None, 0
    total = 2**spec.m
    for start in range(0, total, _EXHAUSTIVE_CHUNK):
        stop = min(start + _EXHAUSTIVE_CHUNK, total)
        bits = _candidate_bits(start, stop, spec.m)
        values = np.where(bits == 1, table.value1, table.value0)
        images = np.repeat(values, table.repeats, axis=1)
        costs = np.abs(images - observed).sum(axis=1)
        local = int(np.argmin(costs))
        if best_cost is None or costs[local] < best_cost:
            best_cost, best_index = int(costs[local]), start + local
    return _candidate_bits(best_index, best_index + 1, spec.m)[0].tolist()


def decode_nearest(spec: EncodingSpec, p: IntegerPartition, exhaustive: bool = False) -> List[int]:
    """Bit vector z minimising ||encode(z) - p||_1; ties resolve to bit 0 per code."""
    if exhaustive:
        return _decode_exhaustive(spec, p)
    return _decode_fast(spec, p)


def vector_release_error_floor(budget: PrivacyBudget, m: int) -> float:
    """Expected Hamming error floor e^-eps m (1 - delta) / 2 for releasing m private bits."""
    return math.exp(-budget.epsilon) * m * 0.5 * (1.0 - budget.delta)


def privacy_delta(n: int, epsilon: float) -> int:
    """delta = ceil(sqrt((n / eps) log2(1 / eps)) / 10) for 0 < eps < 1."""
    if not 0 < epsilon < 1:
        raise PrivacyBudgetError("the encoding diameter is defined for 0 < epsilon < 1", details={"epsilon": epsilon})
    return math.ceil(0.1 * math.sqrt((n / epsilon) * math.log2(1.0 / epsilon)))


def build_privacy_spec(n: int, epsilon: float) -> EncodingSpec:
    """Encoding spec with delta chosen from (n, eps); the precondition is checked, not assumed."""
    return build_encoding_spec(n, privacy_delta(n, epsilon))


def _probe(
    m: int,
    trials: int,
    seed: int,
    encoder: Callable[[np.ndarray], IntegerPartition],
    decoder: Callable[[IntegerPartition], List[int]],
    mechanism: ReleaseMechanism,
) -> np.ndarray:
    if trials < 1:
        raise EncodingParameterError("trials must be positive", details={"trials": trials})
    errors = np.zeros(trials, dtype=np.int64)
    for t in range(trials):
        stream = SeededStream(seed, t)
        z = stream.numpy_generator().integers(0, 2, size=m, dtype=np.int64)
        released = mechanism(encoder(z), stream)
        decoded = np.asarray(decoder(released), dtype=np.int64)
        errors[t] = int(np.abs(decoded - z).sum())
    return errors


def reduction_error_probe(
    mechanism: ReleaseMechanism,
    spec: EncodingSpec,
    budget: PrivacyBudget,
    trials: int,
    seed: int,
) -> ReductionProbeResult:
    """Encode uniform bits, release, decode nearest; compare the mean error with its floor.

    One bit flip moves the encoded partition by at most k = max 2^(l-1) d^l, so
    the bits inherit the group-privacy budget of the mechanism at distance k.
    """
    group_size = int(_code_table(spec).weights.max())
    induced = group_privacy(budget, group_size)
    errors = _probe(
        spec.m,
        trials,
        seed,
        lambda z: encode(spec, z),
        lambda p: decode_nearest(spec, p),
        mechanism,
    )
    result = ReductionProbeResult(
        m=spec.m,
        trials=trials,
        mean_error=float(errors.mean()),
        max_error=int(errors.max()),
        group_size=group_size,
        mechanism_budget=budget,
        induced_budget=induced,
        error_floor=vector_release_error_floor(induced, spec.m),
    )
    log_experiment_event(
        "reduction_probe",
        "completed",
        n=spec.n,
        delta=spec.delta,
        m=spec.m,
        mean_error=result.mean_error,
        error_floor=result.error_floor,
    )
    return result


def lowpriv_reduction_probe(
    mechanism: ReleaseMechanism,
    n: int,
    budget: PrivacyBudget,
    trials: int,
    seed: int,
) -> ReductionProbeResult:
    """Probe through the isometric low-privacy encoding; the induced budget is the mechanism's own."""
    m = lowpriv_length(n)
    errors = _probe(
        m,
        trials,
        seed,
        lambda u: encode_lowpriv(u, n),
        lambda p: decode_lowpriv(p, n),
        mechanism,
    )
    return ReductionProbeResult(
        m=m,
        trials=trials,
        mean_error=float(errors.mean()),
        max_error=int(errors.max()),
        group_size=1,
        mechanism_budget=budget,
        induced_budget=budget,
        error_floor=vector_release_error_floor(budget, m),
    )


def _greedy_code(m: int, min_distance: int, attempts: int, rng: np.random.Generator) -> np.ndarray:
    kept = np.empty((min(attempts, 2**m), m), dtype=np.int8)
    count = 0
    remaining = attempts
    while remaining > 0 and count < kept.shape[0]:
        batch = rng.integers(0, 2, size=(min(remaining, _EXHAUSTIVE_CHUNK), m), dtype=np.int8)
        remaining -= batch.shape[0]
        for candidate in batch:
            if count and int(np.count_nonzero(kept[:count] != candidate, axis=1).min()) < min_distance:
                continue
            kept[count] = candidate
            count += 1
            if count == kept.shape[0]:
                break
    return kept[:count]


def _certify(partitions: List[IntegerPartition], lower: int, upper: int) -> Tuple[Optional[int], Optional[int]]:
    if len(partitions) < 2:
        return None, None
    width = max(len(p) for p in partitions)
    matrix = np.asarray([p.padded(width) for p in partitions], dtype=np.int64)
    smallest, largest = None, None
    for i in range(matrix.shape[0] - 1):
        distances = np.abs(matrix[i + 1:] - matrix[i]).sum(axis=1)
        row_min, row_max = int(distances.min()), int(distances.max())
        smallest = row_min if smallest is None else min(smallest, row_min)
        largest = row_max if largest is None else max(largest, row_max)
    if smallest < lower or largest > upper:
        raise CertificationError(
            "packing distances fall outside the certified range",
            details={"min_pairwise": smallest, "max_pairwise": largest, "lower": lower, "upper": upper},
        )
    return smallest, largest


def generate_packing(n: int, delta: int, attempts: int, seed: int) -> PackingResult:
    """Greedy Gilbert-Varshamov code pushed through the encoding, then certified.

    Kept codewords are pairwise at Hamming distance >= ceil(0.1 m); the
    partitions are certified pairwise within [ceil(0.01 delta), delta].
    """
    if attempts < 1:
        raise EncodingParameterError("attempts must be positive", details={"attempts": attempts})
    spec = build_encoding_spec(n, delta)
    min_distance = max(1, (spec.m + 9) // 10)
    rng = SeededStream(seed).numpy_generator()

    code = _greedy_code(spec.m, min_distance, attempts, rng)
    partitions = [encode(spec, row) for row in code]

    lower, upper = (delta + 99) // 100, delta
    smallest, largest = _certify(partitions, lower, upper)

    certificate = PackingCertificate(
        n=n,
        delta=delta,
        levels=spec.levels,
        ranks=spec.ranks,
        m=spec.m,
        attempts=attempts,
        count=len(partitions),
        min_code_distance=min_distance,
        lower_limit=lower,
        upper_limit=upper,
        min_pairwise=smallest,
        max_pairwise=largest,
    )
    log_experiment_event(
        "packing",
        "completed",
        n=n,
        delta=delta,
        count=certificate.count,
        min_pairwise=smallest,
        max_pairwise=largest,
    )
    return PackingResult(partitions=partitions, certification=certificate)
