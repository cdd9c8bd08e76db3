"""
Experiment harness and exhaustive oracles.

Enumerations are grouped by size (ascending) and within a size listed in
reverse lexicographic order: (5), (4, 1), (3, 2), (3, 1, 1), ...
Exhaustive oracles refuse to run past their configured limits instead of
truncating.
"""
import math
import time
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from anonhist.core.config import settings
from anonhist.core.logging_config import get_logger, log_experiment_event
from anonhist.models.partition import IntegerPartition
from anonhist.models.requests.release_requests import InputShape, MechanismKind, ReleaseConfig
from anonhist.models.responses.experiment_responses import (
    AuditReport,
    ExperimentReport,
    OracleProjection,
)
from anonhist.services.mechanism_service import release, sensitivity_map, utility_bound
from anonhist.services.partition_service import IntVectorLike, as_int_array, l1_distance
from anonhist.utils.exceptions import GuardrailError, PreconditionError
from anonhist.utils.random_streams import SeededStream

logger = get_logger(__name__)


def _partitions_of(total: int, largest: int) -> Iterator[Tuple[int, ...]]:
    if total == 0:
        yield ()
        return
    for first in range(min(total, largest), 0, -1):
        for rest in _partitions_of(total - first, first):
            yield (first,) + rest


def _check_limit(n: int, limit: int, what: str) -> None:
    if n < 0:
        raise PreconditionError(f"{what} needs a nonnegative n", details={"n": n})
    if n > limit:
        raise GuardrailError(f"{what} is limited to n <= {limit}", limit=limit, requested=n)


@lru_cache(maxsize=8)
def _enumerate(n: int) -> Tuple[IntegerPartition, ...]:
    return tuple(
        IntegerPartition(parts=parts)
        for size in range(n + 1)
        for parts in _partitions_of(size, size)
    )


def enumerate_partitions(n: int) -> Tuple[IntegerPartition, ...]:
    """Every partition of size at most n, each exactly once."""
    _check_limit(n, settings.enumeration_limit, "partition enumeration")
    return _enumerate(n)


@lru_cache(maxsize=8)
def _partition_matrix(n: int) -> np.ndarray:
    rows = [p.padded(n) for p in _enumerate(n)]
    return np.asarray(rows, dtype=np.int64).reshape(len(rows), n)


def brute_force_project(v: IntVectorLike, n: int) -> OracleProjection:
    """Exact argmin of ||v - q||_1 over q in I_{<=n}; ties go to the lexicographically smallest q."""
    _check_limit(n, settings.oracle_limit, "brute-force projection")
    target = as_int_array(v)
    candidates = _partition_matrix(n)
    width = max(n, target.size)
    candidates = np.pad(candidates, ((0, 0), (0, width - n)))
    target = np.pad(target, (0, width - target.size))

    costs = np.abs(candidates - target).sum(axis=1)
    best = int(costs.min())
    winners = np.flatnonzero(costs == best)
    winner = min(tuple(candidates[i].tolist()) for i in winners)
    return OracleProjection(
        partition=IntegerPartition(parts=tuple(x for x in winner if x > 0)),
        cost=best,
    )


def _image_matrix(partitions: Sequence[IntegerPartition], n: int) -> np.ndarray:
    rows = []
    for p in partitions:
        head, low = sensitivity_map(p, n)
        rows.append(head + low)
    return np.asarray(rows, dtype=np.int64)


def sensitivity_audit(n: int) -> AuditReport:
    """Largest image distance under the rank-split map over all neighbouring pairs in I_{<=n}."""
    _check_limit(n, settings.oracle_limit, "sensitivity audit")
    if n == 0:
        return AuditReport(n=0, pairs_checked=0, max_image_distance=0)

    partitions = _enumerate(n)
    inputs = _partition_matrix(n)
    images = _image_matrix(partitions, n)

    pairs_checked, max_image_distance = 0, 0
    for i in range(inputs.shape[0]):
        neighbours = np.flatnonzero(np.abs(inputs - inputs[i]).sum(axis=1) == 1)
        if neighbours.size == 0:
            continue
        image_distances = np.abs(images[neighbours] - images[i]).sum(axis=1)
        pairs_checked += int(neighbours.size)
        max_image_distance = max(max_image_distance, int(image_distances.max()))

    report = AuditReport(n=n, pairs_checked=pairs_checked, max_image_distance=max_image_distance)
    log_experiment_event(
        "sensitivity_audit",
        "completed" if max_image_distance <= 1 else "failed",
        n=n,
        pairs_checked=pairs_checked,
        max_image_distance=max_image_distance,
    )
    return report


def canonical_input(shape: InputShape, n: int) -> IntegerPartition:
    """staircase (k, k-1, ..., 1) with the largest k fitting in n, flat (1, ..., 1), or block (n)."""
    if n < 0:
        raise PreconditionError("input size must be nonnegative", details={"n": n})
    shape = InputShape(shape)
    if n == 0:
        return IntegerPartition()
    if shape == InputShape.STAIRCASE:
        k = (math.isqrt(8 * n + 1) - 1) // 2
        return IntegerPartition(parts=tuple(range(k, 0, -1)))
    if shape == InputShape.FLAT:
        return IntegerPartition(parts=(1,) * n)
    return IntegerPartition(parts=(n,))


def _trial_error(partition: IntegerPartition, config: ReleaseConfig, trial: int) -> int:
    released = release(partition, config, SeededStream(config.seed, trial))
    return l1_distance(released, partition)


def _trial_chunk(args: Tuple[IntegerPartition, ReleaseConfig, int, int]) -> List[int]:
    partition, config, start, stop = args
    return [_trial_error(partition, config, t) for t in range(start, stop)]


def _run_trials(
    partition: IntegerPartition,
    config: ReleaseConfig,
    trials: int,
    workers: int,
    progress: bool,
) -> np.ndarray:
    if workers <= 1:
        iterator = tqdm(range(trials), desc=config.mechanism_kind.value, disable=not progress)
        return np.asarray([_trial_error(partition, config, t) for t in iterator], dtype=np.int64)

    chunk = math.ceil(trials / workers)
    jobs = [(partition, config, start, min(start + chunk, trials)) for start in range(0, trials, chunk)]
    errors: List[int] = []
    with ProcessPoolExecutor(max_workers=workers) as executor:
        for chunk_errors in tqdm(
            executor.map(_trial_chunk, jobs),
            total=len(jobs),
            desc=config.mechanism_kind.value,
            disable=not progress,
        ):
            errors.extend(chunk_errors)
    return np.asarray(errors, dtype=np.int64)


def run_error_experiment(
    config: ReleaseConfig,
    partition: IntegerPartition,
    trials: int,
    input_label: str = "input",
    workers: Optional[int] = None,
    progress: Optional[bool] = None,
    include_timing: bool = False,
) -> ExperimentReport:
    """Seeded Monte-Carlo estimate of E||A(p) - p||_1; trial t reads stream t."""
    if trials < 1:
        raise PreconditionError("trials must be positive", details={"trials": trials})
    workers = settings.experiment_workers if workers is None else workers
    progress = settings.show_progress if progress is None else progress

    started = time.perf_counter()
    errors = _run_trials(partition, config, trials, workers, progress)
    elapsed_ms = (time.perf_counter() - started) * 1000.0

    if config.mechanism_kind == MechanismKind.ALG2:
        n = partition.size
    else:
        n = config.size_bound
    bound = None
    if config.mechanism_kind != MechanismKind.BASELINE:
        bound = utility_bound(n, config.epsilon, settings.utility_constant)

    report = ExperimentReport(
        mechanism_kind=config.mechanism_kind,
        n=n,
        epsilon=config.epsilon,
        trials=trials,
        mean_error=float(errors.mean()),
        std_error=float(errors.std(ddof=1)) if trials > 1 else 0.0,
        max_error=int(errors.max()),
        seed=config.seed,
        wall_time_ms=elapsed_ms if include_timing else None,
        input_label=input_label,
        bound=bound,
    )
    log_experiment_event(
        "error_experiment",
        "completed",
        mechanism=config.mechanism_kind.value,
        n=n,
        epsilon=config.epsilon,
        trials=trials,
        mean_error=report.mean_error,
        input_label=input_label,
    )
    return report


def run_sweep(
    epsilons: Sequence[float],
    n: int,
    trials: int,
    seed: int,
    shape: InputShape = InputShape.STAIRCASE,
    mechanism_kind: MechanismKind = MechanismKind.ALG1,
    workers: Optional[int] = None,
    progress: Optional[bool] = None,
) -> List[ExperimentReport]:
    """One report per epsilon on the same canonical input and seed."""
    partition = canonical_input(shape, n)
    reports = []
    for epsilon in epsilons:
        config = ReleaseConfig(
            epsilon=epsilon,
            size_bound=None if mechanism_kind == MechanismKind.ALG2 else n,
            mechanism_kind=mechanism_kind,
            seed=seed,
        )
        reports.append(
            run_error_experiment(
                config,
                partition,
                trials,
                input_label=InputShape(shape).value,
                workers=workers,
                progress=progress,
            )
        )
    logger.info("Sweep finished", n=n, epsilons=list(epsilons), mechanism=mechanism_kind.value)
    return reports
