"""
Tests for the release mechanisms.
"""
import math

import pytest
from hypothesis import given, settings as hypothesis_settings
from hypothesis import strategies as st
from pydantic import ValidationError

from anonhist.models.partition import IntegerPartition
from anonhist.models.privacy import GeometricNoise
from anonhist.models.requests.release_requests import InputShape, MechanismKind, ReleaseConfig
from anonhist.services.experiment_service import canonical_input, enumerate_partitions, run_error_experiment
from anonhist.services.mechanism_service import (
    baseline_noise_all,
    dp_anon_hist,
    dp_anon_hist_unknown_n,
    noise_for_epsilon,
    release,
    release_unknown_size,
    sensitivity_map,
    undershoot_probability,
    utility_bound,
    window_size,
)
from anonhist.services.noise_service import geo_stats
from anonhist.services.partition_service import prevalence, split_at_rank
from anonhist.utils.exceptions import (
    PreconditionError,
    PrivacyBudgetError,
    SizeBoundExceededError,
)
from anonhist.utils.random_streams import SeededStream, ZeroStream
from tests.strategies import partitions


def P(*parts):
    return IntegerPartition(parts=parts)


class TestReleaseConfig:

    def test_alg1_requires_size_bound(self):
        with pytest.raises(ValidationError):
            ReleaseConfig(epsilon=1.0, mechanism_kind=MechanismKind.ALG1)

    def test_alg2_rejects_size_bound(self):
        with pytest.raises(ValidationError):
            ReleaseConfig(epsilon=3.0, size_bound=10, mechanism_kind=MechanismKind.ALG2)

    def test_alg2_requires_epsilon_two(self):
        with pytest.raises(ValidationError):
            ReleaseConfig(epsilon=1.5, mechanism_kind=MechanismKind.ALG2)

    def test_rejects_nonpositive_epsilon(self):
        with pytest.raises(ValidationError):
            ReleaseConfig(epsilon=0.0, size_bound=10)

    def test_accepts_string_kind(self):
        config = ReleaseConfig(epsilon=2.0, size_bound=10, mechanism_kind="baseline")
        assert config.mechanism_kind == MechanismKind.BASELINE


class TestWindowAndSensitivityMap:

    @pytest.mark.parametrize(
        "n, m",
        [(0, 0), (1, 1), (2, 2), (4, 2), (5, 3), (10, 4), (10**4, 100), (10**4 + 1, 101), (10**18, 10**9)],
    )
    def test_window_size_is_ceil_sqrt(self, n, m):
        assert window_size(n) == m

    def test_window_size_rejects_negative(self):
        with pytest.raises(PreconditionError):
            window_size(-1)

    def test_sensitivity_map(self):
        head, low = sensitivity_map(P(2, 1, 1), 4)
        assert head == (2, 1)
        assert low == (1, 0)

    def test_sensitivity_map_checks_size_bound(self):
        with pytest.raises(SizeBoundExceededError):
            sensitivity_map(P(3, 2), 4)

    def test_noise_for_epsilon(self):
        assert noise_for_epsilon(2.0) == GeometricNoise(alpha=math.exp(-2.0))

    @staticmethod
    def _assert_tail_fits_window(p, n):
        m = window_size(n)
        _, tail = split_at_rank(p, m)
        assert tail.largest <= m, (p, n)
        values = prevalence(tail, max(tail.largest, m) + 1).values
        assert all(value == 0 for value in values[m:]), (p, n)

    def test_tail_prevalence_is_never_truncated(self):
        for n in range(1, 21):
            for p in enumerate_partitions(n):
                self._assert_tail_fits_window(p, n)

    @hypothesis_settings(max_examples=300)
    @given(st.data())
    def test_tail_prevalence_is_never_truncated_up_to_one_hundred(self, data):
        n = data.draw(st.integers(min_value=1, max_value=100))
        candidates = data.draw(st.lists(st.integers(min_value=1, max_value=n), max_size=n))
        parts, total = [], 0
        for part in sorted(candidates, reverse=True):
            if total + part <= n:
                parts.append(part)
                total += part
        self._assert_tail_fits_window(IntegerPartition(parts=tuple(sorted(parts, reverse=True))), n)


class TestKnownSizeRelease:

    def test_zero_noise_identity_on_all_small_partitions(self, zero_stream):
        for p in enumerate_partitions(20):
            assert dp_anon_hist(p, 1.0, 20, zero_stream) == p

    @hypothesis_settings(max_examples=50)
    @given(partitions(max_part=60, max_parts=40))
    def test_zero_noise_identity_with_slack(self, p):
        n = max(p.size, 1) + 7
        assert dp_anon_hist(p, 2.0, n, ZeroStream()) == p

    def test_draws_head_then_prevalence_noise(self, seeded_stream, mocker):
        spy = mocker.spy(seeded_stream, "next_words")
        dp_anon_hist(P(5, 3, 1), 2.0, 25, seeded_stream)
        assert [c.args for c in spy.call_args_list] == [(5,), (5,)]

    def test_same_seed_same_release(self):
        p = canonical_input(InputShape.STAIRCASE, 500)
        first = dp_anon_hist(p, 1.5, 500, SeededStream(9))
        second = dp_anon_hist(p, 1.5, 500, SeededStream(9))
        assert first == second

    def test_high_half_has_at_most_window_parts_above_window(self, seeded_stream):
        released = dp_anon_hist(P(9, 4, 2, 1), 0.5, 16, seeded_stream)
        # only the m noised head coordinates can produce parts larger than m
        assert sum(1 for part in released.parts if part > 4) <= 4

    def test_warns_below_epsilon_one(self, zero_stream, mocker):
        logger = mocker.patch("anonhist.services.mechanism_service.logger")
        dp_anon_hist(P(2, 1), 0.5, 4, zero_stream)
        logger.warning.assert_called_once()

    def test_no_warning_at_epsilon_one(self, zero_stream, mocker):
        logger = mocker.patch("anonhist.services.mechanism_service.logger")
        dp_anon_hist(P(2, 1), 1.0, 4, zero_stream)
        logger.warning.assert_not_called()

    def test_rejects_oversized_partition(self, zero_stream):
        with pytest.raises(SizeBoundExceededError):
            dp_anon_hist(P(3, 3), 1.0, 5, zero_stream)

    def test_rejects_zero_size_bound(self, zero_stream):
        with pytest.raises(PreconditionError):
            dp_anon_hist(IntegerPartition(), 1.0, 0, zero_stream)

    @pytest.mark.parametrize("epsilon", [0.0, -1.0, float("nan"), float("inf")])
    def test_rejects_bad_epsilon(self, zero_stream, epsilon):
        with pytest.raises(PrivacyBudgetError):
            dp_anon_hist(P(1), epsilon, 4, zero_stream)


class TestUnknownSizeRelease:

    def test_zero_noise_identity_on_all_small_partitions(self, zero_stream):
        for p in enumerate_partitions(20):
            assert dp_anon_hist_unknown_n(p, 3.0, zero_stream) == p

    def test_zero_noise_size_estimates(self, zero_stream):
        result = release_unknown_size(P(4, 3, 1), 2.0, zero_stream)
        assert result.size_estimate == 8
        assert result.size_cap == 16
        assert result.partition == P(4, 3, 1)

    def test_empty_partition_caps_at_two(self, zero_stream):
        result = release_unknown_size(IntegerPartition(), 2.0, zero_stream)
        assert result.size_cap == 2
        assert result.partition == IntegerPartition()

    def test_draws_size_noise_first(self, seeded_stream, mocker):
        spy = mocker.spy(seeded_stream, "next_words")
        result = release_unknown_size(P(5, 3, 1), 4.0, seeded_stream)
        m = window_size(result.size_cap)
        assert [c.args for c in spy.call_args_list] == [(1,), (m,), (m,)]

    def test_output_never_exceeds_size_cap(self):
        p = canonical_input(InputShape.FLAT, 50)
        for trial in range(20):
            result = release_unknown_size(p, 2.0, SeededStream(1, trial))
            assert result.partition.size <= result.size_cap

    def test_requires_epsilon_two(self, zero_stream):
        with pytest.raises(PrivacyBudgetError):
            dp_anon_hist_unknown_n(P(1), 1.9, zero_stream)

    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_no_undershoot_for_tiny_inputs(self, n):
        assert undershoot_probability(n) == 0.0

    @pytest.mark.parametrize("n", [3, 4, 5, 6, 11, 40])
    def test_undershoot_probability_matches_direct_sum(self, n):
        stats = geo_stats(GeometricNoise(alpha=math.exp(-1.0)))
        direct = sum(stats.pmf(x) for x in range(-n - 60, 1) if 2 * max(1, n + x) < n)
        assert undershoot_probability(n) == pytest.approx(direct, rel=1e-9)


class TestBaseline:

    def test_zero_noise_identity(self, zero_stream):
        for p in enumerate_partitions(10):
            assert baseline_noise_all(p, 1.0, 10, zero_stream) == p

    def test_noises_every_coordinate(self, seeded_stream, mocker):
        spy = mocker.spy(seeded_stream, "next_words")
        baseline_noise_all(P(3, 1), 1.0, 100, seeded_stream)
        spy.assert_called_once_with(100)

    def test_draws_fewer_words_than_baseline(self, mocker):
        p = canonical_input(InputShape.STAIRCASE, 10**4)
        rank_split, full = SeededStream(1), SeededStream(1)
        rank_split_spy = mocker.spy(rank_split, "next_words")
        full_spy = mocker.spy(full, "next_words")
        dp_anon_hist(p, 3.0, 10**4, rank_split)
        baseline_noise_all(p, 3.0, 10**4, full)
        assert sum(c.args[0] for c in rank_split_spy.call_args_list) == 200
        assert sum(c.args[0] for c in full_spy.call_args_list) == 10**4


class TestDispatch:

    @pytest.mark.parametrize(
        "config",
        [
            ReleaseConfig(epsilon=1.0, size_bound=12),
            ReleaseConfig(epsilon=2.0, mechanism_kind=MechanismKind.ALG2),
            ReleaseConfig(epsilon=1.0, size_bound=12, mechanism_kind=MechanismKind.BASELINE),
        ],
    )
    def test_release_dispatches_on_kind(self, config, zero_stream):
        assert release(P(5, 4, 2, 1), config, zero_stream) == P(5, 4, 2, 1)

    def test_utility_bound(self):
        assert utility_bound(10**4, 3.0, 10.0) == pytest.approx(1000 * math.exp(-3.0))


@pytest.mark.slow
class TestUtilityScaling:
    """Desk-scale reproduction of the sqrt(n) e^-eps error bound."""

    N = 10**4
    TRIALS = 200

    def _mean_error(self, epsilon, kind=MechanismKind.ALG1):
        config = ReleaseConfig(
            epsilon=epsilon,
            size_bound=None if kind == MechanismKind.ALG2 else self.N,
            mechanism_kind=kind,
            seed=0,
        )
        partition = canonical_input(InputShape.STAIRCASE, self.N)
        return run_error_experiment(config, partition, self.TRIALS).mean_error

    def test_error_bound_and_epsilon_scaling(self):
        means = {epsilon: self._mean_error(float(epsilon)) for epsilon in range(1, 6)}
        for epsilon, mean in means.items():
            assert mean <= utility_bound(self.N, epsilon, 10.0)
        for epsilon in range(1, 5):
            assert 1.5 <= means[epsilon] / means[epsilon + 1] <= 5.0
        assert means[2] / means[4] >= 0.6 * math.e

    @pytest.mark.parametrize(
        "partition",
        [canonical_input(InputShape.STAIRCASE, 10**4), IntegerPartition(parts=tuple(range(100, 0, -1)))],
        ids=["canonical-staircase", "hundred-step-staircase"],
    )
    def test_error_bound_at_epsilon_three(self, partition):
        config = ReleaseConfig(epsilon=3.0, size_bound=self.N, seed=0)
        report = run_error_experiment(config, partition, self.TRIALS)
        assert report.mean_error <= utility_bound(self.N, 3.0, 10.0)

    def test_unknown_size_costs_at_most_twice_the_known_size(self):
        unknown = self._mean_error(3.0, MechanismKind.ALG2)
        known = self._mean_error(2.0)
        assert known / 2 <= unknown <= 2 * known
