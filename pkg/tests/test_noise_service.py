"""
Tests for the geometric sampler and group privacy.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings
from hypothesis import strategies as st
from pydantic import ValidationError

from anonhist.models.privacy import GeometricNoise, PrivacyBudget
from anonhist.services.noise_service import (
    add_geo_noise,
    geo_sample,
    geo_samples,
    geo_stats,
    group_privacy,
    words_to_noise,
)
from anonhist.utils.exceptions import PrivacyBudgetError
from anonhist.utils.random_streams import SeededStream

SIGN = 1 << 63
MASK = (1 << 63) - 1
NOISE = GeometricNoise(alpha=math.exp(-1.0))


class TestPrivacyModels:

    @pytest.mark.parametrize("epsilon", [0.0, -1.0, float("inf")])
    def test_budget_rejects_bad_epsilon(self, epsilon):
        with pytest.raises(ValidationError):
            PrivacyBudget(epsilon=epsilon)

    def test_budget_rejects_delta_one(self):
        with pytest.raises(ValidationError):
            PrivacyBudget(epsilon=1.0, delta=1.0)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5])
    def test_noise_rejects_alpha_outside_unit_interval(self, alpha):
        with pytest.raises(ValidationError):
            GeometricNoise(alpha=alpha)


class TestWordMapping:
    """One 64-bit word per sample: sign bit plus an inverse CDF on the magnitude."""

    def test_zero_word_is_zero_noise(self, zero_stream):
        assert geo_sample(NOISE, zero_stream) == 0
        assert words_to_noise(np.zeros(4, dtype=np.uint64), NOISE).tolist() == [0, 0, 0, 0]

    def test_sign_bit_alone_is_zero_noise(self):
        assert words_to_noise(np.array([SIGN], dtype=np.uint64), NOISE).tolist() == [0]

    def test_top_of_magnitude_range_is_large(self):
        values = words_to_noise(np.array([MASK, SIGN | MASK], dtype=np.uint64), NOISE).tolist()
        assert values[0] > 30
        assert values[1] == -values[0]

    @given(st.integers(min_value=0, max_value=MASK))
    def test_sign_bit_negates(self, low):
        words = np.array([low, SIGN | low], dtype=np.uint64)
        positive, negative = words_to_noise(words, NOISE).tolist()
        assert negative == -positive
        assert positive >= 0

    def test_magnitude_is_monotone_in_low_bits(self):
        lows = np.sort(SeededStream(3).next_words(2000) & np.uint64(MASK))
        magnitudes = words_to_noise(lows, NOISE)
        assert np.all(np.diff(magnitudes) >= 0)


class TestSampling:

    def test_vectorised_sampling_matches_single_draws(self):
        batch = geo_samples(NOISE, SeededStream(5), 50).tolist()
        stream = SeededStream(5)
        singles = [geo_sample(NOISE, stream) for _ in range(50)]
        assert batch == singles

    def test_same_seed_same_samples(self):
        first = geo_samples(NOISE, SeededStream(11, 2), 100)
        second = geo_samples(NOISE, SeededStream(11, 2), 100)
        third = geo_samples(NOISE, SeededStream(11, 3), 100)
        assert first.tolist() == second.tolist()
        assert first.tolist() != third.tolist()

    def test_add_geo_noise_consumes_one_word_per_coordinate(self, seeded_stream, mocker):
        spy = mocker.spy(seeded_stream, "next_words")
        noised = add_geo_noise((5, 3, 0), NOISE, seeded_stream)
        assert len(noised) == 3
        spy.assert_called_once_with(3)

    def test_add_geo_noise_with_zero_stream_is_identity(self, zero_stream):
        assert add_geo_noise((5, 3, 0), NOISE, zero_stream).values == (5, 3, 0)

    def test_empirical_distribution_matches_pmf(self):
        samples = geo_samples(NOISE, SeededStream(7), 10**6)
        stats = geo_stats(NOISE)
        support = np.arange(-20, 21)
        inside = np.abs(samples) <= 20
        empirical = np.bincount(samples[inside] + 20, minlength=41) / samples.size
        analytic = np.array([stats.pmf(int(k)) for k in support])
        outside_empirical = 1.0 - inside.mean()
        outside_analytic = 2.0 * stats.tail(21)
        tv = 0.5 * (np.abs(empirical - analytic).sum() + abs(outside_empirical - outside_analytic))
        assert tv <= 0.005

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_lower_tail_frequency(self, k):
        samples = geo_samples(NOISE, SeededStream(13), 10**6)
        analytic = math.exp(-k) / (1.0 + math.exp(-1.0))
        observed = float(np.mean(samples <= -k))
        standard_error = math.sqrt(analytic * (1.0 - analytic) / samples.size)
        assert abs(observed - analytic) <= 3 * standard_error


class TestGeoStats:

    def test_pmf_sums_to_one(self):
        stats = geo_stats(NOISE)
        total = sum(stats.pmf(i) for i in range(-50, 51)) + 2 * stats.tail(51)
        assert abs(total - 1.0) <= 1e-12

    def test_expected_abs_increases_with_alpha(self):
        alphas = [k / 100 for k in range(1, 100)]
        values = [geo_stats(GeometricNoise(alpha=alpha)).expected_abs for alpha in alphas]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_tail(self):
        stats = geo_stats(NOISE)
        alpha = NOISE.alpha
        assert stats.tail(1) == pytest.approx(alpha / (1 + alpha))
        assert stats.tail(0) == pytest.approx(1 / (1 + alpha))
        assert stats.tail(-2) == pytest.approx(sum(stats.pmf(i) for i in range(-2, 201)))

    def test_expected_abs(self):
        stats = geo_stats(NOISE)
        direct = sum(abs(i) * stats.pmf(i) for i in range(-300, 301))
        assert stats.expected_abs == pytest.approx(direct)


class TestGroupPrivacy:

    def test_matches_geometric_sum(self):
        grown = group_privacy(PrivacyBudget(epsilon=0.1, delta=0.01), 3)
        expected_delta = 0.01 * sum(math.exp(i * 0.1) for i in range(3))
        assert grown.epsilon == pytest.approx(0.3)
        assert grown.delta == pytest.approx(expected_delta, rel=1e-6)

    def test_k_one_is_identity(self):
        budget = PrivacyBudget(epsilon=0.5, delta=0.1)
        assert group_privacy(budget, 1) == budget

    def test_pure_budget_stays_pure(self):
        grown = group_privacy(PrivacyBudget(epsilon=1.0), 61)
        assert grown.epsilon == pytest.approx(61.0)
        assert grown.delta == 0.0

    def test_rejects_nonpositive_k(self):
        with pytest.raises(PrivacyBudgetError):
            group_privacy(PrivacyBudget(epsilon=1.0), 0)

    def test_rejects_vacuous_delta(self):
        with pytest.raises(PrivacyBudgetError):
            group_privacy(PrivacyBudget(epsilon=1.0, delta=0.5), 5)

    @hypothesis_settings(max_examples=50)
    @given(st.floats(min_value=0.01, max_value=2.0), st.integers(min_value=1, max_value=10))
    def test_epsilon_scales_linearly(self, epsilon, k):
        assert group_privacy(PrivacyBudget(epsilon=epsilon), k).epsilon == pytest.approx(k * epsilon)
