"""Selectors: cut values, null selection rates and structural properties."""

import math

import numpy as np
import pytest

from inference.bounds import expected_selection_size, kappa_2star
from inference.errors import PreconditionError, RegimeError
from inference.gaussian import asymptotic_cutoff, std_normal_quantile, std_normal_sf
from inference.model import Observation, ProblemParams, derive_seed, make_spike_vector
from inference.selectors import (
    SelectorKind,
    adaptive_rule,
    dyadic_round,
    dyadic_round_capped,
    one_sided_bar_rule,
    one_sided_hat_rule,
    plug_in_rule,
    select_adaptive,
    select_one_sided_bar,
    select_one_sided_hat,
    select_plug_in,
    select_two_sided_hat,
    two_sided_bar_rule,
    two_sided_hat_rule,
)


def _random_params(rng, n):
    for _ in range(n):
        d = int(rng.integers(50, 20000))
        s = int(rng.integers(1, d // 2))
        alpha = float(rng.uniform(0.01, 0.2))
        yield ProblemParams(
            d=d,
            s=s,
            a=float(rng.uniform(0.1, 12.0)),
            sigma=float(rng.uniform(0.2, 3.0)),
            alpha=alpha,
            alpha_prime=float(rng.uniform(0.05, 0.95)) * alpha,
            delta=float(rng.uniform(0.05, 0.99)),
        )


class TestOneSidedHat:

    def test_reference_cut(self, reference_params):
        assert one_sided_hat_rule(reference_params).threshold == pytest.approx(1.519244, abs=2e-6)

    def test_small_signal_uses_delta_branch(self, reference_params):
        rule = one_sided_hat_rule(reference_params.with_snr(0.5))
        assert rule.threshold == std_normal_quantile(0.7)
        assert rule.null_selection_probability() == pytest.approx(0.3, abs=1e-15)

    def test_direct_comparison(self):
        params = ProblemParams(d=2, s=1, a=1.0, sigma=1.0, alpha=0.05, alpha_prime=0.025, delta=0.7)
        obs = Observation(x=[10.0, -10.0], sigma=1.0)
        assert list(select_one_sided_hat(obs, params)) == [0]

    def test_ties_are_selected(self, reference_params):
        rule = one_sided_hat_rule(reference_params)
        obs = Observation(x=np.full(reference_params.d, rule.threshold), sigma=1.0)
        assert rule.select(obs).size == reference_params.d


class TestTwoSidedHat:

    def test_clamped_branch(self, reference_params):
        rule = two_sided_hat_rule(reference_params.with_snr(1e-6))
        assert rule.threshold == pytest.approx(1.036433, abs=2e-6)
        assert rule.null_selection_probability() == pytest.approx(0.3, abs=1e-12)

    def test_absolute_value(self, reference_params):
        params = ProblemParams(d=2, s=1, a=1e-6, sigma=1.0, alpha=0.05, alpha_prime=0.025, delta=0.7)
        obs = Observation(x=[0.1, -5.0], sigma=1.0)
        assert list(select_two_sided_hat(obs, params)) == [1]


class TestOneSidedBar:

    def test_low_branch(self, reference_params):
        rule = one_sided_bar_rule(reference_params)
        assert rule.kind == SelectorKind.ONE_SIDED_BAR_LOW
        assert rule.threshold == pytest.approx(0.524401, abs=1e-6)

    def test_high_branch_cut(self, reference_params):
        rule = one_sided_bar_rule(reference_params.with_snr(9.0))
        c = 2 * math.sqrt(math.pi * math.log(900 / 0.025))
        assert rule.kind == SelectorKind.ONE_SIDED_BAR_HIGH
        assert rule.threshold == pytest.approx(math.sqrt(2 * math.log(2 * 900 / (0.025 * c))), rel=1e-14)

    def test_half_sparse_boundary(self):
        params = ProblemParams(d=200, s=100, a=20.0, sigma=1.0, alpha=0.05, alpha_prime=0.025, delta=0.7)
        rule = one_sided_bar_rule(params)
        assert rule.threshold == pytest.approx(asymptotic_cutoff(200, 0.025, 100), rel=1e-15)

    def test_undefined_below_lowest_cutoff(self, reference_params):
        params = reference_params.with_snr(3.0)
        assert params.snr < kappa_2star(params)
        with pytest.raises(RegimeError):
            one_sided_bar_rule(params)
        assert one_sided_bar_rule(params, force=True).kind == SelectorKind.ONE_SIDED_BAR_LOW

    def test_two_sided_low_branch(self, reference_params):
        rule = two_sided_bar_rule(reference_params)
        assert rule.kind == SelectorKind.TWO_SIDED_BAR_LOW
        assert rule.threshold == pytest.approx(std_normal_quantile(0.85), rel=1e-15)


class TestAdaptive:

    def test_cut_closed_form(self):
        c = 2 * math.sqrt(math.pi * math.log(1000 / 0.025))
        expected = math.sqrt(2 * math.log(2000 / (0.025 * c)))
        assert adaptive_rule(1000, 0.05, 0.025).threshold == pytest.approx(expected, rel=1e-14)

    def test_monotone_in_dimension(self):
        assert adaptive_rule(10**6, 0.05, 0.025).threshold > adaptive_rule(10**3, 0.05, 0.025).threshold

    def test_empty_selection(self):
        obs = Observation(x=np.zeros(100), sigma=1.0)
        assert select_adaptive(obs, 0.05, 0.025).size == 0

    def test_level_check(self):
        with pytest.raises(PreconditionError):
            adaptive_rule(100, 0.05, 0.05)


class TestDyadicRound:

    @pytest.mark.parametrize("size,expected", [(0, 2), (1, 2), (2, 4), (3, 4), (5, 8), (8, 16), (100, 128)])
    def test_values(self, size, expected):
        assert dyadic_round(size, 1000) == expected

    def test_cap(self):
        assert dyadic_round_capped(600, 1000) == (512, True)
        assert dyadic_round_capped(511, 1000) == (512, False)

    def test_range_check(self):
        with pytest.raises(PreconditionError):
            dyadic_round(11, 10)


class TestPlugIn:

    def test_cut(self):
        assert plug_in_rule(1000).threshold == pytest.approx(3.71692, abs=1e-5)

    def test_strict_inequality(self):
        cut = plug_in_rule(1000).threshold
        x = np.zeros(1000)
        x[0] = cut
        x[1] = np.nextafter(cut, np.inf)
        assert list(select_plug_in(Observation(x=x, sigma=1.0))) == [1]

    def test_null_false_positives_match_binomial_mean(self):
        d, reps = 1000, 500
        rule = plug_in_rule(d)
        counts = np.array([
            rule.mask(np.random.default_rng(derive_seed(11, r)).standard_normal(d)).sum() for r in range(reps)
        ])
        p = float(std_normal_sf(rule.threshold))
        mean, se = d * p, math.sqrt(d * p * (1 - p) / reps)
        assert abs(counts.mean() - mean) <= 3 * se


class TestStructuralProperties:

    def test_null_rate_within_tolerance(self):
        rng = np.random.default_rng(2024)
        for params in _random_params(rng, 200):
            budget = 1 - params.delta + 1e-12
            assert one_sided_hat_rule(params).null_selection_probability() <= budget
            assert two_sided_hat_rule(params).null_selection_probability() <= budget

    def test_null_rate_of_asymptotic_rules(self, reference_params):
        for snr in (4.0, 6.0, 9.0):
            params = reference_params.with_snr(snr)
            assert one_sided_bar_rule(params).null_selection_probability() <= 0.3 + 1e-12
        for snr in (5.0, 6.0, 9.0):
            params = reference_params.with_snr(snr)
            assert two_sided_bar_rule(params).null_selection_probability() <= 0.3 + 1e-12
        assert adaptive_rule(1000, 0.05, 0.025).null_selection_probability() <= 0.3

    def test_separability(self, reference_params):
        rng = np.random.default_rng(5)
        z = rng.standard_normal(reference_params.d) + 2.0
        perturbed = z.copy()
        perturbed[1:] = rng.standard_normal(reference_params.d - 1) * 10
        for rule in (one_sided_hat_rule(reference_params), two_sided_hat_rule(reference_params),
                     adaptive_rule(1000, 0.05, 0.025), plug_in_rule(1000)):
            assert rule.mask(z)[0] == rule.mask(perturbed)[0]

    def test_raising_delta_never_enlarges_selection(self, reference_params):
        z = np.random.default_rng(8).standard_normal(reference_params.d) * 2
        for low, high in [(0.3, 0.7), (0.7, 0.95)]:
            small = ProblemParams(**{**reference_params.model_dump(), "a": 0.5, "delta": low})
            large = ProblemParams(**{**reference_params.model_dump(), "a": 0.5, "delta": high})
            for factory in (one_sided_hat_rule, two_sided_hat_rule):
                assert np.all(factory(large).mask(z) <= factory(small).mask(z))

    def test_expected_cardinality_bound(self, reference_params):
        reps = 500
        for snr in (2.0, 5.0, 9.0):
            params = reference_params.with_snr(snr)
            theta = make_spike_vector(params, snr)
            rule = one_sided_hat_rule(params)
            analytic = expected_selection_size(theta, rule.threshold, 1.0)
            assert analytic <= params.s + (params.d - params.s) * (1 - params.delta) + 1e-9

            counts = np.array([
                rule.mask(theta.theta + np.random.default_rng(derive_seed(3, r)).standard_normal(params.d)).sum()
                for r in range(reps)
            ])
            se = counts.std(ddof=1) / math.sqrt(reps)
            assert abs(counts.mean() - analytic) <= 3 * se

    def test_select_wrapper_matches_rule(self, reference_params):
        params = reference_params.with_snr(9.0)
        z = np.random.default_rng(2).standard_normal(params.d) * 3
        obs = Observation(x=z, sigma=1.0)
        assert np.array_equal(select_one_sided_bar(obs, params), one_sided_bar_rule(params).select(obs))
