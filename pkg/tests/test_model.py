"""Domain types: parameters, mean vectors, observations and confidence sets."""

import numpy as np
import pytest
from pydantic import ValidationError

from inference.errors import InvariantViolation
from inference.model import (
    MeanVector,
    Observation,
    ProblemParams,
    Side,
    SignPattern,
    SparseConfidenceSet,
    derive_seed,
    make_spike_vector,
    sample_observation,
)


class TestProblemParams:

    def test_snr(self, reference_params):
        assert reference_params.snr == 5.0
        assert reference_params.with_snr(7.5).a == 7.5

    def test_sparsity_above_dimension_rejected(self):
        with pytest.raises(ValidationError):
            ProblemParams(d=10, s=11, a=1, sigma=1, alpha=0.05, alpha_prime=0.01, delta=0.7)

    def test_alpha_prime_must_be_below_alpha(self):
        with pytest.raises(ValidationError):
            ProblemParams(d=10, s=2, a=1, sigma=1, alpha=0.05, alpha_prime=0.05, delta=0.7)

    @pytest.mark.parametrize("field,value", [("sigma", 0.0), ("a", -1.0), ("delta", 1.0), ("alpha", 0.0)])
    def test_ranges(self, reference_params, field, value):
        with pytest.raises(ValidationError):
            ProblemParams(**{**reference_params.model_dump(), field: value})

    def test_with_alpha_prime_revalidates(self, reference_params):
        assert reference_params.with_alpha_prime(0.01).alpha_prime == 0.01
        with pytest.raises(ValidationError):
            reference_params.with_alpha_prime(0.06)

    def test_with_snr_revalidates(self, reference_params):
        with pytest.raises(ValidationError):
            reference_params.with_snr(0.0)
        with pytest.raises(ValidationError):
            reference_params.with_snr(-2.0)


class TestMeanVector:

    def test_too_many_nonzeros(self):
        with pytest.raises(InvariantViolation):
            MeanVector(theta=[1.0, 1.0, 1.0], side=Side.ONE_SIDED, s=2, a=1.0)

    def test_one_sided_rejects_negative_entries(self):
        with pytest.raises(InvariantViolation):
            MeanVector(theta=[-2.0, 0.0], side=Side.ONE_SIDED, s=1, a=1.0)

    def test_two_sided_accepts_negative_entries(self):
        theta = MeanVector(theta=[-2.0, 0.0, 3.0], side=Side.TWO_SIDED, s=2, a=1.0)
        assert list(theta.support) == [0, 2]

    def test_entry_below_signal_level(self):
        with pytest.raises(InvariantViolation):
            MeanVector(theta=[0.5, 0.0], side=Side.TWO_SIDED, s=1, a=1.0)

    def test_theta_is_read_only(self):
        theta = MeanVector(theta=[1.0, 0.0], side=Side.ONE_SIDED, s=1, a=1.0)
        with pytest.raises(ValueError):
            theta.theta[0] = 5.0


class TestSpikeVector:

    def test_all_positive(self, reference_params):
        theta = make_spike_vector(reference_params, 5.0)
        assert theta.side == Side.ONE_SIDED
        assert np.all(theta.theta[:100] == 5.0)
        assert np.all(theta.theta[100:] == 0.0)

    def test_alternating(self, reference_params):
        theta = make_spike_vector(reference_params, 5.0, SignPattern.ALTERNATING)
        assert theta.side == Side.TWO_SIDED
        assert theta.theta[0] == 5.0 and theta.theta[1] == -5.0

    def test_snr_must_be_positive(self, reference_params):
        with pytest.raises(InvariantViolation):
            make_spike_vector(reference_params, 0.0)


class TestSampling:

    def test_derive_seed_is_deterministic_and_distinct(self):
        assert derive_seed(7, 1, 2) == derive_seed(7, 1, 2)
        assert len({derive_seed(7, k, r) for k in range(5) for r in range(50)}) == 250

    def test_sample_is_bit_identical(self, reference_params):
        theta = make_spike_vector(reference_params, 5.0)
        a = sample_observation(theta, 1.0, 123)
        b = sample_observation(theta, 1.0, 123)
        assert np.array_equal(a.x, b.x)

    def test_dimension_check(self, reference_params):
        obs = Observation(x=np.zeros(5), sigma=1.0)
        with pytest.raises(InvariantViolation):
            obs.check_dimension(reference_params)

    def test_non_finite_observation_rejected(self):
        with pytest.raises(ValidationError):
            Observation(x=[0.0, np.nan], sigma=1.0)


class TestSparseConfidenceSet:

    def _set(self):
        return SparseConfidenceSet(
            selected=[0, 2],
            lower=[1.0, 0.0, 0.5, 0.0],
            upper=[np.inf, 0.0, np.inf, 0.0],
        )

    def test_off_selection_must_be_degenerate(self):
        with pytest.raises(InvariantViolation):
            SparseConfidenceSet(selected=[0], lower=[0.0, 1.0], upper=[np.inf, 1.0])

    def test_lower_above_upper_rejected(self):
        with pytest.raises(InvariantViolation):
            SparseConfidenceSet(selected=[0], lower=[2.0], upper=[1.0])

    def test_contains_requires_support_inside_selection(self):
        conf_set = self._set()
        assert conf_set.contains([2.0, 0.0, 0.5, 0.0])
        assert not conf_set.contains([2.0, 0.0, 0.5, 1.0])   # support escapes S
        assert not conf_set.contains([0.5, 0.0, 0.5, 0.0])   # below L_0
        assert conf_set.contains([1.0, 0.0, 0.0 + 0.5, 0.0])

    def test_one_sided_class_membership(self):
        conf_set = self._set()
        assert conf_set.is_one_sided_valid(np.array([1.5, 0.0, 0.5, 0.0]))
        assert not conf_set.is_one_sided_valid(np.array([0.5, 0.0, 0.5, 0.0]))

    def test_size_and_mask(self):
        conf_set = self._set()
        assert conf_set.size == 2
        assert list(conf_set.selected_mask) == [True, False, True, False]


class TestSamplingMoments:

    def test_pooled_null_draws(self):
        theta = MeanVector(theta=np.zeros(1_000_000), side=Side.ONE_SIDED, s=1, a=1.0)
        x = sample_observation(theta, 1.0, 99).x
        assert abs(x.mean()) <= 4 / 1000
        assert x.var() == pytest.approx(1.0, rel=0.01)

    def test_noise_scales_with_sigma(self):
        theta = MeanVector(theta=np.zeros(200_000), side=Side.ONE_SIDED, s=1, a=1.0)
        x = sample_observation(theta, 2.0, 5).x
        assert x.var() == pytest.approx(4.0, rel=0.02)

    def test_first_coordinate_mean_over_replications(self):
        theta = MeanVector(theta=[5.0, 0.0], side=Side.ONE_SIDED, s=1, a=1.0)
        draws = np.array([sample_observation(theta, 1.0, derive_seed(17, r)).x for r in range(10_000)])
        assert abs(draws[:, 0].mean() - 5.0) <= 4e-2
        assert abs(draws[:, 1].mean()) <= 4e-2
        assert abs(np.corrcoef(draws[:, 0], draws[:, 1])[0, 1]) <= 4e-2


class TestSampleScript:

    def test_main_writes_files_and_logs(self, tmp_path, monkeypatch, caplog):
        from data import generate_data

        monkeypatch.setattr(generate_data, "DATA_DIR", tmp_path)
        with caplog.at_level("INFO", logger=generate_data.logger.name):
            generate_data.main()
        assert (tmp_path / "observation.csv").exists()
        assert (tmp_path / "theta.csv").exists()
        assert "dimension=1000" in caplog.text
