"""Monte Carlo harness and summary files."""

import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from inference.gaussian import std_normal_cdf, std_normal_quantile
from inference.intervals import MethodTag
from inference.model import ProblemParams
from simulation.harness import (
    CARDINALITY_COLUMNS,
    SUMMARY_COLUMNS,
    ExperimentSpec,
    binomial_se,
    cardinality_trace,
    mean_se,
    run_experiment,
    run_sensitivity,
    sensitivity_spec,
)
from simulation.reporting import read_summary, sidecar_path, summary_frame, write_summary


def _spec(params, **overrides):
    fields = dict(params=params, snr_grid=(3.0, 6.0), reps=40, seed=7, methods=(MethodTag.HAT, MethodTag.BONFERRONI))
    fields.update(overrides)
    return ExperimentSpec(**fields)


class TestExperimentSpec:

    def test_grid_must_increase(self, small_params):
        with pytest.raises(ValidationError):
            _spec(small_params, snr_grid=(6.0, 3.0))
        with pytest.raises(ValidationError):
            _spec(small_params, snr_grid=())

    def test_reps_and_seed_ranges(self, small_params):
        with pytest.raises(ValidationError):
            _spec(small_params, reps=0)
        with pytest.raises(ValidationError):
            _spec(small_params, seed=-1)

    def test_alpha_prime_grid_inside_level(self, small_params):
        with pytest.raises(ValidationError):
            _spec(small_params, alpha_prime_grid=(0.01, 0.05))
        assert _spec(small_params, alpha_prime_grid=(0.01, 0.02)).alpha_primes() == (0.01, 0.02)
        assert _spec(small_params).alpha_primes() == (small_params.alpha_prime,)

    def test_methods_deduplicated(self, small_params):
        spec = _spec(small_params, methods=("hat", "hat", "oracle"))
        assert spec.methods == (MethodTag.HAT, MethodTag.ORACLE)


class TestStatistics:

    @pytest.mark.parametrize("p", [0.0, 1.0])
    def test_binomial_se_at_edges(self, p):
        assert binomial_se(p, 100) == 0.0

    def test_binomial_se_interior(self):
        assert binomial_se(0.5, 100) == pytest.approx(0.05)

    def test_mean_se_single_value(self):
        assert mean_se(np.array([3.0])) == (3.0, 0.0)


class TestRunExperiment:

    def test_row_layout(self, small_params):
        summary = run_experiment(_spec(small_params), n_jobs=1)
        assert len(summary.rows) == 4
        assert list(summary_frame(summary).columns) == SUMMARY_COLUMNS

    def test_independent_of_workers_and_chunking(self, small_params):
        serial = summary_frame(run_experiment(_spec(small_params, chunk_size=7), n_jobs=1))
        parallel = summary_frame(run_experiment(_spec(small_params, chunk_size=40), n_jobs=2))
        assert serial.equals(parallel)

    def test_infeasible_rows_are_nan(self, small_params):
        summary = run_experiment(_spec(small_params), n_jobs=1)
        low = summary.row(MethodTag.HAT, 3.0)
        assert low.infeasible
        assert math.isnan(low.coverage_hat) and math.isnan(low.dist_mean)
        high = summary.row(MethodTag.HAT, 6.0)
        assert not high.infeasible and not math.isnan(high.coverage_hat)

    def test_forced_rows_carry_numbers(self, small_params):
        summary = run_experiment(_spec(small_params, force=True), n_jobs=1)
        low = summary.row(MethodTag.HAT, 3.0)
        assert low.infeasible
        assert 0.0 <= low.coverage_hat <= 1.0

    def test_bonferroni_matches_exact(self, small_params):
        reps = 400
        summary = run_experiment(_spec(small_params, reps=reps, methods=(MethodTag.BONFERRONI,)), n_jobs=1)
        for row in summary.rows:
            se = math.sqrt(row.coverage_exact * (1 - row.coverage_exact) / reps)
            assert abs(row.coverage_hat - row.coverage_exact) <= 3 * se
            assert row.card_mean == small_params.d

    def test_oracle_selects_support(self, small_params):
        summary = run_experiment(_spec(small_params, methods=(MethodTag.ORACLE,)), n_jobs=1)
        assert all(row.card_mean == small_params.s for row in summary.rows)
        assert all(row.card_exact == small_params.s for row in summary.rows)

    def test_undefined_threshold_keeps_other_cells(self):
        params = ProblemParams(d=50, s=1, a=3.0, sigma=1.0, alpha=0.5, alpha_prime=0.45, delta=0.7)
        methods = (MethodTag.BAR, MethodTag.HAT, MethodTag.BONFERRONI)
        for force in (False, True):
            summary = run_experiment(_spec(params, reps=20, methods=methods, force=force), n_jobs=1)
            assert len(summary.rows) == 6
            for snr in (3.0, 6.0):
                bar = summary.row(MethodTag.BAR, snr)
                assert bar.infeasible and math.isnan(bar.coverage_hat)
                assert "kappa_2star" in bar.reason
                for method in (MethodTag.HAT, MethodTag.BONFERRONI):
                    row = summary.row(method, snr)
                    assert not row.infeasible and 0.0 <= row.coverage_hat <= 1.0


class TestSummaryFiles:

    def test_header_and_sidecar(self, small_params, tmp_path):
        summary = run_experiment(_spec(small_params), n_jobs=1)
        path = write_summary(summary, tmp_path / "coverage.csv", command="sparseci simulate")
        header = path.read_text().splitlines()[0]
        assert header == ",".join(SUMMARY_COLUMNS)

        meta = json.loads(sidecar_path(path).read_text())
        assert meta["seed"] == 7 and meta["reps"] == 40
        assert meta["methods"] == ["hat", "bonferroni"]
        assert meta["command"] == "sparseci simulate"

        frame = read_summary(path)
        assert list(frame["infeasible"]) == [1, 0, 0, 0]
        assert np.isnan(frame.loc[0, "coverage_hat"])

    def test_reruns_are_byte_identical(self, small_params, tmp_path):
        first = write_summary(run_experiment(_spec(small_params), n_jobs=1), tmp_path / "a.csv")
        second = write_summary(run_experiment(_spec(small_params), n_jobs=1), tmp_path / "b.csv")
        assert first.read_bytes() == second.read_bytes()
        assert sidecar_path(first).read_bytes() == sidecar_path(second).read_bytes()


class TestSensitivity:

    def test_rows_per_alpha_prime(self, small_params):
        spec = sensitivity_spec(small_params, reps=10)
        summary = run_sensitivity(spec, n_jobs=1)
        assert len(summary.rows) == 2 * len(spec.alpha_prime_grid) * 2
        assert {row.alpha_prime for row in summary.rows} == set(spec.alpha_prime_grid)

    def test_default_grid_filled_in(self, small_params):
        summary = run_sensitivity(_spec(small_params, reps=5, snr_grid=(9.0,)), n_jobs=1)
        assert all(row.alpha_prime < small_params.alpha for row in summary.rows)
        assert len({row.alpha_prime for row in summary.rows}) > 1


class TestCardinality:

    def test_columns_and_agreement(self, small_params):
        spec = _spec(small_params, reps=200, methods=(MethodTag.HAT, MethodTag.PLUG_IN), snr_grid=(4.0, 8.0))
        summary = cardinality_trace(spec, n_jobs=1)
        assert list(summary_frame(summary).columns) == CARDINALITY_COLUMNS
        for row in summary.rows:
            assert abs(row.card_mean - row.card_exact) <= 3 * row.card_se + 1e-9

    def test_hat_cardinality_bounded(self, small_params):
        spec = _spec(small_params, reps=50, methods=(MethodTag.HAT,), snr_grid=(4.0, 6.0, 9.0))
        budget = small_params.s + (small_params.d - small_params.s) * (1 - small_params.delta)
        for row in cardinality_trace(spec, n_jobs=1).rows:
            assert row.card_exact <= budget


class TestSensitivityBelowCutoff:

    def test_moderate_point_reports_numbers(self, reference_params):
        spec = sensitivity_spec(reference_params, reps=20)
        assert spec.force
        summary = run_sensitivity(spec, n_jobs=1)
        for alpha_prime in spec.alpha_prime_grid:
            for method in (MethodTag.HAT, MethodTag.BAR):
                row = summary.row(method, 3.8, alpha_prime)
                assert row.infeasible
                assert 0.0 <= row.coverage_hat <= 1.0
                assert math.isfinite(row.dist_mean)

    def test_unforced_spec_is_forced(self, small_params):
        summary = run_sensitivity(_spec(small_params, reps=5, snr_grid=(3.0,), methods=(MethodTag.HAT,)), n_jobs=1)
        assert summary.spec.force
        assert all(not math.isnan(row.coverage_hat) for row in summary.rows)


class TestReferenceCardinality:

    @pytest.fixture
    def trace(self, reference_params):
        spec = ExperimentSpec(params=reference_params, snr_grid=(2.0, 3.0, 9.0, 10.0), reps=500, seed=3,
                              methods=(MethodTag.HAT, MethodTag.BAR, MethodTag.PLUG_IN), force=True)
        return cardinality_trace(spec, n_jobs=1)

    def test_flat_level_at_low_snr(self, trace, reference_params):
        d, s, delta = reference_params.d, reference_params.s, reference_params.delta
        for snr in (2.0, 3.0):
            flat = s * std_normal_cdf(snr - std_normal_quantile(delta)) + (d - s) * (1 - delta)
            for method in (MethodTag.HAT, MethodTag.BAR):
                row = trace.row(method, snr)
                assert row.card_exact == pytest.approx(flat, rel=1e-9)
                assert abs(row.card_mean - flat) <= 3 * row.card_se

    def test_reduces_to_sparsity_at_high_snr(self, trace, reference_params):
        for snr in (9.0, 10.0):
            for method in (MethodTag.HAT, MethodTag.BAR, MethodTag.PLUG_IN):
                assert trace.row(method, snr).card_mean == pytest.approx(reference_params.s, rel=0.02)
