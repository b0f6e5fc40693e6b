import math

import numpy as np
import pytest
from pydantic import ValidationError

import config
from bench.risk_bench import BenchPlan, RiskBench, RiskReport, calibrate_kappa, run_bench
from needlets.besov_models import BesovParams
from utils.errors import RateAssertionError, ValidationFailure

SMOOTH = BesovParams(r=2, pi=2, q=2)
SPARSE = BesovParams(r=2.5, pi=1, q=2)


def _plan(**overrides) -> BenchPlan:
    fields = dict(besov=SMOOTH, n_grid=[4, 16, 64, 256], replications=50, j_max=4, seed=3)
    fields.update(overrides)
    return BenchPlan(**fields)


def _report(**overrides) -> RiskReport:
    fields = dict(
        n_grid=[10, 100, 1000, 10000], risk_mean=[1.0, 0.2, 0.05, 0.01], risk_se=[0.1] * 4,
        worst_risk=[1.2, 0.3, 0.06, 0.02], kept_fraction=[0.5] * 4, alpha_theory=2 / 3,
        zone="regular", slope_fit=-0.66, intercept=0.0, r_squared=0.99, fit_flagged=False, kappa=1.0,
    )
    fields.update(overrides)
    return RiskReport(**fields)


class TestBenchPlan:

    def test_defaults(self):
        plan = _plan(j_max=None)
        assert plan.top_level == 4
        assert plan.loss_p == 2.0
        assert plan.truths_per_n == 8
        assert plan.truth_profile == "extremal"
        assert plan.kappa is None
        assert plan.gamma == config.BENCH_GAMMA
        assert plan.levels_at(1024) == 5
        assert plan.estimator(1024, kappa=0.5).J_n == 5

    def test_estimator_needs_a_kappa(self):
        with pytest.raises(ValidationFailure):
            _plan().estimator(1024)
        assert _plan(kappa=2.0).estimator(1024).threshold == pytest.approx(2.0 / 1024)

    @pytest.mark.parametrize("bad", [
        {"n_grid": [4, 16, 64]},
        {"n_grid": [4, 16, 16, 64]},
        {"n_grid": [0, 16, 64, 256]},
        {"replications": 49},
        {"besov": BesovParams(r=1.5, pi=1, q=2)},
        {"loss_p": 0.5},
        {"colour": "red"},
        {"j_max": 3},
        {"gamma": 1.0},
        {"block_norm": "count"},
    ])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValidationError):
            _plan(**bad)

    def test_round_trips_through_json(self):
        plan = _plan(kappa=1.5, truths_per_n=4)
        again = BenchPlan.model_validate_json(plan.model_dump_json())
        assert again == plan


class TestRiskReport:

    def test_rejects_non_positive_risk(self):
        with pytest.raises(ValidationError):
            _report(risk_mean=[1.0, 0.0, 0.1, 0.1])

    def test_rate_assertion(self):
        report = _report(slope_fit=-0.6)
        assert report.slope_error() == pytest.approx(0.1)
        report.assert_rate(0.25)
        with pytest.raises(RateAssertionError):
            report.assert_rate(0.05)

    def test_zero_exponent_uses_absolute_error(self):
        report = _report(alpha_theory=0.0, zone="sup", slope_fit=-0.1)
        assert report.slope_error() == pytest.approx(0.1)
        report.assert_rate(0.25)
        with pytest.raises(RateAssertionError):
            report.assert_rate(0.05)


class _SameTruth(RiskBench):
    def _truth(self, g):
        return super()._truth(0)


class _OneLoudTruth(RiskBench):
    def _truth(self, g):
        base = super()._truth(0)
        return base.scaled(10.0) if g == 3 else base


class TestRun:

    def test_small_plan(self, system4):
        report = RiskBench(_plan(), threads=2, system=system4).run()
        assert report.n_grid == [4, 16, 64, 256]
        assert all(r > 0 for r in report.risk_mean)
        assert all(w >= m for w, m in zip(report.worst_risk, report.risk_mean))
        assert all(0.0 <= k <= 1.0 for k in report.kept_fraction)
        assert report.alpha_theory == pytest.approx(2 / 3)
        assert report.zone == "regular"
        assert math.isfinite(report.slope_fit)

    def test_calibrates_kappa_when_plan_leaves_it_open(self, system4):
        report = RiskBench(_plan(), threads=2, system=system4).run()
        expected = RiskBench(_plan(), threads=1, system=system4).calibrate(config.BENCH_GAMMA)
        assert report.kappa_calibrated
        assert report.kappa == expected.kappa

    def test_explicit_kappa_is_recorded(self, system4):
        report = RiskBench(_plan(kappa=1.5), threads=2, system=system4).run()
        assert report.kappa == 1.5
        assert not report.kappa_calibrated

    def test_thread_count_does_not_change_results(self, system4):
        one = RiskBench(_plan(), threads=1, system=system4).run()
        eight = RiskBench(_plan(), threads=8, system=system4).run()
        assert one.model_dump() == eight.model_dump()

    def test_seed_changes_results(self, system4):
        a = RiskBench(_plan(seed=1, kappa=1.0), threads=2, system=system4).run()
        b = RiskBench(_plan(seed=2, kappa=1.0), threads=2, system=system4).run()
        assert a.risk_mean != b.risk_mean

    def test_noiseless_bias_decreases_with_level(self, system5):
        plan = _plan(noiseless=True, kappa=0.0, j_max=5)
        report = RiskBench(plan, threads=2, system=system5).run()
        assert np.all(np.diff(report.risk_mean) < 0)

    def test_fixed_truth_without_noise_has_no_spread(self, system5):
        plan = _plan(noiseless=True, fixed_truth=True, kappa=0.0, j_max=5)
        report = RiskBench(plan, threads=2, system=system5).run()
        assert report.risk_se == [0.0] * 4
        assert report.worst_risk == pytest.approx(report.risk_mean, rel=1e-12)

    def test_worst_risk_is_the_worst_truth(self, system5):
        plan = _plan(noiseless=True, kappa=0.0, j_max=5)
        base = _SameTruth(plan, threads=2, system=system5).run()
        loud = _OneLoudTruth(plan, threads=2, system=system5).run()
        # κ = 0 is linear, so the truth scaled by 10 has 100 times the loss
        assert loud.worst_risk == pytest.approx([100 * r for r in base.risk_mean], rel=1e-9)
        # 6 of the 50 replications (rep mod 8 == 3) run on the loud truth
        assert loud.risk_mean == pytest.approx([r * (44 + 600) / 50 for r in base.risk_mean], rel=1e-9)

    def test_truths_cycle_over_replications(self, system4):
        bench = RiskBench(_plan(kappa=1.0), threads=1, system=system4)
        assert bench.truth_count == 8
        assert bench._truth(2).equals(RiskBench(_plan(kappa=1.0), system=system4)._truth(2))
        assert not bench._truth(2).equals(bench._truth(3))
        assert RiskBench(_plan(fixed_truth=True), system=system4).truth_count == 1

    def test_thresholding_beats_the_linear_estimator_on_sparse_truths(self, system4):
        calibrated = RiskBench(_plan(besov=SPARSE), threads=2, system=system4).run()
        linear = RiskBench(_plan(besov=SPARSE, kappa=0.0), threads=2, system=system4).run()
        for t, lin in zip(calibrated.risk_mean, linear.risk_mean):
            assert t <= 1.5 * lin
        assert calibrated.risk_mean[-1] < linear.risk_mean[-1]

    def test_sup_norm_loss(self, system4):
        report = RiskBench(_plan(loss_p=math.inf, kappa=1.0), threads=2, system=system4).run()
        assert report.zone == "sup"
        assert report.alpha_theory == pytest.approx(0.25)
        assert all(r > 0 for r in report.risk_mean)

    def test_builds_its_own_system(self):
        bench = RiskBench(_plan(j_max=2, n_grid=[1, 2, 4, 8]), threads=1)
        assert bench.system.j_max == 2
        assert bench.audit.grid_points == [6, 28, 120]

    def test_module_helper(self):
        plan = _plan(j_max=2, n_grid=[1, 2, 4, 8])
        assert run_bench(plan, threads=2).model_dump() == RiskBench(plan, threads=1).run().model_dump()


class TestCalibrate:

    def test_loose_target_gives_small_kappa(self, system4):
        bench = RiskBench(_plan(), threads=2, system=system4)
        loose = bench.calibrate(0.5, replications=50)
        tight = bench.calibrate(0.01, replications=50)
        assert not loose.exhausted and not tight.exhausted
        assert loose.frequency < 0.5
        assert tight.frequency < 0.01
        assert loose.kappa <= tight.kappa
        assert loose.kappa < 1.0
        assert tight.n == 256

    def test_monotone_in_target(self, system4):
        bench = RiskBench(_plan(), threads=2, system=system4)
        kappas = [bench.calibrate(g, replications=50).kappa for g in (0.5, 0.2, 0.05, 0.01)]
        assert kappas == sorted(kappas)

    def test_reproducible_across_seeds(self, system4):
        kappas = [
            RiskBench(_plan(seed=seed), threads=4, system=system4).calibrate(0.01, replications=200).kappa
            for seed in range(5)
        ]
        mid = float(np.median(kappas))
        assert all(abs(k - mid) <= 0.2 * mid for k in kappas)

    def test_fresh_noise_stays_under_one_percent(self, system4):
        kappa = RiskBench(_plan(seed=0), threads=4, system=system4).calibrate(0.005, replications=200).kappa
        fresh = RiskBench(_plan(seed=1), threads=4, system=system4).noise_ratios(200)
        assert np.mean(fresh > kappa) < 0.01

    def test_noise_ratios_follow_the_block_normalisation(self, system4):
        effective = RiskBench(_plan(), threads=1, system=system4).noise_ratios(1)
        target = RiskBench(_plan(block_norm="target"), threads=1, system=system4).noise_ratios(1)
        assert effective.shape == target.shape
        assert not np.allclose(effective, target)

    def test_exhausted_grid(self, system4):
        bench = RiskBench(_plan(), threads=1, system=system4)
        result = bench.calibrate(0.01, replications=50, kappa_grid=np.array([1e-8, 1e-7]))
        assert result.exhausted
        assert result.kappa == 1e-7
        assert bench.audit.warnings

    def test_target_range(self, system4):
        with pytest.raises(ValidationFailure):
            RiskBench(_plan(), system=system4).calibrate(1.0)

    def test_module_helper(self):
        result = calibrate_kappa(_plan(j_max=2, n_grid=[1, 2, 4, 8]), 0.2, replications=50)
        assert 0.0 < result.kappa
        assert result.gamma_target == 0.2


@pytest.mark.slow
class TestReferencePlan:

    def test_regular_zone_slope(self):
        plan = BenchPlan(besov=SMOOTH, loss_p=2.0, n_grid=[256, 1024, 4096, 16384], replications=100, seed=0)
        report = RiskBench(plan).run()
        assert report.kappa_calibrated
        assert report.slope_error() <= 0.25
        assert not report.fit_flagged
        inversions = [
            i for i in range(3)
            if report.risk_mean[i + 1] > report.risk_mean[i]
        ]
        assert len(inversions) <= 1
        for i in inversions:
            assert report.risk_mean[i + 1] - report.risk_mean[i] <= 2 * (report.risk_se[i] + report.risk_se[i + 1])
