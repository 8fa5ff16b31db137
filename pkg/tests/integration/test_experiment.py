"""
实验框架测试
种子可复现性、并行合并与报告内容
"""
import logging

import pytest

from app.summation.analysis.experiment import (
    _chunks,
    build_report,
    run_experiment,
    run_trial,
    tally_outcome,
    trial_rng,
)
from app.summation.analysis.formulas import analytic_detection
from app.summation.analysis.statistics import wilson_interval
from app.summation.models.experiment import ExperimentSpec, TrialCounts
from app.summation.models.protocol import ProtocolParams

logger = logging.getLogger(__name__)

pytestmark = pytest.mark.integration

VOLATILE = {"wall_time", "spec"}


def spec_for(**overrides) -> ExperimentSpec:
    fields = dict(params=ProtocolParams(n=4), trials=24, seed=42)
    fields.update(overrides)
    return ExperimentSpec(**fields)


class TestReproducibility:
    """测试相同种子给出相同结果"""

    def test_trial_streams_independent(self):
        assert trial_rng(1, 0).random() != trial_rng(1, 1).random()
        assert trial_rng(1, 5).random() == trial_rng(1, 5).random()

    def test_run_trial_repeatable(self):
        spec = spec_for(adversary="tp-attack-2")
        first, x1, y1 = run_trial(spec, 3)
        second, x2, y2 = run_trial(spec, 3)
        assert (x1, y1) == (x2, y2)
        assert first == second

    def test_same_seed_same_report(self):
        a = run_experiment(spec_for(adversary="tp-attack-1"))
        b = run_experiment(spec_for(adversary="tp-attack-1"))
        assert a.model_dump(exclude=VOLATILE) == b.model_dump(exclude=VOLATILE)

    @pytest.mark.slow
    def test_independent_of_worker_count(self):
        """测试报告与并行进程数无关"""
        serial = run_experiment(spec_for(adversary="tp-attack-1", workers=1))
        parallel = run_experiment(spec_for(adversary="tp-attack-1", workers=3))
        assert serial.model_dump(exclude=VOLATILE) == parallel.model_dump(exclude=VOLATILE)
        assert parallel.spec.workers == 3


class TestAggregation:
    """测试计数与报告"""

    def test_chunks_cover_all_trials(self):
        for trials, workers in ((10, 3), (7, 7), (5, 8), (1, 4)):
            chunks = _chunks(trials, workers)
            covered = [t for start, stop in chunks for t in range(start, stop)]
            assert covered == list(range(trials))

    def test_tally_single_run(self):
        spec = spec_for()
        outcome, x, y = run_trial(spec, 0)
        counts = tally_outcome(outcome, x, y)
        assert counts.trials == 1
        assert counts.successes + sum(counts.aborts.values()) == 1
        assert set(counts.check_checked) == {"alice_ctrl", "alice_sift", "bob_ctrl", "bob_sift"}
        assert sum(counts.check_checked.values()) == 2 * spec.params.eve_check_groups

    def test_report_fields(self):
        """测试报告中的计数之和与区间"""
        report = run_experiment(spec_for())
        assert report.trials == 24
        assert report.successes + sum(report.abort_breakdown.values()) == 24
        assert report.detection_rate == 0.0
        assert report.ci95[0] == pytest.approx(0.0, abs=1e-12)
        assert 0.0 < report.ci95_half_width < 0.1
        assert report.analytic_prediction is None
        assert report.expected_both_sift_groups == 5

    def test_build_report_from_counts(self):
        counts = TrialCounts(trials=4, successes=1, aborts={"TpDishonest": 2, "InsufficientSiftGroups": 1})
        report = build_report(spec_for(adversary="tp-attack-1", trials=4), counts)
        assert report.detection_rate == 0.5
        assert report.insufficient_sift_rate == 0.25
        assert report.analytic_prediction == pytest.approx(1 - (7 / 8) ** 4)
        assert report.eve_inference_accuracy is None

    def test_fixed_inputs(self):
        spec = spec_for(x="1010", y="0110")
        _, x, y = run_trial(spec, 7)
        assert (x, y) == ("1010", "0110")


@pytest.mark.slow
@pytest.mark.acceptance
class TestConfidenceCalibration:
    """测试 95% 区间对解析检测率的覆盖"""

    @pytest.mark.parametrize("attack", ["tp-attack-1", "tp-attack-2"])
    def test_analytic_value_covered(self, attack):
        """测试 50 组各 10^3 次运行中，1 − (7/8)^nd 落在报告的 95% 区间内的比例不低于 0.9"""
        params = ProtocolParams(n=8)
        expected = analytic_detection(attack, params.honesty_check_groups)
        covered = 0
        for meta in range(50):
            report = run_experiment(ExperimentSpec(params=params, adversary=attack, trials=1_000,
                                                   seed=9_000 + meta, workers=4))
            detected = round(report.detection_rate * report.trials)
            low, high = wilson_interval(detected, report.trials, 0.95)
            assert (low, high) == pytest.approx(report.ci95)
            covered += low <= expected <= high
        logger.info(f"{attack}: analytic {expected:.4f} covered in {covered}/50 intervals")
        assert covered / 50 >= 0.9
