"""
完整协议运行测试
诚实运行的正确性、密钥关系、角色划分、资源计数以及 TP 对结果的盲性
"""
import logging

import numpy as np
import pytest

from app.summation.analysis.experiment import run_experiment, run_trial
from app.summation.analysis.formulas import audit_resource_counts
from app.summation.adversaries import create_adversary
from app.summation.analysis.statistics import empirical_mutual_information, tp_view
from app.summation.models.channel import ChannelConfig
from app.summation.models.experiment import ExperimentSpec
from app.summation.models.protocol import ANNOUNCED_ROLES, AbortReason, GroupRole, ProtocolParams, xor_bits
from app.summation.protocol import run_protocol

logger = logging.getLogger(__name__)

pytestmark = pytest.mark.integration

X, Y, R = "10110100", "11010010", "01100110"


class TestHonestCorrectness:
    """诚实 TP、无窃听者"""

    def test_example_sum(self, channel):
        """测试示例输入在两种信道下都得到 R = x ⊕ y"""
        params = ProtocolParams(n=8, delta=8)
        for seed in range(5):
            outcome = run_protocol(params, X, Y, channel_cfg=channel, rng=np.random.default_rng(seed))
            assert outcome.verdict.success, str(outcome.verdict)
            assert outcome.verdict.result == R

    @pytest.mark.slow
    @pytest.mark.acceptance
    def test_random_inputs_never_wrong(self, channel):
        """测试 r = d = δ = 1 时 10^3 次随机输入运行的结果总是正确，且从不因检测而中止"""
        report = run_experiment(ExperimentSpec(params=ProtocolParams(n=8), channel=channel, trials=1_000,
                                               seed=99, workers=4))
        assert report.trials == 1_000
        logger.info(f"honest {channel.describe()}: {report.abort_breakdown}")
        assert report.correctness_failures == 0
        assert report.detection_rate == 0.0
        assert set(report.abort_breakdown) <= {"InsufficientSiftGroups"}

    def test_fixed_phase_channel(self):
        """测试固定相位信道"""
        outcome = run_protocol(ProtocolParams(n=4, delta=8), "1100", "1010",
                               channel_cfg=ChannelConfig.dephasing(fixed_phase=2.5),
                               rng=np.random.default_rng(1))
        assert outcome.verdict.result == "0110"


class TestTranscript:
    """测试运行记录"""

    @pytest.fixture
    def outcome(self):
        spec = ExperimentSpec(params=ProtocolParams(n=8, delta=8), seed=21, x=X, y=Y)
        outcome, _, _ = run_trial(spec, 0)
        assert outcome.verdict.success
        return outcome

    def test_roles(self, outcome):
        """测试各角色的组数"""
        assert len(outcome.transcript) == 8 * 14
        assert len(outcome.groups_with_role(GroupRole.EVE_CHECK)) == 8
        assert len(outcome.groups_with_role(GroupRole.TP_HONESTY_CHECK)) == 8
        assert len(outcome.groups_with_role(GroupRole.SUMMATION_KEY)) == 8

    def test_summation_groups_are_first_sift_groups(self, outcome):
        """测试求和组是剩余池中最靠前的双 SIFT 组"""
        pool = [g for g in outcome.transcript if g.role in (GroupRole.SUMMATION_KEY, GroupRole.SURPLUS)]
        sift = [g for g in pool if g.both_sift]
        assert all(g.role == GroupRole.SUMMATION_KEY for g in sift[:8])
        assert all(g.role == GroupRole.SURPLUS for g in sift[8:])

    def test_key_identity(self, outcome):
        """测试 C_T = K_A ⊕ K_B 且 R = C_A ⊕ C_B ⊕ C_T"""
        keys = outcome.keys
        assert keys.c_t == xor_bits(keys.k_a, keys.k_b)
        assert keys.c_a == xor_bits(keys.k_a, X)
        assert keys.c_b == xor_bits(keys.k_b, Y)
        assert xor_bits(keys.c_a, keys.c_b, keys.c_t) == R

    def test_eve_check_groups_not_announced(self, outcome):
        """测试窃听检测组没有公布结果"""
        for group in outcome.transcript:
            assert (group.tp_announcement is None) == (group.role == GroupRole.EVE_CHECK)

    def test_roles_after_step3_abort(self):
        """测试 Step 3 中止时未公布的组没有角色"""
        params = ProtocolParams(n=8, r=4)
        outcome = run_protocol(params, X, Y, adversary=create_adversary("eve-single-cnot"),
                               rng=np.random.default_rng(2))
        assert outcome.verdict.step == 3
        assert outcome.verdict.reason in (AbortReason.EVE_DETECTED_CTRL, AbortReason.EVE_DETECTED_SIFT)
        for group in outcome.transcript:
            assert group.tp_announcement is None
            assert group.role in (None, GroupRole.EVE_CHECK)
        assert sum(g.role == GroupRole.EVE_CHECK for g in outcome.transcript) == params.eve_check_groups

    def test_announcement_iff_announced_role(self, outcome):
        for group in outcome.transcript:
            assert (group.tp_announcement is not None) == (group.role in ANNOUNCED_ROLES)

    def test_honest_checks_pass(self, outcome):
        for group in outcome.groups_with_role(GroupRole.TP_HONESTY_CHECK):
            assert group.check_result.value in ("pass", "not-checked")

    def test_no_key_guess_for_honest_tp(self, outcome):
        assert outcome.tp_key_guess is None
        assert outcome.ancilla_log == []


@pytest.mark.slow
class TestStatisticalProperties:
    """多次运行的统计性质"""

    def test_both_sift_group_count(self):
        """测试剩余池中双 SIFT 组的平均数为 n + nδ/4"""
        report = run_experiment(ExperimentSpec(params=ProtocolParams(n=8), trials=10_000, seed=5, workers=4))
        assert report.expected_both_sift_groups == 10
        # 池中 40 组各以 1/4 概率为双 SIFT：标准误 sqrt(7.5 / 10^4)，取 3 倍
        assert report.mean_both_sift_groups == pytest.approx(10, abs=3 * (7.5 / 10_000) ** 0.5)

    def test_resource_counts(self):
        """测试消耗的量子比特均值为 6nq，经典比特恰为 6n"""
        params = ProtocolParams(n=8)
        spec = ExperimentSpec(params=params, trials=150, seed=8)
        tallies = [run_trial(spec, trial)[0].resources for trial in range(spec.trials)]
        audit = audit_resource_counts(params, tallies)
        assert audit.passed, audit
        assert audit.expected_qubits == 336

    def test_tp_learns_nothing_about_sum(self):
        """测试 TP 的视图与求和结果之间的经验互信息接近 0"""
        spec = ExperimentSpec(params=ProtocolParams(n=8, delta=8), trials=300, seed=13)
        pairs = []
        for trial in range(spec.trials):
            outcome, x, y = run_trial(spec, trial)
            if outcome.verdict.success:
                pairs.extend(zip(xor_bits(x, y), tp_view(outcome)))
        assert len(pairs) > 1_000
        assert empirical_mutual_information(pairs) < 0.01
