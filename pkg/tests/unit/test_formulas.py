"""
解析公式测试
测试检测概率、量子比特效率和资源审计
"""
from fractions import Fraction

import pytest

from app.core.exceptions import UnsupportedAttack
from app.summation.analysis.formulas import (
    PER_GROUP_DETECTION,
    analytic_detection,
    audit_resource_counts,
    comparison_table,
    expected_classical_bits,
    expected_consumed_qubits,
    qubit_efficiency,
    ref20_efficiency,
)
from app.summation.models.protocol import ProtocolParams, ResourceTally

pytestmark = pytest.mark.unit


class TestDetectionProbability:
    """测试 TP 攻击的解析检测概率"""

    def test_per_group(self):
        assert PER_GROUP_DETECTION == Fraction(1, 8)

    @pytest.mark.parametrize("attack", ["tp-attack-1", "tp-attack-2"])
    @pytest.mark.parametrize("nd", [1, 8, 16, 32])
    def test_closed_form(self, attack, nd):
        """测试 1 − (7/8)^nd"""
        assert analytic_detection(attack, nd) == pytest.approx(1 - (7 / 8) ** nd, abs=1e-12)

    def test_values(self):
        assert analytic_detection("tp-attack-1", 0) == 0.0
        assert analytic_detection("tp-attack-1", 8) == pytest.approx(0.656391, abs=1e-6)
        assert analytic_detection("tp-attack-1", 16) == pytest.approx(0.881933, abs=1e-6)

    def test_monotonic(self):
        """测试检测概率随 nd 严格递增并趋于 1"""
        values = [analytic_detection("tp-attack-2", nd) for nd in range(0, 200)]
        assert all(a < b for a, b in zip(values, values[1:]))
        assert values[-1] == pytest.approx(1.0, abs=1e-10)

    def test_unsupported(self):
        """测试窃听者策略没有闭式"""
        with pytest.raises(UnsupportedAttack, match="没有解析检测概率"):
            analytic_detection("eve-double-cnot", 8)

    def test_negative_nd(self):
        with pytest.raises(ValueError, match="不能为负"):
            analytic_detection("tp-attack-1", -1)


class TestQubitEfficiency:
    """测试量子比特效率"""

    @pytest.mark.parametrize("r,d,delta,expected", [
        (1, 1, 1.0, Fraction(1, 48)),
        (2, 2, 2.0, Fraction(1, 66)),
        (1, 1, 0.5, Fraction(1, 45)),
    ])
    def test_this_protocol(self, r, d, delta, expected):
        assert qubit_efficiency(ProtocolParams(n=2, r=r, d=d, delta=delta)) == expected

    @pytest.mark.parametrize("r,d,delta,expected", [
        (1, 1, 1.0, Fraction(2, 321)),
        (2, 2, 2.0, Fraction(2, 348)),
    ])
    def test_three_party(self, r, d, delta, expected):
        assert ref20_efficiency(r, d, delta) == expected

    @pytest.mark.parametrize("r,d,delta", [(1, 1, 1.0), (3, 2, 1.5), (10, 10, 10.0)])
    def test_this_protocol_more_efficient(self, r, d, delta):
        """测试本协议效率始终高于三方协议"""
        assert qubit_efficiency(ProtocolParams(n=2, r=r, d=d, delta=delta)) > ref20_efficiency(r, d, delta)

    def test_efficiency_independent_of_n(self):
        assert qubit_efficiency(ProtocolParams(n=1)) == qubit_efficiency(ProtocolParams(n=64))

    def test_three_party_rejects_non_positive(self):
        with pytest.raises(ValueError):
            ref20_efficiency(0, 1, 1.0)

    def test_efficiency_matches_counts(self, params):
        """测试 η = n/(p+v)"""
        p = expected_consumed_qubits(params)
        v = expected_classical_bits(params)
        assert p == 336
        assert v == 48
        assert Fraction(params.n) / (p + v) == qubit_efficiency(params)


class TestResourceAudit:
    """测试资源计数审计"""

    def test_audit_passes(self, params):
        """测试 TP 部分精确为 4nq，均值为 6nq"""
        tallies = [
            ResourceTally(tp_qubits=224, user_qubits=user, classical_bits=48)
            for user in (108, 110, 112, 114, 116)
        ]
        audit = audit_resource_counts(params, tallies)
        assert audit.passed
        assert audit.tp_qubits_exact
        assert audit.mean_qubits == 336

    def test_audit_detects_wrong_tp_count(self, params):
        tallies = [ResourceTally(tp_qubits=222, user_qubits=114, classical_bits=48)] * 3
        audit = audit_resource_counts(params, tallies)
        assert not audit.tp_qubits_exact
        assert not audit.passed

    def test_audit_detects_wrong_classical_bits(self, params):
        tallies = [ResourceTally(tp_qubits=224, user_qubits=112, classical_bits=40)]
        assert not audit_resource_counts(params, tallies).classical_bits_exact

    def test_audit_requires_tallies(self, params):
        with pytest.raises(ValueError):
            audit_resource_counts(params, [])


def test_comparison_table():
    """对比表包含按参数求值的效率"""
    rows = {row["aspect"]: row for row in comparison_table(1, 1, 1.0)}
    assert len(rows) == 14
    assert rows["Number of communicants"]["this"] == "two"
    assert rows["TP's knowledge about the summation result"]["three_party"] == "Yes"
    assert rows["Qubit efficiency"]["this"].endswith("1/48")
    assert rows["Qubit efficiency"]["three_party"].endswith("2/321")
