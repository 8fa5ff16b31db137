"""
量子态代数测试
测试态矢量构造、张量积、CNOT 门和各测量基
"""
from collections import Counter

import numpy as np
import pytest

from app.core.exceptions import (
    CapacityExceeded,
    ControlEqualsTarget,
    DegenerateState,
    DimensionMismatch,
    FactorizationFailed,
    IndexOutOfRange,
    NonOrthonormalBasis,
    OverlappingPairs,
    WrongRegisterSize,
)
from app.summation.models.state import BellLabel, DoubleBellOutcome, EQUAL_LABEL_PAIRS, LogicalBasisLabel
from app.summation.quantum.qcore import (
    BELL_BASIS,
    SQRT1_2,
    X_DP_BASIS,
    Z_DP_BASIS,
    MeasurementBasis,
    StateVector,
    apply_logical_cnot,
    apply_physical_cnot,
    bell_state,
    double_bell_basis,
    double_bell_measure,
    encode,
    equal_up_to_global_phase,
    inner_product,
    logical_bell_states,
    max_deviation,
    measure,
    measure_logical,
    outcome_probabilities,
    permute_qubits,
    split_product,
    tensor,
)

pytestmark = pytest.mark.unit


class TestStateVector:
    """测试态矢量"""

    def test_basis_state_ordering(self):
        """测试比特 0 是最高位"""
        state = StateVector.basis_state("01")
        assert state.num_qubits == 2
        assert np.allclose(state.amplitudes, [0, 1, 0, 0])

    def test_amplitudes_read_only(self):
        """测试振幅数组不可修改"""
        state = encode(LogicalBasisLabel.ZDP0)
        with pytest.raises(ValueError):
            state.amplitudes[0] = 1.0

    def test_normalization_required(self):
        """测试未归一化的输入被拒绝"""
        with pytest.raises(DegenerateState, match="未归一化"):
            StateVector([1.0, 1.0])
        assert StateVector([1.0, 1.0], normalize=True).norm() == pytest.approx(1.0)

    def test_zero_vector_rejected(self):
        """测试零向量"""
        with pytest.raises(DegenerateState, match="范数过小"):
            StateVector([0.0, 0.0, 0.0, 0.0], normalize=True)

    def test_length_must_be_power_of_two(self):
        """测试振幅个数必须是 2 的幂"""
        with pytest.raises(WrongRegisterSize):
            StateVector([1.0, 0.0, 0.0])

    def test_capacity(self):
        """测试最多 6 个物理比特"""
        StateVector.basis_state("0" * 6)
        with pytest.raises(CapacityExceeded):
            StateVector.basis_state("0" * 7)
        with pytest.raises(CapacityExceeded):
            tensor(StateVector.basis_state("0000"), StateVector.basis_state("000"))

    def test_canonical_fixes_global_phase(self):
        """测试 canonical 去掉全局相位"""
        state = encode(LogicalBasisLabel.XDP_MINUS)
        rotated = StateVector(state.amplitudes * np.exp(0.7j))
        assert rotated != state
        assert rotated.canonical() == state

    def test_not_hashable(self):
        """测试态矢量不可哈希"""
        with pytest.raises(TypeError):
            hash(encode(LogicalBasisLabel.ZDP0))


class TestEncoding:
    """测试逻辑编码"""

    @pytest.mark.parametrize("label,amplitudes", [
        (LogicalBasisLabel.ZDP0, [0, 1, 0, 0]),
        (LogicalBasisLabel.ZDP1, [0, 0, 1, 0]),
        (LogicalBasisLabel.XDP_PLUS, [0, SQRT1_2, SQRT1_2, 0]),
        (LogicalBasisLabel.XDP_MINUS, [0, SQRT1_2, -SQRT1_2, 0]),
    ])
    def test_encode(self, label, amplitudes):
        """测试四个逻辑基态的物理振幅"""
        assert max_deviation(encode(label), np.array(amplitudes, dtype=complex)) < 1e-15

    def test_bell_states_orthonormal(self):
        """测试 Bell 态两两正交"""
        for a in BellLabel:
            for b in BellLabel:
                overlap = inner_product(bell_state(a), bell_state(b))
                assert abs(overlap) == pytest.approx(1.0 if a == b else 0.0, abs=1e-12)

    def test_tensor_order(self):
        """测试张量积中第一个因子占高位"""
        state = tensor(StateVector.basis_state("1"), StateVector.basis_state("0"))
        assert state == StateVector.basis_state("10")

    def test_inner_product_dimension_mismatch(self):
        """测试维度不一致的内积"""
        with pytest.raises(DimensionMismatch):
            inner_product(StateVector.basis_state("0"), StateVector.basis_state("00"))


class TestCnot:
    """测试物理与逻辑 CNOT"""

    def test_physical_cnot(self):
        """测试控制位为 1 时翻转目标位"""
        assert apply_physical_cnot(StateVector.basis_state("10"), 0, 1) == StateVector.basis_state("11")
        assert apply_physical_cnot(StateVector.basis_state("00"), 0, 1) == StateVector.basis_state("00")
        assert apply_physical_cnot(StateVector.basis_state("011"), 2, 0) == StateVector.basis_state("111")

    def test_physical_cnot_errors(self):
        """测试非法下标"""
        state = StateVector.basis_state("00")
        with pytest.raises(ControlEqualsTarget):
            apply_physical_cnot(state, 1, 1)
        with pytest.raises(IndexOutOfRange):
            apply_physical_cnot(state, 0, 2)

    @pytest.mark.parametrize("control", [LogicalBasisLabel.ZDP0, LogicalBasisLabel.ZDP1])
    @pytest.mark.parametrize("target", [LogicalBasisLabel.ZDP0, LogicalBasisLabel.ZDP1])
    def test_logical_cnot_truth_table(self, control, target):
        """测试逻辑 CNOT 在 Z_dp 基上的真值表"""
        state = tensor(encode(control), encode(target))
        result = apply_logical_cnot(state, (0, 1), (2, 3))
        expected_target = LogicalBasisLabel.from_bit(control.bit ^ target.bit)
        assert result == tensor(encode(control), encode(expected_target))

    def test_logical_cnot_creates_phi_plus(self):
        """测试 |+_dp⟩|0_dp⟩ → |Φ⁺_dp⟩"""
        state = tensor(encode(LogicalBasisLabel.XDP_PLUS), encode(LogicalBasisLabel.ZDP0))
        result = apply_logical_cnot(state, (0, 1), (2, 3))
        assert equal_up_to_global_phase(result, logical_bell_states()["Phi+"])

    def test_logical_cnot_overlap(self):
        """测试控制对与目标对重叠"""
        state = StateVector.basis_state("0101")
        with pytest.raises(OverlappingPairs):
            apply_logical_cnot(state, (0, 1), (1, 2))

    def test_permute_qubits(self):
        """测试比特重排"""
        state = StateVector.basis_state("0011")
        assert permute_qubits(state, (0, 2, 1, 3)) == StateVector.basis_state("0101")
        with pytest.raises(IndexOutOfRange):
            permute_qubits(state, (0, 0, 1, 2))


class TestMeasurement:
    """测试投影测量"""

    def test_bases_are_orthonormal(self):
        """测试内置基通过正交归一检查"""
        for basis in (Z_DP_BASIS, X_DP_BASIS, BELL_BASIS, double_bell_basis()):
            gram = basis.bra_matrix @ basis.bra_matrix.conj().T
            assert np.allclose(gram, np.eye(len(basis.vectors)))

    def test_non_orthonormal_basis_rejected(self):
        """测试非正交基"""
        vectors = [StateVector.basis_state("0"), StateVector([SQRT1_2, SQRT1_2])]
        with pytest.raises(NonOrthonormalBasis):
            MeasurementBasis("bad", vectors, ["a", "b"])

    def test_incomplete_basis_rejected(self):
        """测试不完备的基"""
        with pytest.raises(NonOrthonormalBasis, match="无法张满"):
            MeasurementBasis("half", [StateVector.basis_state("0")], ["a"])

    def test_deterministic_outcomes(self, rng):
        """测试本征态的测量结果是确定的"""
        for _ in range(20):
            label, state = measure_logical(encode(LogicalBasisLabel.ZDP1), Z_DP_BASIS, rng)
            assert label == LogicalBasisLabel.ZDP1
            assert state == encode(LogicalBasisLabel.ZDP1)
            label, _ = measure_logical(encode(LogicalBasisLabel.XDP_PLUS), X_DP_BASIS, rng)
            assert label == LogicalBasisLabel.XDP_PLUS

    def test_born_statistics(self, rng):
        """测试 |+_dp⟩ 的 Z_dp 测量频率"""
        counts = Counter(measure_logical(encode(LogicalBasisLabel.XDP_PLUS), Z_DP_BASIS, rng)[0]
                         for _ in range(10_000))
        assert set(counts) == {LogicalBasisLabel.ZDP0, LogicalBasisLabel.ZDP1}
        assert counts[LogicalBasisLabel.ZDP0] / 10_000 == pytest.approx(0.5, abs=0.03)

    def test_outcome_probabilities_sum_to_one(self):
        """测试概率归一"""
        state = tensor(encode(LogicalBasisLabel.XDP_PLUS), encode(LogicalBasisLabel.ZDP1))
        probabilities = outcome_probabilities(state, double_bell_basis())
        assert probabilities.sum() == pytest.approx(1.0)
        probabilities = outcome_probabilities(state, Z_DP_BASIS, (2, 3))
        assert probabilities[1] == pytest.approx(1.0)

    def test_partial_measurement_collapses_partner(self, rng):
        """测试测量纠缠对的一半后另一半随之塌缩"""
        phi = logical_bell_states()["Phi+"]
        label, collapsed = measure_logical(phi, Z_DP_BASIS, rng, (0, 1))
        _, rest = split_product(collapsed, (0, 1))
        assert rest == encode(label)

    def test_basis_size_mismatch(self, rng):
        """测试基的比特数与被测比特数不符"""
        with pytest.raises(WrongRegisterSize):
            measure(StateVector.basis_state("0101"), Z_DP_BASIS, rng, (0,))

    def test_leakage_outcome_raises(self, rng):
        """测试逻辑子空间之外的态"""
        with pytest.raises(DegenerateState, match="逻辑子空间之外"):
            measure_logical(StateVector.basis_state("00"), Z_DP_BASIS, rng)


class TestDoubleBell:
    """测试双 Bell 基测量"""

    def test_requires_four_qubits(self, rng):
        """测试寄存器大小检查"""
        with pytest.raises(WrongRegisterSize):
            double_bell_measure(encode(LogicalBasisLabel.ZDP0), rng)

    def test_plus_plus_gives_equal_labels(self, rng):
        """测试 |+_dp⟩|+_dp⟩ 只给出两个标签相同的结果"""
        state = tensor(encode(LogicalBasisLabel.XDP_PLUS), encode(LogicalBasisLabel.XDP_PLUS))
        samples = 10_000
        counts = Counter(double_bell_measure(state, rng)[0] for _ in range(samples))
        assert set(counts) <= set(EQUAL_LABEL_PAIRS)
        for pair in EQUAL_LABEL_PAIRS:
            assert counts[pair] / samples == pytest.approx(0.25, abs=0.02)

    @pytest.mark.parametrize("alice,bob,phi_type", [
        (LogicalBasisLabel.ZDP0, LogicalBasisLabel.ZDP0, True),
        (LogicalBasisLabel.ZDP1, LogicalBasisLabel.ZDP1, True),
        (LogicalBasisLabel.ZDP0, LogicalBasisLabel.ZDP1, False),
        (LogicalBasisLabel.ZDP1, LogicalBasisLabel.ZDP0, False),
    ])
    def test_sift_pairs(self, rng, alice, bob, phi_type):
        """测试 Z_dp 直积态的结果类型"""
        state = tensor(encode(alice), encode(bob))
        for _ in range(50):
            outcome, _ = double_bell_measure(state, rng)
            assert outcome.is_phi_type if phi_type else outcome.is_psi_type

    def test_sequential_matches_joint_basis(self, rng):
        """测试顺序测量与 16 个联合投影的分布一致"""
        state = tensor(encode(LogicalBasisLabel.XDP_PLUS), encode(LogicalBasisLabel.ZDP0))
        basis = double_bell_basis()
        expected = dict(zip(basis.labels, outcome_probabilities(state, basis)))
        samples = 8_000
        counts = Counter(double_bell_measure(state, rng)[0] for _ in range(samples))
        for label, p in expected.items():
            assert counts[label] / samples == pytest.approx(p, abs=0.03)

    def test_post_measurement_state(self, rng):
        """测试测量后的态是对应的 Bell 直积"""
        state = tensor(encode(LogicalBasisLabel.ZDP0), encode(LogicalBasisLabel.ZDP1))
        outcome, collapsed = double_bell_measure(state, rng)
        product = tensor(bell_state(outcome.first), bell_state(outcome.second))
        assert equal_up_to_global_phase(collapsed, permute_qubits(product, (0, 2, 1, 3)))


class TestSplitProduct:
    """测试直积分解"""

    def test_split_product(self):
        """测试直积态分解回两个因子"""
        a, b = encode(LogicalBasisLabel.XDP_MINUS), encode(LogicalBasisLabel.ZDP1)
        left, right = split_product(tensor(a, b), (0, 1))
        assert equal_up_to_global_phase(left, a)
        assert equal_up_to_global_phase(right, b)

    def test_entangled_state_fails(self):
        """测试纠缠态无法分解"""
        with pytest.raises(FactorizationFailed):
            split_product(logical_bell_states()["Psi-"], (0, 1))


def test_double_bell_outcome_bits():
    """公告比特编码"""
    outcome = DoubleBellOutcome(first=BellLabel.PHI_PLUS, second=BellLabel.PSI_MINUS)
    assert outcome.bits == "0011"
    assert str(outcome) == "phi+,psi-"
