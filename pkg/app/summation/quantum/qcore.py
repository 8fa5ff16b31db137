"""
小寄存器量子态代数
精确的态矢量构造、张量积、CNOT 门以及协议所需基下的投影测量

下标约定：物理比特 0..m-1 对应论文中的 1..m，计算基索引的最高位是比特 0，
即 |01⟩ 的振幅位于 (0, 1, 0, 0) 的第二个位置。
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np

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
from app.summation.models.state import BellLabel, DoubleBellOutcome, LogicalBasisLabel

logger = logging.getLogger(__name__)

MAX_QUBITS = 6
NORM_TOLERANCE = 1e-9
SQRT1_2 = 1.0 / math.sqrt(2.0)


class StateVector:
    """
    不可变的归一化纯态

    所有操作都返回新的态；振幅数组被设置为只读。
    """

    __slots__ = ("_amplitudes", "_num_qubits")

    def __init__(self, amplitudes: Sequence[complex] | np.ndarray, normalize: bool = False):
        """
        Args:
            amplitudes: 2^m 个复振幅
            normalize: 为 True 时先归一化，否则要求输入已归一化

        Raises:
            WrongRegisterSize: 长度不是 2 的幂
            CapacityExceeded: 超过 6 个物理比特
            DegenerateState: 范数过小或未归一化
        """
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        size = amps.shape[0]
        num_qubits = size.bit_length() - 1
        if size < 2 or (1 << num_qubits) != size:
            raise WrongRegisterSize(f"振幅个数必须是2的幂: {size}")
        if num_qubits > MAX_QUBITS:
            raise CapacityExceeded(f"寄存器最多{MAX_QUBITS}个物理比特: {num_qubits}")

        norm = float(np.linalg.norm(amps))
        if norm < NORM_TOLERANCE:
            raise DegenerateState(f"态矢量范数过小: {norm:.3e}")
        if normalize:
            amps = amps / norm
        elif abs(norm - 1.0) > NORM_TOLERANCE:
            raise DegenerateState(f"态矢量未归一化: |ψ| = {norm:.12f}")

        amps.setflags(write=False)
        self._amplitudes = amps
        self._num_qubits = num_qubits

    @property
    def num_qubits(self) -> int:
        return self._num_qubits

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    def norm(self) -> float:
        return float(np.linalg.norm(self._amplitudes))

    def as_tensor(self) -> np.ndarray:
        """每个物理比特一个轴的 (2,)*m 视图"""
        return self._amplitudes.reshape((2,) * self._num_qubits)

    def canonical(self) -> "StateVector":
        """固定全局相位：第一个非零振幅为正实数"""
        nonzero = np.flatnonzero(np.abs(self._amplitudes) > NORM_TOLERANCE)
        first = self._amplitudes[nonzero[0]]
        phase = first / abs(first)
        return StateVector(self._amplitudes / phase, normalize=True)

    @classmethod
    def basis_state(cls, bits: str) -> "StateVector":
        """计算基态，例如 basis_state("01") = |01⟩"""
        amps = np.zeros(1 << len(bits), dtype=np.complex128)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StateVector):
            return NotImplemented
        return self._num_qubits == other._num_qubits and bool(
            np.allclose(self._amplitudes, other._amplitudes, atol=NORM_TOLERANCE, rtol=0.0)
        )

    __hash__ = None

    def __repr__(self) -> str:
        terms = [
            f"({amp.real:+.4f}{amp.imag:+.4f}j)|{i:0{self._num_qubits}b}⟩"
            for i, amp in enumerate(self._amplitudes)
            if abs(amp) > NORM_TOLERANCE
        ]
        return "StateVector(" + " ".join(terms) + ")"


class MeasurementBasis:
    """k 个物理比特上的正交归一基，附带每个基矢的标签"""

    def __init__(self, name: str, vectors: Sequence[StateVector], labels: Sequence[object]):
        if len(vectors) != len(labels):
            raise ValueError("基矢个数与标签个数不一致")
        self.name = name
        self.vectors = tuple(vectors)
        self.labels = tuple(labels)
        self.num_qubits = vectors[0].num_qubits
        # 行为 ⟨b_i|，测量时直接左乘
        self._bra_matrix = np.conj(np.stack([v.amplitudes for v in vectors]))
        validate_basis(self)

    @property
    def bra_matrix(self) -> np.ndarray:
        return self._bra_matrix

    def __repr__(self) -> str:
        return f"MeasurementBasis({self.name}, {len(self.vectors)} vectors)"


def validate_basis(basis: MeasurementBasis) -> None:
    """
    检查基矢两两正交归一且张满被测子系统

    Raises:
        NonOrthonormalBasis: 基不满足正交归一完备性
    """
    dimension = 1 << basis.num_qubits
    if any(v.num_qubits != basis.num_qubits for v in basis.vectors):
        raise NonOrthonormalBasis(f"{basis.name} 基矢的比特数不一致")
    if len(basis.vectors) != dimension:
        raise NonOrthonormalBasis(
            f"{basis.name} 基矢个数 {len(basis.vectors)} 无法张满 {dimension} 维空间"
        )
    gram = basis.bra_matrix @ basis.bra_matrix.conj().T
    deviation = float(np.max(np.abs(gram - np.eye(dimension))))
    if deviation > NORM_TOLERANCE:
        raise NonOrthonormalBasis(f"{basis.name} 基不是正交归一的，偏差 {deviation:.3e}")


_LOGICAL_AMPLITUDES = {
    LogicalBasisLabel.ZDP0: (0.0, 1.0, 0.0, 0.0),
    LogicalBasisLabel.ZDP1: (0.0, 0.0, 1.0, 0.0),
    LogicalBasisLabel.XDP_PLUS: (0.0, SQRT1_2, SQRT1_2, 0.0),
    LogicalBasisLabel.XDP_MINUS: (0.0, SQRT1_2, -SQRT1_2, 0.0),
}

_BELL_AMPLITUDES = {
    BellLabel.PHI_PLUS: (SQRT1_2, 0.0, 0.0, SQRT1_2),
    BellLabel.PHI_MINUS: (SQRT1_2, 0.0, 0.0, -SQRT1_2),
    BellLabel.PSI_PLUS: (0.0, SQRT1_2, SQRT1_2, 0.0),
    BellLabel.PSI_MINUS: (0.0, SQRT1_2, -SQRT1_2, 0.0),
}


def encode(label: LogicalBasisLabel) -> StateVector:
    """逻辑基标签编码为两个物理比特: |0_dp⟩=|01⟩, |1_dp⟩=|10⟩, |±_dp⟩=(|01⟩±|10⟩)/√2"""
    return StateVector(_LOGICAL_AMPLITUDES[LogicalBasisLabel(label)])


def bell_state(label: BellLabel) -> StateVector:
    return StateVector(_BELL_AMPLITUDES[BellLabel(label)])


def _check_capacity(num_qubits: int) -> None:
    if num_qubits > MAX_QUBITS:
        raise CapacityExceeded(f"组合寄存器{num_qubits}个比特，超过上限{MAX_QUBITS}")


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker 积，a 的比特成为高位（靠前的下标）"""
    _check_capacity(a.num_qubits + b.num_qubits)
    return StateVector(np.kron(a.amplitudes, b.amplitudes), normalize=True)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """⟨a|b⟩，对第一个参数共轭线性"""
    if a.num_qubits != b.num_qubits:
        raise DimensionMismatch(f"维度不一致: {a.num_qubits} vs {b.num_qubits}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def _check_index(s: StateVector, index: int) -> None:
    if not 0 <= index < s.num_qubits:
        raise IndexOutOfRange(f"比特下标{index}超出寄存器范围[0, {s.num_qubits})")


def apply_physical_cnot(s: StateVector, control: int, target: int) -> StateVector:
    """物理 CNOT：控制位为 1 的计算基态翻转目标位"""
    _check_index(s, control)
    _check_index(s, target)
    if control == target:
        raise ControlEqualsTarget(f"控制位与目标位相同: {control}")

    psi = s.as_tensor().copy()
    selector = [slice(None)] * s.num_qubits
    selector[control] = 1
    target_axis = target if target < control else target - 1
    psi[tuple(selector)] = np.flip(psi[tuple(selector)], axis=target_axis)
    return StateVector(psi.reshape(-1), normalize=True)


def apply_logical_cnot(
    s: StateVector,
    control_pair: tuple[int, int],
    target_pair: tuple[int, int],
) -> StateVector:
    """
    逻辑 CNOT：|1_dp⟩_c|b_dp⟩_t → |1_dp⟩_c|b̄_dp⟩_t

    由控制对第一个物理比特出发、分别作用于目标对两个比特的两次物理 CNOT 实现。
    |1_dp⟩=|10⟩ 的第一个比特为 1，同时翻转目标对两比特恰好交换 |01⟩↔|10⟩。
    """
    indices = (*control_pair, *target_pair)
    for index in indices:
        _check_index(s, index)
    if len(set(indices)) != 4:
        raise OverlappingPairs(f"控制对{control_pair}与目标对{target_pair}必须是四个不同的比特")

    control = control_pair[0]
    result = apply_physical_cnot(s, control, target_pair[0])
    return apply_physical_cnot(result, control, target_pair[1])


def permute_qubits(s: StateVector, order: Sequence[int]) -> StateVector:
    """新寄存器的第 k 个比特取自原寄存器的 order[k]"""
    if sorted(order) != list(range(s.num_qubits)):
        raise IndexOutOfRange(f"无效的比特排列: {tuple(order)}")
    return StateVector(np.transpose(s.as_tensor(), order).reshape(-1), normalize=True)


def _split_axes(s: StateVector, qubits: Sequence[int]) -> tuple[np.ndarray, list[int]]:
    """把被测比特移到最前，返回 (2^k × 2^(m-k)) 矩阵和其余比特的下标"""
    for index in qubits:
        _check_index(s, index)
    if len(set(qubits)) != len(qubits):
        raise IndexOutOfRange(f"比特下标重复: {tuple(qubits)}")
    rest = [q for q in range(s.num_qubits) if q not in qubits]
    moved = np.transpose(s.as_tensor(), list(qubits) + rest)
    return moved.reshape(1 << len(qubits), -1), rest


def _join_axes(part: np.ndarray, remainder: np.ndarray, qubits: Sequence[int], rest: Sequence[int]) -> np.ndarray:
    joint = np.outer(part, remainder).reshape((2,) * (len(qubits) + len(rest)))
    inverse = np.argsort(list(qubits) + list(rest))
    return np.transpose(joint, inverse).reshape(-1)


def outcome_probabilities(
    s: StateVector,
    basis: MeasurementBasis,
    qubits: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """Born 概率 p_i = ||⟨b_i|ψ⟩||²（对其余比特求和）"""
    qubits = tuple(range(s.num_qubits)) if qubits is None else tuple(qubits)
    if len(qubits) != basis.num_qubits:
        raise WrongRegisterSize(f"{basis.name} 作用于{basis.num_qubits}个比特，给定{len(qubits)}个")
    matrix, _ = _split_axes(s, qubits)
    projected = basis.bra_matrix @ matrix
    return np.sum(np.abs(projected) ** 2, axis=1)


def _sample(probabilities: np.ndarray, rng: np.random.Generator) -> int:
    cumulative = np.cumsum(probabilities)
    outcome = int(np.searchsorted(cumulative, rng.random(), side="right"))
    # 舍入误差不能落到零概率结果上
    return min(outcome, int(np.flatnonzero(probabilities > NORM_TOLERANCE**2)[-1]))


def measure(
    s: StateVector,
    basis: MeasurementBasis,
    rng: np.random.Generator,
    qubits: Optional[Sequence[int]] = None,
) -> tuple[int, StateVector]:
    """
    在子系统上做投影测量

    Args:
        s: 被测态
        basis: 正交归一测量基
        rng: 注入的随机源
        qubits: 被测物理比特（默认整个寄存器）

    Returns:
        (结果下标, 塌缩并重新归一化后的态)

    Raises:
        DegenerateState: 态范数过小
        WrongRegisterSize: 基的比特数与 qubits 不符
    """
    qubits = tuple(range(s.num_qubits)) if qubits is None else tuple(qubits)
    if len(qubits) != basis.num_qubits:
        raise WrongRegisterSize(f"{basis.name} 作用于{basis.num_qubits}个比特，给定{len(qubits)}个")
    if s.norm() < NORM_TOLERANCE:
        raise DegenerateState("被测态范数过小")

    matrix, rest = _split_axes(s, qubits)
    projected = basis.bra_matrix @ matrix
    probabilities = np.sum(np.abs(projected) ** 2, axis=1)
    total = float(probabilities.sum())
    if abs(total - 1.0) > NORM_TOLERANCE:
        raise NonOrthonormalBasis(f"{basis.name} 的结果概率之和为 {total:.12f}")

    outcome = _sample(probabilities / total, rng)
    remainder = projected[outcome]
    if not rest:
        collapsed = basis.vectors[outcome].amplitudes
    else:
        remainder = remainder / np.linalg.norm(remainder)
        collapsed = _join_axes(basis.vectors[outcome].amplitudes, remainder, qubits, rest)
    return outcome, StateVector(collapsed, normalize=True).canonical()


def split_product(s: StateVector, qubits: Sequence[int], tolerance: float = NORM_TOLERANCE) -> tuple[StateVector, StateVector]:
    """
    把直积态分解为 qubits 上的部分和其余比特上的部分

    Raises:
        FactorizationFailed: 两部分之间存在纠缠（第二奇异值超过容差）
    """
    matrix, rest = _split_axes(s, qubits)
    if not rest:
        raise WrongRegisterSize("分解需要至少保留一个比特")
    u, singular, vh = np.linalg.svd(matrix)
    if len(singular) > 1 and singular[1] > tolerance:
        raise FactorizationFailed(f"子系统{tuple(qubits)}与其余比特纠缠，第二奇异值 {singular[1]:.3e}")
    part = StateVector(u[:, 0], normalize=True).canonical()
    remainder = StateVector(vh[0], normalize=True).canonical()
    return part, remainder


def equal_up_to_global_phase(a: StateVector, b: StateVector, tolerance: float = NORM_TOLERANCE) -> bool:
    """|⟨a|b⟩| = 1 且振幅逐项相差同一个相位"""
    overlap = inner_product(a, b)
    if abs(overlap) < NORM_TOLERANCE:
        return False
    phase = overlap / abs(overlap)
    return max_deviation(a.amplitudes * phase, b.amplitudes) < tolerance


def max_deviation(a: np.ndarray | StateVector, b: np.ndarray | StateVector) -> float:
    """最大逐分量偏差"""
    left = a.amplitudes if isinstance(a, StateVector) else np.asarray(a)
    right = b.amplitudes if isinstance(b, StateVector) else np.asarray(b)
    if left.shape != right.shape:
        raise DimensionMismatch(f"形状不一致: {left.shape} vs {right.shape}")
    return float(np.max(np.abs(left - right)))


Z_DP_BASIS = MeasurementBasis(
    "Z_dp",
    [encode(LogicalBasisLabel.ZDP0), encode(LogicalBasisLabel.ZDP1),
     StateVector.basis_state("00"), StateVector.basis_state("11")],
    [LogicalBasisLabel.ZDP0, LogicalBasisLabel.ZDP1, None, None],
)
"""Z_dp 逻辑测量：|00⟩、|11⟩ 两个泄漏结果补全基，在无泄漏的态上概率为 0"""

X_DP_BASIS = MeasurementBasis(
    "X_dp",
    [encode(LogicalBasisLabel.XDP_PLUS), encode(LogicalBasisLabel.XDP_MINUS),
     StateVector.basis_state("00"), StateVector.basis_state("11")],
    [LogicalBasisLabel.XDP_PLUS, LogicalBasisLabel.XDP_MINUS, None, None],
)

BELL_BASIS = MeasurementBasis(
    "Bell",
    [bell_state(label) for label in BellLabel],
    list(BellLabel),
)

DOUBLE_BELL_PAIRS = ((0, 2), (1, 3))


def measure_logical(
    s: StateVector,
    basis: MeasurementBasis,
    rng: np.random.Generator,
    qubits: Optional[Sequence[int]] = None,
) -> tuple[LogicalBasisLabel, StateVector]:
    """Z_dp / X_dp 测量，返回逻辑标签"""
    outcome, collapsed = measure(s, basis, rng, qubits)
    label = basis.labels[outcome]
    if label is None:
        raise DegenerateState(f"{basis.name} 测量落在逻辑子空间之外")
    return label, collapsed


def double_bell_measure(s: StateVector, rng: np.random.Generator) -> tuple[DoubleBellOutcome, StateVector]:
    """
    双 Bell 基测量：先测物理比特(1,3)，重新归一化后再测(2,4)

    Raises:
        WrongRegisterSize: 寄存器不是 4 个物理比特
    """
    if s.num_qubits != 4:
        raise WrongRegisterSize(f"双Bell基测量需要4个物理比特: {s.num_qubits}")
    first_index, state = measure(s, BELL_BASIS, rng, DOUBLE_BELL_PAIRS[0])
    second_index, state = measure(state, BELL_BASIS, rng, DOUBLE_BELL_PAIRS[1])
    outcome = DoubleBellOutcome(first=BELL_BASIS.labels[first_index], second=BELL_BASIS.labels[second_index])
    return outcome, state


def double_bell_basis() -> MeasurementBasis:
    """16 个联合投影 |a⟩_13|b⟩_24，按 1234 排列，用于与顺序测量对照"""
    vectors = []
    labels = []
    for first in BellLabel:
        for second in BellLabel:
            product = tensor(bell_state(first), bell_state(second))
            # product 的比特顺序为 (1,3,2,4)
            vectors.append(permute_qubits(product, (0, 2, 1, 3)))
            labels.append(DoubleBellOutcome(first=first, second=second))
    return MeasurementBasis("double-Bell", vectors, labels)


def logical_bell_states() -> dict[str, StateVector]:
    """四个逻辑 Bell 态 |Φ±_dp⟩、|Ψ±_dp⟩（Z_dp 直积形式构造）"""
    zero = encode(LogicalBasisLabel.ZDP0).amplitudes
    one = encode(LogicalBasisLabel.ZDP1).amplitudes
    z00, z01 = np.kron(zero, zero), np.kron(zero, one)
    z10, z11 = np.kron(one, zero), np.kron(one, one)
    return {
        "Phi+": StateVector((z00 + z11) * SQRT1_2),
        "Phi-": StateVector((z00 - z11) * SQRT1_2),
        "Psi+": StateVector((z01 + z10) * SQRT1_2),
        "Psi-": StateVector((z01 - z10) * SQRT1_2),
    }
