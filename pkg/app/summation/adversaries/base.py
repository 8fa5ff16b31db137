"""
攻击策略基类
定义协议引擎在各个阶段调用的钩子，默认实现即诚实 TP + 无窃听者
"""
from abc import ABC, abstractmethod
from typing import ClassVar, List, Optional, Sequence

import numpy as np

from app.summation.models.protocol import AncillaRecord, KeyGuess, User
from app.summation.models.state import DoubleBellOutcome, LogicalBasisLabel
from app.summation.quantum.qcore import (
    X_DP_BASIS,
    MeasurementBasis,
    StateVector,
    double_bell_measure,
    encode,
    tensor,
)

PARTICLE_QUBITS = (0, 1)
ANCILLA_QUBITS = (2, 3)


class AdversaryStrategy(ABC):
    """
    攻击策略基类

    一个实例只属于一次协议运行。在途粒子的寄存器约定：物理比特 (0, 1) 是
    传输的逻辑粒子，窃听者附加的辅助粒子放在 (2, 3)。
    """

    name: ClassVar[str] = ""
    is_eavesdropper: ClassVar[bool] = False
    is_dishonest_tp: ClassVar[bool] = False

    def __init__(self, target: Optional[User] = None):
        """
        初始化策略

        Args:
            target: 窃听者攻击的用户信道（TP 策略忽略此参数）
        """
        self.target = target
        self.ancilla_log: List[AncillaRecord] = []

    @abstractmethod
    def describe(self) -> str:
        """策略的可读描述"""

    def touches(self, user: User) -> bool:
        """该策略是否作用于 user 的量子信道"""
        return False

    def prepare(self, user: User, index: int, rng: np.random.Generator) -> StateVector:
        """Step 1: TP 为 user 的第 index 个位置制备粒子"""
        return encode(LogicalBasisLabel.XDP_PLUS)

    def intercept_forward(self, user: User, index: int, flight: StateVector,
                          rng: np.random.Generator) -> StateVector:
        """TP → 用户途中截获"""
        return flight

    def intercept_return(self, user: User, index: int, flight: StateVector,
                         rng: np.random.Generator) -> StateVector:
        """用户 → TP 途中截获，返回值必须只剩两个物理比特的粒子"""
        return flight

    def eve_check_reference(self, user: User, index: int) -> tuple[MeasurementBasis, LogicalBasisLabel]:
        """Step 3 中 TP 对 CTRL 粒子的测量基及无扰动时的期望结果"""
        return X_DP_BASIS, LogicalBasisLabel.XDP_PLUS

    def announce(self, index: int, alice_particle: StateVector, bob_particle: StateVector,
                 rng: np.random.Generator) -> DoubleBellOutcome:
        """Step 4: 对第 index 组做双 Bell 基测量并公布结果"""
        outcome, _ = double_bell_measure(tensor(alice_particle, bob_particle), rng)
        return outcome

    def key_guess(self, summation_indices: Sequence[int]) -> Optional[KeyGuess]:
        """不诚实 TP 对求和组上 K_A、K_B 的猜测；诚实方返回 None"""
        return None

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.describe()})"


class PassiveAdversary(AdversaryStrategy):
    """无攻击：诚实 TP，信道上没有窃听者"""

    name = "passive"

    def describe(self) -> str:
        return "passive"
