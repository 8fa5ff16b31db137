"""
外部窃听者 Eve 的攻击策略
双 CNOT 攻击、缺少第二次 CNOT 的单 CNOT 攻击、Z_dp 截获重发
"""
from typing import Optional

import numpy as np

from app.summation.adversaries.base import ANCILLA_QUBITS, PARTICLE_QUBITS, AdversaryStrategy
from app.summation.models.protocol import AncillaRecord, User, UserOp
from app.summation.models.state import LogicalBasisLabel
from app.summation.quantum.qcore import (
    Z_DP_BASIS,
    StateVector,
    apply_logical_cnot,
    encode,
    measure_logical,
    split_product,
    tensor,
)


def eve_double_cnot_forward(particle: StateVector, ancilla: StateVector) -> StateVector:
    """
    第一次逻辑 CNOT：粒子为控制，辅助粒子为目标

    |+_dp⟩_A|0_dp⟩_E → |Φ⁺_dp⟩_AE
    """
    return apply_logical_cnot(tensor(particle, ancilla), PARTICLE_QUBITS, ANCILLA_QUBITS)


def eve_double_cnot_return(joint: StateVector) -> tuple[StateVector, StateVector]:
    """
    第二次逻辑 CNOT 之后把辅助粒子分离出来

    Returns:
        (粒子, 辅助粒子)，无论用户做 CTRL 还是 SIFT，辅助粒子都是 |0_dp⟩

    Raises:
        FactorizationFailed: 辅助粒子仍与粒子纠缠
    """
    joint = apply_logical_cnot(joint, PARTICLE_QUBITS, ANCILLA_QUBITS)
    return split_product(joint, PARTICLE_QUBITS)


def eve_single_cnot(joint: StateVector, rng: np.random.Generator) -> tuple[StateVector, LogicalBasisLabel]:
    """
    省略第二次 CNOT：用户操作之后直接以 Z_dp 测量辅助粒子

    CTRL 粒子因此塌缩到 |0_dp⟩ 或 |1_dp⟩，TP 的 X_dp 检测以 1/2 概率出错。

    Returns:
        (转发给 TP 的粒子, 辅助粒子读数)
    """
    label, collapsed = measure_logical(joint, Z_DP_BASIS, rng, ANCILLA_QUBITS)
    particle, _ = split_product(collapsed, PARTICLE_QUBITS)
    return particle, label


def eve_measure_resend(particle: StateVector, rng: np.random.Generator) -> tuple[StateVector, LogicalBasisLabel]:
    """Z_dp 截获重发：测量后转发对应的基态"""
    label, _ = measure_logical(particle, Z_DP_BASIS, rng)
    return encode(label), label


class EveStrategy(AdversaryStrategy):
    """只作用于目标用户信道的窃听者"""

    is_eavesdropper = True

    def __init__(self, target: Optional[User] = None):
        super().__init__(target=User(target) if target is not None else User.ALICE)

    def touches(self, user: User) -> bool:
        return user == self.target

    def describe(self) -> str:
        return f"{self.name}(target={self.target.value})"

    def _log(self, index: int, user: User, outcome: LogicalBasisLabel,
             inferred_op: Optional[UserOp] = None) -> None:
        self.ancilla_log.append(
            AncillaRecord(index=index, user=user, outcome=outcome, inferred_op=inferred_op)
        )


class EveDoubleCnot(EveStrategy):
    """双 CNOT 攻击：试图通过辅助粒子区分用户的 CTRL/SIFT 选择"""

    name = "eve-double-cnot"

    def intercept_forward(self, user, index, flight, rng):
        if not self.touches(user):
            return flight
        return eve_double_cnot_forward(flight, encode(LogicalBasisLabel.ZDP0))

    def intercept_return(self, user, index, flight, rng):
        if not self.touches(user):
            return flight
        particle, ancilla = eve_double_cnot_return(flight)
        outcome, _ = measure_logical(ancilla, Z_DP_BASIS, rng)
        self._log(index, user, outcome, self.infer_operation(outcome))
        return particle

    @staticmethod
    def infer_operation(outcome: LogicalBasisLabel) -> UserOp:
        """|1_dp⟩ 只可能来自 SIFT 结果 |1_dp⟩ 的残留，其余一律猜 CTRL"""
        return UserOp.SIFT if outcome == LogicalBasisLabel.ZDP1 else UserOp.CTRL


class EveSingleCnot(EveStrategy):
    """只做第一次 CNOT，返回途中测量辅助粒子"""

    name = "eve-single-cnot"

    def intercept_forward(self, user, index, flight, rng):
        if not self.touches(user):
            return flight
        return eve_double_cnot_forward(flight, encode(LogicalBasisLabel.ZDP0))

    def intercept_return(self, user, index, flight, rng):
        if not self.touches(user):
            return flight
        particle, outcome = eve_single_cnot(flight, rng)
        self._log(index, user, outcome)
        return particle


class EveMeasureResend(EveStrategy):
    """TP → 用户途中的 Z_dp 截获重发"""

    name = "eve-measure-resend"

    def intercept_forward(self, user, index, flight, rng):
        if not self.touches(user):
            return flight
        forwarded, outcome = eve_measure_resend(flight, rng)
        self._log(index, user, outcome)
        return forwarded
