"""
测量结果标签模型
定义逻辑基标签、Bell 态标签和双 Bell 基测量结果
"""
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class LogicalBasisLabel(str, Enum):
    """逻辑量子比特基标签（抗集体退相位噪声）"""
    ZDP0 = "Zdp0"
    ZDP1 = "Zdp1"
    XDP_PLUS = "XdpPlus"
    XDP_MINUS = "XdpMinus"

    @property
    def is_z(self) -> bool:
        return self in (LogicalBasisLabel.ZDP0, LogicalBasisLabel.ZDP1)

    @property
    def bit(self) -> int:
        """Z_dp 标签对应的经典比特（|0_dp⟩ → 0, |1_dp⟩ → 1）"""
        if not self.is_z:
            raise ValueError(f"只有 Z_dp 标签才有比特值: {self.value}")
        return 0 if self is LogicalBasisLabel.ZDP0 else 1

    @classmethod
    def from_bit(cls, bit: int) -> "LogicalBasisLabel":
        return cls.ZDP1 if bit else cls.ZDP0


class BellLabel(str, Enum):
    """四个 Bell 纠缠态"""
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"

    @property
    def is_phi(self) -> bool:
        return self in (BellLabel.PHI_PLUS, BellLabel.PHI_MINUS)


class DoubleBellOutcome(BaseModel):
    """双 Bell 基测量结果：first 作用于物理比特(1,3)，second 作用于(2,4)"""
    first: BellLabel = Field(..., description="物理比特1、3上的Bell测量结果")
    second: BellLabel = Field(..., description="物理比特2、4上的Bell测量结果")

    model_config = ConfigDict(frozen=True)

    @property
    def is_phi_type(self) -> bool:
        """两个结果都是 φ 型（对应 k_t = 0）"""
        return self.first.is_phi and self.second.is_phi

    @property
    def is_psi_type(self) -> bool:
        """两个结果都是 ψ 型（对应 k_t = 1）"""
        return not self.first.is_phi and not self.second.is_phi

    @property
    def is_equal_pair(self) -> bool:
        """两个标签相同，|+_dp⟩|+_dp⟩ 只会塌缩到这类结果"""
        return self.first == self.second

    @property
    def bits(self) -> str:
        """公告所需的经典比特（每个 Bell 标签 2 比特）"""
        order = list(BellLabel)
        return f"{order.index(self.first):02b}{order.index(self.second):02b}"

    def __str__(self) -> str:
        return f"{self.first.value},{self.second.value}"


PHI_TYPE_PAIRS = tuple(
    DoubleBellOutcome(first=a, second=b)
    for a in (BellLabel.PHI_PLUS, BellLabel.PHI_MINUS)
    for b in (BellLabel.PHI_PLUS, BellLabel.PHI_MINUS)
)

PSI_TYPE_PAIRS = tuple(
    DoubleBellOutcome(first=a, second=b)
    for a in (BellLabel.PSI_PLUS, BellLabel.PSI_MINUS)
    for b in (BellLabel.PSI_PLUS, BellLabel.PSI_MINUS)
)

EQUAL_LABEL_PAIRS = tuple(DoubleBellOutcome(first=label, second=label) for label in BellLabel)
