"""
信道数据模型
定义退相位窗口和信道配置
"""
import math
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

TWO_PI = 2.0 * math.pi


class ChannelMode(str, Enum):
    """信道模式枚举"""
    NOISELESS = "noiseless"
    COLLECTIVE_DEPHASING = "dephasing"


class PhaseDistribution(str, Enum):
    """相位分布枚举"""
    UNIFORM_ON_CIRCLE = "uniform"
    FIXED_PHASE = "fixed"


class DephasingWindow(BaseModel):
    """一个传输时间窗口内所有物理比特共享的噪声相位 φ"""
    phase: float = Field(default=0.0, description="噪声相位（弧度）")

    model_config = ConfigDict(frozen=True)

    @field_validator('phase')
    @classmethod
    def validate_phase(cls, v: float) -> float:
        if not 0.0 <= v < TWO_PI:
            raise ValueError(f"相位必须在[0, 2π)之间: {v}")
        return v

    @classmethod
    def from_angle(cls, angle: float) -> "DephasingWindow":
        """任意角度折算到 [0, 2π)"""
        phase = math.fmod(angle, TWO_PI)
        if phase < 0.0:
            phase += TWO_PI
        if phase >= TWO_PI:
            phase = 0.0
        return cls(phase=phase)


class ChannelConfig(BaseModel):
    """信道配置"""
    mode: ChannelMode = Field(default=ChannelMode.COLLECTIVE_DEPHASING, description="信道模式")
    phase_distribution: PhaseDistribution = Field(
        default=PhaseDistribution.UNIFORM_ON_CIRCLE, description="相位分布"
    )
    fixed_phase: Optional[float] = Field(None, description="固定相位（仅 fixed 分布）")

    model_config = ConfigDict(frozen=True)

    @field_validator('fixed_phase')
    @classmethod
    def validate_fixed_phase(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not 0.0 <= v < TWO_PI:
            raise ValueError(f"固定相位必须在[0, 2π)之间: {v}")
        return v

    @model_validator(mode='after')
    def check_fixed_phase_present(self) -> "ChannelConfig":
        if self.phase_distribution == PhaseDistribution.FIXED_PHASE and self.fixed_phase is None:
            raise ValueError("fixed 相位分布必须提供 fixed_phase")
        return self

    @classmethod
    def noiseless(cls) -> "ChannelConfig":
        return cls(mode=ChannelMode.NOISELESS)

    @classmethod
    def dephasing(cls, fixed_phase: Optional[float] = None) -> "ChannelConfig":
        if fixed_phase is None:
            return cls(mode=ChannelMode.COLLECTIVE_DEPHASING)
        return cls(
            mode=ChannelMode.COLLECTIVE_DEPHASING,
            phase_distribution=PhaseDistribution.FIXED_PHASE,
            fixed_phase=fixed_phase,
        )

    @classmethod
    def from_names(cls, channel: str, phase: str = "uniform") -> "ChannelConfig":
        """从命令行/配置文件中的名称构造（phase 为 uniform 或角度）"""
        mode = ChannelMode(channel)
        if mode == ChannelMode.NOISELESS:
            return cls.noiseless()
        if phase == "uniform":
            return cls.dephasing()
        return cls.dephasing(fixed_phase=float(phase))

    def describe(self) -> str:
        if self.mode == ChannelMode.NOISELESS:
            return "noiseless"
        if self.phase_distribution == PhaseDistribution.FIXED_PHASE:
            return f"dephasing(fixed={self.fixed_phase})"
        return "dephasing(uniform)"
