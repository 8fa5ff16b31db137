"""
实验数据模型
定义 Monte Carlo 实验的输入规格、可交换的计数累加器和实验报告
"""
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from app.summation.models.channel import ChannelConfig
from app.summation.models.protocol import BIT_PATTERN, AbortReason, ProtocolParams, User


class ExperimentSpec(BaseModel):
    """一次实验：同一配置下 trials 次独立的带种子运行"""
    params: ProtocolParams
    adversary: str = Field(default="passive", description="攻击策略名称")
    target: User = Field(default=User.ALICE, description="Eve 攻击的用户信道")
    channel: ChannelConfig = Field(default_factory=ChannelConfig)
    trials: int = Field(default=1, description="运行次数", ge=1)
    seed: int = Field(default=20240101, description="64 位种子", ge=0, lt=2**64)
    threshold: float = Field(default=0.0, description="Step 3 错误率阈值", ge=0.0, lt=1.0)
    workers: int = Field(default=1, description="并行进程数", ge=1)
    x: Optional[str] = Field(None, pattern=BIT_PATTERN, description="固定的 Alice 输入，缺省时每次随机")
    y: Optional[str] = Field(None, pattern=BIT_PATTERN, description="固定的 Bob 输入，缺省时每次随机")

    @model_validator(mode='after')
    def check_input_lengths(self) -> "ExperimentSpec":
        for name in ("x", "y"):
            bits = getattr(self, name)
            if bits is not None and len(bits) != self.params.n:
                raise ValueError(f"{name} 的长度必须等于 n={self.params.n}: {len(bits)}")
        return self


class TrialCounts(BaseModel):
    """试验计数；merge 满足交换律和结合律，并行分块的合并顺序不影响结果"""
    trials: int = 0
    successes: int = 0
    aborts: Dict[str, int] = Field(default_factory=dict)
    correctness_failures: int = 0
    check_checked: Dict[str, int] = Field(default_factory=dict)
    check_errors: Dict[str, int] = Field(default_factory=dict)
    inference_correct: int = 0
    inference_total: int = 0
    leakage_correct: int = 0
    leakage_total: int = 0
    both_sift_runs: int = 0
    both_sift_groups: int = 0

    def merge(self, other: "TrialCounts") -> "TrialCounts":
        merged = {}
        for name, value in self:
            theirs = getattr(other, name)
            if isinstance(value, dict):
                keys = set(value) | set(theirs)
                merged[name] = {k: value.get(k, 0) + theirs.get(k, 0) for k in sorted(keys)}
            else:
                merged[name] = value + theirs
        return TrialCounts(**merged)

    @property
    def detections(self) -> int:
        return sum(count for reason, count in self.aborts.items() if AbortReason(reason).is_detection)


class ExperimentReport(BaseModel):
    """实验报告；除 wall_time 外完全由 spec 决定"""
    spec: ExperimentSpec
    trials: int = Field(..., ge=1)
    successes: int = Field(..., ge=0)
    detection_rate: float = Field(..., ge=0.0, le=1.0)
    ci95: Tuple[float, float]
    ci95_half_width: float
    analytic_prediction: Optional[float] = None
    abort_breakdown: Dict[str, int] = Field(default_factory=dict)
    correctness_failures: int = 0
    key_leakage: Optional[float] = Field(None, description="未被发现的成功运行中 TP 猜对密钥比特的比例")
    check_error_rates: Dict[str, Optional[float]] = Field(default_factory=dict)
    eve_inference_accuracy: Optional[float] = None
    insufficient_sift_rate: float = 0.0
    mean_both_sift_groups: Optional[float] = None
    expected_both_sift_groups: float
    wall_time: float = Field(default=0.0, description="秒")

    @field_validator('abort_breakdown')
    @classmethod
    def validate_reasons(cls, v: Dict[str, int]) -> Dict[str, int]:
        for reason in v:
            AbortReason(reason)
        return v

    @model_validator(mode='after')
    def check_counts_sum(self) -> "ExperimentReport":
        if self.successes + sum(self.abort_breakdown.values()) != self.trials:
            raise ValueError("成功次数与各中止原因之和必须等于试验次数")
        return self
