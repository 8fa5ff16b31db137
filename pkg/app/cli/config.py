"""
命令行运行配置
合并优先级：命令行参数 > 配置文件（JSON）> Settings 默认值
"""
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.core.config import Settings
from app.core.exceptions import UsageError
from app.summation.adversaries import ADVERSARIES
from app.summation.models.channel import ChannelConfig
from app.summation.models.experiment import ExperimentSpec
from app.summation.models.protocol import ProtocolParams, User

logger = logging.getLogger(__name__)

RANDOM_INPUT = "random"


class OutputFormat(str, Enum):
    """报告格式"""
    JSON = "json"
    CSV = "csv"
    HUMAN = "human"


class RunConfig(BaseModel):
    """run 子命令的完整配置，报告头部原样回显"""
    n: int = Field(default=8, ge=1, description="比特串长度")
    r: int = Field(default=1, ge=1)
    d: int = Field(default=1, ge=1)
    delta: float = Field(default=1.0, gt=0)
    channel: str = Field(default="dephasing", description="noiseless 或 dephasing")
    phase: str = Field(default="uniform", description="uniform 或固定角度（弧度）")
    adversary: str = Field(default="passive", description="攻击策略名称")
    target: User = Field(default=User.ALICE, description="Eve 攻击的用户")
    trials: int = Field(default=1, ge=1)
    seed: int = Field(default=20240101, ge=0, lt=2**64)
    x: str = Field(default=RANDOM_INPUT, description="Alice 的比特串或 random")
    y: str = Field(default=RANDOM_INPUT, description="Bob 的比特串或 random")
    threshold: float = Field(default=0.0, ge=0.0, lt=1.0)
    workers: int = Field(default=1, ge=1)
    output: Optional[Path] = Field(None, description="报告文件，缺省输出到标准输出")
    format: OutputFormat = Field(default=OutputFormat.JSON)
    transcript: Optional[Path] = Field(None, description="单次运行的记录文件（JSON Lines）")

    model_config = ConfigDict(extra="forbid")

    @field_validator('adversary')
    @classmethod
    def validate_adversary(cls, v: str) -> str:
        if v not in ADVERSARIES:
            raise ValueError(f"攻击策略必须是以下之一: {sorted(ADVERSARIES)}")
        return v

    @field_validator('channel')
    @classmethod
    def validate_channel(cls, v: str) -> str:
        if v not in ("noiseless", "dephasing"):
            raise ValueError(f"信道模式必须是 noiseless 或 dephasing: {v}")
        return v

    @field_validator('x', 'y')
    @classmethod
    def validate_bits(cls, v: str) -> str:
        if v != RANDOM_INPUT and (not v or set(v) - {"0", "1"}):
            raise ValueError(f"输入必须是 0/1 串或 random: {v}")
        return v

    @model_validator(mode='after')
    def check_lengths(self) -> "RunConfig":
        for name in ("x", "y"):
            bits = getattr(self, name)
            if bits != RANDOM_INPUT and len(bits) != self.n:
                raise ValueError(f"{name} 的长度 {len(bits)} 与 n={self.n} 不一致")
        # 提前暴露 n·q 非整数和相位格式错误
        self.params().particles_per_sequence()
        self.channel_config()
        return self

    def params(self) -> ProtocolParams:
        return ProtocolParams(n=self.n, r=self.r, d=self.d, delta=self.delta)

    def channel_config(self) -> ChannelConfig:
        return ChannelConfig.from_names(self.channel, self.phase)

    def to_spec(self) -> ExperimentSpec:
        return ExperimentSpec(
            params=self.params(),
            adversary=self.adversary,
            target=self.target,
            channel=self.channel_config(),
            trials=self.trials,
            seed=self.seed,
            threshold=self.threshold,
            workers=self.workers,
            x=None if self.x == RANDOM_INPUT else self.x,
            y=None if self.y == RANDOM_INPUT else self.y,
        )

    def echo(self) -> Dict[str, Any]:
        """报告头部使用的配置回显"""
        return self.model_dump(mode="json")


def settings_defaults(settings: Settings) -> Dict[str, Any]:
    return {"seed": settings.default_seed}


def load_config_file(path: Path) -> Dict[str, Any]:
    """
    读取 JSON 配置文件

    Raises:
        UsageError: 文件不存在或不是 JSON 对象
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"配置文件不存在: {path}", key="config") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"配置文件不是有效的 JSON: {e}", key="config") from None
    if not isinstance(data, dict):
        raise UsageError("配置文件顶层必须是对象", key="config")
    return data


def resolve_run_config(
    flags: Mapping[str, Any],
    config_file: Optional[Path],
    settings: Settings,
) -> RunConfig:
    """
    按优先级合并配置

    Args:
        flags: 命令行参数（值为 None 表示未给出）
        config_file: 可选的 JSON 配置文件
        settings: 环境配置

    Raises:
        UsageError: 未知键或取值非法，key 为出错的配置项；多次运行不接受 transcript
    """
    merged: Dict[str, Any] = settings_defaults(settings)
    if config_file is not None:
        file_values = load_config_file(config_file)
        unknown = sorted(set(file_values) - set(RunConfig.model_fields))
        if unknown:
            raise UsageError(f"配置文件中有未知的键: {unknown}", key=unknown[0])
        merged.update(file_values)
    merged.update({key: value for key, value in flags.items() if value is not None})

    try:
        config = RunConfig(**merged)
    except ValidationError as e:
        error = e.errors()[0]
        key = str(error["loc"][0]) if error["loc"] else None
        raise UsageError(error["msg"], key=key) from None
    except ValueError as e:
        raise UsageError(str(e)) from None
    if config.transcript is not None and config.trials > 1:
        raise UsageError("--transcript 仅适用于单次运行", key="transcript")
    logger.debug(f"Resolved run config: {config.echo()}")
    return config
