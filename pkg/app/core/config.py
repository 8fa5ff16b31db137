"""
SQSum - 配置管理
唯一的环境变量是 SQSUM_DEFAULT_SEED，其余默认值都在代码里
"""
from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

APP_NAME = "SQSum Simulator"
VERSION = "0.1.0"
DEFAULT_LOG_LEVEL = "INFO"


class Settings(BaseSettings):
    """应用配置设置 - 只有默认种子可以通过环境变量覆盖"""

    # 随机性配置 - SQSUM_DEFAULT_SEED 覆盖默认种子
    default_seed: int = Field(default=20240101, description="默认随机种子", ge=0, lt=2**64)

    model_config = SettingsConfigDict(
        env_prefix="SQSUM_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )


@lru_cache()
def get_settings() -> Settings:
    """获取配置实例（单例模式）"""
    return Settings()
