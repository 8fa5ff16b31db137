"""
SQSum - 测试配置文件
提供全局测试 fixtures
"""
import numpy as np
import pytest

from app.core.config import Settings, get_settings
from app.summation.models.channel import ChannelConfig
from app.summation.models.protocol import ProtocolParams


@pytest.fixture
def rng() -> np.random.Generator:
    """固定种子的随机源"""
    return np.random.default_rng(12345)


@pytest.fixture
def params() -> ProtocolParams:
    """默认协议参数 n=8, r=d=δ=1"""
    return ProtocolParams(n=8, r=1, d=1, delta=1.0)


@pytest.fixture
def small_params() -> ProtocolParams:
    return ProtocolParams(n=2, r=1, d=1, delta=1.0)


@pytest.fixture(params=["noiseless", "dephasing"])
def channel(request) -> ChannelConfig:
    """两种信道模式"""
    if request.param == "noiseless":
        return ChannelConfig.noiseless()
    return ChannelConfig.dephasing()


@pytest.fixture
def mock_settings() -> Settings:
    """测试用配置"""
    return Settings(default_seed=7)


@pytest.fixture(autouse=True)
def clear_settings_cache():
    """每个测试前后清空配置缓存，环境变量覆盖互不影响"""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
