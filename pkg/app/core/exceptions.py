"""
SQSum - 异常定义
所有领域错误都继承自 ValueError，与 pydantic 校验错误保持同一族
"""


class SimulationError(ValueError):
    """模拟器错误基类"""


class CapacityExceeded(SimulationError):
    """寄存器超过最大物理量子比特数"""


class IndexOutOfRange(SimulationError, IndexError):
    """量子比特下标越界"""


class ControlEqualsTarget(SimulationError):
    """CNOT 的控制位与目标位相同"""


class OverlappingPairs(SimulationError):
    """逻辑 CNOT 的控制对与目标对存在重叠"""


class NonOrthonormalBasis(SimulationError):
    """测量基不是正交归一完备基"""


class DegenerateState(SimulationError):
    """态矢量范数过小，无法归一化"""


class WrongRegisterSize(SimulationError):
    """寄存器大小与操作要求不符"""


class DimensionMismatch(SimulationError):
    """两个态矢量的维度不一致"""


class FactorizationFailed(SimulationError):
    """联合态无法分解为直积态（实现错误信号）"""


class NonIntegerParticleCount(SimulationError):
    """n·q 不是整数，无法确定粒子数"""


class UnsupportedAttack(SimulationError):
    """攻击策略没有解析闭式或未注册"""


class UsageError(SimulationError):
    """命令行用法错误"""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
