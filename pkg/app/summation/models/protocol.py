"""
协议数据模型
定义协议参数、粒子组记录、运行结果及其统计信息
"""
import math
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.exceptions import NonIntegerParticleCount
from app.summation.models.state import DoubleBellOutcome, LogicalBasisLabel

BIT_PATTERN = r"^[01]+$"
_INTEGER_TOLERANCE = 1e-9


def xor_bits(*operands: str) -> str:
    """逐位模 2 加"""
    lengths = {len(op) for op in operands}
    if len(lengths) != 1:
        raise ValueError(f"比特串长度不一致: {sorted(lengths)}")
    result = [0] * lengths.pop()
    for op in operands:
        for i, ch in enumerate(op):
            result[i] ^= ch == "1"
    return "".join("1" if bit else "0" for bit in result)


class User(str, Enum):
    """两个经典用户"""
    ALICE = "alice"
    BOB = "bob"


class UserOp(str, Enum):
    """用户在 Step 2 中的操作"""
    CTRL = "CTRL"  # 直接反射
    SIFT = "SIFT"  # Z_dp 测量后重发


class GroupRole(str, Enum):
    """粒子组在协议中的角色"""
    EVE_CHECK = "EveCheck"
    TP_HONESTY_CHECK = "TpHonestyCheck"
    SUMMATION_KEY = "SummationKey"
    SURPLUS = "Surplus"


ANNOUNCED_ROLES = frozenset({GroupRole.TP_HONESTY_CHECK, GroupRole.SUMMATION_KEY, GroupRole.SURPLUS})


class HonestyCheckResult(str, Enum):
    """TP 诚实性检测对单个组的判定"""
    PASS = "pass"
    FAIL = "fail"
    NOT_CHECKED = "not-checked"  # CTRL/SIFT 混合组，没有可检验的关系


class AbortReason(str, Enum):
    """中止原因"""
    EVE_DETECTED_CTRL = "EveDetectedCtrl"
    EVE_DETECTED_SIFT = "EveDetectedSift"
    TP_DISHONEST = "TpDishonest"
    INSUFFICIENT_SIFT_GROUPS = "InsufficientSiftGroups"

    @property
    def is_detection(self) -> bool:
        return self is not AbortReason.INSUFFICIENT_SIFT_GROUPS


class ProtocolParams(BaseModel):
    """协议参数 (n, r, d, δ)，q = 4 + r + d + δ"""
    n: int = Field(..., description="比特串长度", ge=1)
    r: int = Field(default=1, description="窃听检测预算", ge=1)
    d: int = Field(default=1, description="TP诚实性检测预算", ge=1)
    delta: float = Field(default=1.0, description="冗余参数", gt=0)

    model_config = ConfigDict(frozen=True)

    @property
    def q(self) -> float:
        return 4 + self.r + self.d + self.delta

    def _as_integer(self, value: float, what: str) -> int:
        rounded = round(value)
        if not math.isclose(value, rounded, abs_tol=_INTEGER_TOLERANCE):
            raise NonIntegerParticleCount(f"{what} = {value} 不是整数 (n={self.n}, δ={self.delta})")
        return int(rounded)

    def particles_per_sequence(self) -> int:
        """
        每个序列的粒子数 n·q

        Raises:
            NonIntegerParticleCount: n·q 不是整数
        """
        return self._as_integer(self.n * self.q, "n·q")

    @property
    def eve_check_groups(self) -> int:
        return self.n * self.r

    @property
    def honesty_check_groups(self) -> int:
        return self.n * self.d

    def announced_groups(self) -> int:
        """Step 4 中 TP 需要测量并公布的组数 n(4+d+δ)"""
        return self.particles_per_sequence() - self.eve_check_groups

    def summation_pool(self) -> int:
        """Step 5 可用的组数 n(4+δ)"""
        return self.announced_groups() - self.honesty_check_groups

    @property
    def expected_both_sift_groups(self) -> float:
        """n + nδ/4"""
        return self.n + self.n * self.delta / 4


class GroupRecord(BaseModel):
    """第 i 个粒子组的记录"""
    index: int = Field(..., description="组序号", ge=0)
    alice_op: UserOp
    bob_op: UserOp
    alice_result: Optional[LogicalBasisLabel] = None
    bob_result: Optional[LogicalBasisLabel] = None
    role: Optional[GroupRole] = Field(None, description="Step 3 之前未分配")
    tp_announcement: Optional[DoubleBellOutcome] = None
    check_result: Optional[HonestyCheckResult] = None

    @model_validator(mode='after')
    def check_results_match_ops(self) -> "GroupRecord":
        for op, result, who in ((self.alice_op, self.alice_result, "alice"),
                                (self.bob_op, self.bob_result, "bob")):
            if (op == UserOp.SIFT) != (result is not None):
                raise ValueError(f"{who} 的测量结果必须且仅在 SIFT 时存在")
            if result is not None and not result.is_z:
                raise ValueError(f"{who} 的测量结果必须是 Z_dp 标签: {result}")
        if (self.tp_announcement is not None) != (self.role in ANNOUNCED_ROLES):
            raise ValueError(f"TP 公布结果必须且仅在角色为 {sorted(r.value for r in ANNOUNCED_ROLES)} 时存在: {self.role}")
        return self

    def op_of(self, user: User) -> UserOp:
        return self.alice_op if user == User.ALICE else self.bob_op

    def result_of(self, user: User) -> Optional[LogicalBasisLabel]:
        return self.alice_result if user == User.ALICE else self.bob_result

    @property
    def both_sift(self) -> bool:
        return self.alice_op == UserOp.SIFT and self.bob_op == UserOp.SIFT

    @property
    def both_ctrl(self) -> bool:
        return self.alice_op == UserOp.CTRL and self.bob_op == UserOp.CTRL


class CheckCounts(BaseModel):
    """某个用户某种操作的检测粒子数与错误数"""
    checked: int = 0
    errors: int = 0

    @property
    def error_rate(self) -> Optional[float]:
        return self.errors / self.checked if self.checked else None


class EveCheckTally(BaseModel):
    """Step 3 的统计"""
    alice_ctrl: CheckCounts = Field(default_factory=CheckCounts)
    alice_sift: CheckCounts = Field(default_factory=CheckCounts)
    bob_ctrl: CheckCounts = Field(default_factory=CheckCounts)
    bob_sift: CheckCounts = Field(default_factory=CheckCounts)

    def counts(self, user: User, op: UserOp) -> CheckCounts:
        return getattr(self, f"{user.value}_{op.value.lower()}")

    def combined(self, op: UserOp) -> CheckCounts:
        alice, bob = self.counts(User.ALICE, op), self.counts(User.BOB, op)
        return CheckCounts(checked=alice.checked + bob.checked, errors=alice.errors + bob.errors)


class ResourceTally(BaseModel):
    """效率审计计数器"""
    tp_qubits: int = Field(default=0, description="TP 制备的物理比特数")
    user_qubits: int = Field(default=0, description="用户 SIFT 重新制备的物理比特数")
    classical_bits: int = Field(default=0, description="求和所需经典比特数")

    @property
    def consumed_qubits(self) -> int:
        return self.tp_qubits + self.user_qubits


class ProtocolKeys(BaseModel):
    """K_A, K_B, C_T, C_A, C_B"""
    k_a: str = Field(..., pattern=BIT_PATTERN)
    k_b: str = Field(..., pattern=BIT_PATTERN)
    c_t: str = Field(..., pattern=BIT_PATTERN)
    c_a: str = Field(..., pattern=BIT_PATTERN)
    c_b: str = Field(..., pattern=BIT_PATTERN)


class AncillaRecord(BaseModel):
    """Eve 对某个粒子的辅助比特 Z_dp 读数"""
    index: int = Field(..., ge=0)
    user: User
    outcome: LogicalBasisLabel
    inferred_op: Optional[UserOp] = None


class KeyGuess(BaseModel):
    """不诚实 TP 对 K_A、K_B 的猜测"""
    k_a: str = Field(..., pattern=BIT_PATTERN)
    k_b: str = Field(..., pattern=BIT_PATTERN)


class Verdict(BaseModel):
    """运行判决：Success(R) 或 Abort(reason, step)"""
    success: bool
    result: Optional[str] = Field(None, pattern=BIT_PATTERN, description="求和结果 R")
    reason: Optional[AbortReason] = None
    step: Optional[int] = Field(None, ge=3, le=5)

    @model_validator(mode='after')
    def check_shape(self) -> "Verdict":
        if self.success and (self.result is None or self.reason is not None):
            raise ValueError("Success 判决必须携带结果且没有中止原因")
        if not self.success and (self.reason is None or self.step is None):
            raise ValueError("Abort 判决必须携带原因和步骤")
        return self

    @classmethod
    def succeeded(cls, result: str) -> "Verdict":
        return cls(success=True, result=result)

    @classmethod
    def aborted(cls, reason: AbortReason, step: int) -> "Verdict":
        return cls(success=False, reason=reason, step=step)

    def __str__(self) -> str:
        if self.success:
            return f"Success(R={self.result})"
        return f"Abort({self.reason.value}, step {self.step})"


class RunOutcome(BaseModel):
    """一次协议运行的完整结果"""
    verdict: Verdict
    transcript: List[GroupRecord] = Field(default_factory=list)
    keys: Optional[ProtocolKeys] = None
    eve_check: EveCheckTally = Field(default_factory=EveCheckTally)
    resources: ResourceTally = Field(default_factory=ResourceTally)
    ancilla_log: List[AncillaRecord] = Field(default_factory=list)
    tp_key_guess: Optional[KeyGuess] = None

    @model_validator(mode='after')
    def check_success_consistency(self) -> "RunOutcome":
        if self.verdict.success and self.keys is not None:
            expected = xor_bits(self.keys.c_a, self.keys.c_b, self.keys.c_t)
            if self.verdict.result != expected:
                raise ValueError(f"R 必须等于 C_A ⊕ C_B ⊕ C_T: {self.verdict.result} != {expected}")
        return self

    def groups_with_role(self, role: GroupRole) -> List[GroupRecord]:
        return [group for group in self.transcript if group.role == role]

