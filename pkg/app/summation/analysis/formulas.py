"""
解析公式
TP 参与者攻击的检测概率、量子比特效率以及与三方半量子求和协议的对比
"""
import logging
from fractions import Fraction
from typing import Dict, List, Sequence

from pydantic import BaseModel, Field

from app.core.exceptions import UnsupportedAttack
from app.summation.models.protocol import ProtocolParams, ResourceTally

logger = logging.getLogger(__name__)

TP_ATTACKS = ("tp-attack-1", "tp-attack-2")
PER_GROUP_DETECTION = Fraction(1, 8)
"""每个被检验组：双 CTRL 概率 1/4，双 CTRL 时检测概率 1/2"""


def _exact(value: float | int) -> Fraction:
    return Fraction(str(value))


def analytic_detection(attack: str, nd: int) -> float:
    """
    TP 攻击在 nd 个诚实性检测组上的总检测概率 1−(7/8)^nd

    Raises:
        UnsupportedAttack: 该策略没有闭式
        ValueError: nd 为负
    """
    if attack not in TP_ATTACKS:
        raise UnsupportedAttack(f"{attack} 没有解析检测概率，仅支持 {TP_ATTACKS}")
    if nd < 0:
        raise ValueError(f"nd 不能为负: {nd}")
    return float(1 - (1 - PER_GROUP_DETECTION) ** nd)


def qubit_efficiency(params: ProtocolParams) -> Fraction:
    """
    η = c/(p+v)，c = n, p = 6nq, v = 6n，化简为 1/(6(4+r+d+δ)+6)

    p 是消耗的量子比特数；公式中同名的 q 指 4+r+d+δ。
    """
    q = 4 + params.r + params.d + _exact(params.delta)
    return 1 / (6 * q + 6)


def ref20_efficiency(r: int, d: int, delta: float) -> Fraction:
    """三方半量子求和协议的效率 2/(9(32+r+d+δ)+6)"""
    if r <= 0 or d <= 0 or delta <= 0:
        raise ValueError(f"r, d, δ 必须为正: r={r}, d={d}, δ={delta}")
    return Fraction(2) / (9 * (32 + r + d + _exact(delta)) + 6)


def expected_consumed_qubits(params: ProtocolParams) -> Fraction:
    """p = 2nq·2 + (nq/2)·2·2 = 6nq"""
    return 6 * params.n * (4 + params.r + params.d + _exact(params.delta))


def expected_classical_bits(params: ProtocolParams) -> int:
    """v = 4n（TP 公布求和组结果）+ n（C_A）+ n（C_B）"""
    return 6 * params.n


class ResourceAudit(BaseModel):
    """计数器审计结果"""
    runs: int = Field(..., ge=1)
    expected_qubits: float = Field(..., description="6nq")
    mean_qubits: float
    standard_error: float
    tp_qubits_exact: bool = Field(..., description="TP 制备的物理比特恒为 4nq")
    classical_bits_exact: bool = Field(..., description="成功运行的经典比特恒为 6n")
    passed: bool


def audit_resource_counts(
    params: ProtocolParams,
    tallies: Sequence[ResourceTally],
    classical_tallies: Sequence[ResourceTally] = (),
    sigmas: float = 4.0,
) -> ResourceAudit:
    """
    用诚实运行的计数器核对 p = 6nq 与 v = 6n

    p 中用户重新制备的部分是随机的，所以核对的是均值（sigmas 个标准误以内）；
    TP 部分和经典比特是确定的，必须精确相等。

    Args:
        tallies: 各次运行的计数器
        classical_tallies: 成功运行的计数器（默认取 tallies 中经典比特非零者）
    """
    if not tallies:
        raise ValueError("至少需要一次运行的计数器")
    consumed = [t.consumed_qubits for t in tallies]
    runs = len(consumed)
    mean = sum(consumed) / runs
    variance = sum((c - mean) ** 2 for c in consumed) / max(runs - 1, 1)
    standard_error = (variance / runs) ** 0.5

    expected = float(expected_consumed_qubits(params))
    tp_expected = expected_consumed_qubits(params) * 2 / 3
    tp_exact = all(t.tp_qubits == tp_expected for t in tallies)
    successful = list(classical_tallies) or [t for t in tallies if t.classical_bits]
    classical_exact = all(t.classical_bits == expected_classical_bits(params) for t in successful)
    within = abs(mean - expected) <= sigmas * standard_error if standard_error else mean == expected

    passed = tp_exact and classical_exact and within
    if not passed:
        logger.warning(f"Resource audit failed: mean p={mean:.2f}, expected {expected:.2f}")
    return ResourceAudit(
        runs=runs, expected_qubits=expected, mean_qubits=mean, standard_error=standard_error,
        tp_qubits_exact=tp_exact, classical_bits_exact=classical_exact, passed=passed,
    )


def comparison_table(r: int = 1, d: int = 1, delta: float = 1.0) -> List[Dict[str, str]]:
    """与三方半量子求和协议的定性对比表，效率一行按给定参数求值"""
    ours = qubit_efficiency(ProtocolParams(n=1, r=r, d=d, delta=delta))
    theirs = ref20_efficiency(r, d, delta)
    rows = [
        ("Characteristic", "measure-resend", "measure-resend"),
        ("Number of communicants", "two", "three"),
        ("Quantum resource", "two-qubit entangled states", "single-qubit states"),
        ("Quantum measurement of TP",
         "single-qubit measurements and two-qubit entangled state measurements",
         "single-qubit measurements and three-qubit entangled state measurements"),
        ("Quantum measurement of communicants", "single-qubit measurements", "single-qubit measurements"),
        ("Type of TP", "semi-honest", "semi-honest"),
        ("TP's knowledge about the summation result", "No", "Yes"),
        ("Usage of quantum entanglement swapping", "No", "No"),
        ("Usage of unitary operations", "No", "No"),
        ("Usage of pre-shared key", "No", "No"),
        ("Summation type", "modulo 2 addition", "modulo 2 addition"),
        ("Computation way", "bit-by-bit", "bit-by-bit"),
        ("Qubit efficiency", f"1/(6(4+r+d+δ)+6) = {ours}", f"2/(9(32+r+d+δ)+6) = {theirs}"),
        ("Quantum channel", "collective-dephasing noise quantum channel", "ideal noiseless quantum channel"),
    ]
    return [{"aspect": aspect, "this": this, "three_party": other} for aspect, this, other in rows]
