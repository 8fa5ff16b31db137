"""
代数与表格核验
逻辑 Bell 态恒等式、求和关系表的穷举复现以及退相位不变性检查
"""
import logging
from collections import Counter
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from app.summation.analysis.experiment import simulate_checked_group
from app.summation.analysis.statistics import total_variation_distance
from app.summation.models.channel import ChannelConfig, DephasingWindow
from app.summation.models.state import (
    PHI_TYPE_PAIRS,
    PSI_TYPE_PAIRS,
    BellLabel,
    DoubleBellOutcome,
    LogicalBasisLabel,
)
from app.summation.protocol import derive_row
from app.summation.quantum import qcore
from app.summation.quantum.channel import transmit

logger = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-12
BELL_PAIR_ORDER = (0, 2, 1, 3)


class CheckResult(BaseModel):
    """单项检查"""
    name: str
    passed: bool
    max_deviation: Optional[float] = None
    detail: str = ""
    warning: bool = Field(default=False, description="非致命的不一致")

    @property
    def status(self) -> str:
        if not self.passed:
            return "FAIL"
        return "WARN" if self.warning else "PASS"


# ---------------------------------------------------------------------------
# 逻辑 Bell 态恒等式
# ---------------------------------------------------------------------------

def _vec(state: qcore.StateVector) -> np.ndarray:
    return state.amplitudes


def _logical(a: LogicalBasisLabel, b: LogicalBasisLabel) -> np.ndarray:
    return _vec(qcore.tensor(qcore.encode(a), qcore.encode(b)))


def _bell_pair(first: BellLabel, second: BellLabel) -> np.ndarray:
    """|first⟩_13 |second⟩_24，按 1234 排列"""
    product = qcore.tensor(qcore.bell_state(first), qcore.bell_state(second))
    return _vec(qcore.permute_qubits(product, BELL_PAIR_ORDER))


def _physical(bits: str) -> np.ndarray:
    return _vec(qcore.StateVector.basis_state(bits))


def _identity_suite() -> Dict[str, List[tuple[str, np.ndarray, np.ndarray]]]:
    """每个等式编号对应若干 (描述, 左边, 右边)"""
    Z0, Z1 = LogicalBasisLabel.ZDP0, LogicalBasisLabel.ZDP1
    P, M = LogicalBasisLabel.XDP_PLUS, LogicalBasisLabel.XDP_MINUS
    pp, pm, mp, mm = _logical(P, P), _logical(P, M), _logical(M, P), _logical(M, M)
    z00, z01, z10, z11 = _logical(Z0, Z0), _logical(Z0, Z1), _logical(Z1, Z0), _logical(Z1, Z1)
    phi_p, phi_m = BellLabel.PHI_PLUS, BellLabel.PHI_MINUS
    psi_p, psi_m = BellLabel.PSI_PLUS, BellLabel.PSI_MINUS
    s = qcore.SQRT1_2

    states = qcore.logical_bell_states()
    Phi_p, Phi_m = _vec(states["Phi+"]), _vec(states["Phi-"])
    Psi_p, Psi_m = _vec(states["Psi+"]), _vec(states["Psi-"])

    return {
        "eq1": [
            ("Φ+ = (|+⟩|+⟩ + |−⟩|−⟩)/√2", Phi_p, s * (pp + mm)),
            ("Φ+ = (|0⟩|0⟩ + |1⟩|1⟩)/√2", Phi_p, s * (z00 + z11)),
            ("Φ+ = (|0101⟩ + |1010⟩)/√2", Phi_p, s * (_physical("0101") + _physical("1010"))),
            ("Φ+ = (φ+φ+ − φ−φ−)/√2", Phi_p, s * (_bell_pair(phi_p, phi_p) - _bell_pair(phi_m, phi_m))),
        ],
        "eq2": [
            ("Φ− = (|+⟩|−⟩ + |−⟩|+⟩)/√2", Phi_m, s * (pm + mp)),
            ("Φ− = (|0⟩|0⟩ − |1⟩|1⟩)/√2", Phi_m, s * (z00 - z11)),
            ("Φ− = (|0101⟩ − |1010⟩)/√2", Phi_m, s * (_physical("0101") - _physical("1010"))),
            ("Φ− = (φ−φ+ − φ+φ−)/√2", Phi_m, s * (_bell_pair(phi_m, phi_p) - _bell_pair(phi_p, phi_m))),
        ],
        "eq3": [
            ("Ψ+ = (|+⟩|+⟩ − |−⟩|−⟩)/√2", Psi_p, s * (pp - mm)),
            ("Ψ+ = (|0⟩|1⟩ + |1⟩|0⟩)/√2", Psi_p, s * (z01 + z10)),
            ("Ψ+ = (|0110⟩ + |1001⟩)/√2", Psi_p, s * (_physical("0110") + _physical("1001"))),
            ("Ψ+ = (ψ+ψ+ − ψ−ψ−)/√2", Psi_p, s * (_bell_pair(psi_p, psi_p) - _bell_pair(psi_m, psi_m))),
        ],
        "eq4": [
            ("Ψ− = (|−⟩|+⟩ − |+⟩|−⟩)/√2", Psi_m, s * (mp - pm)),
            ("Ψ− = (|0⟩|1⟩ − |1⟩|0⟩)/√2", Psi_m, s * (z01 - z10)),
            ("Ψ− = (|0110⟩ − |1001⟩)/√2", Psi_m, s * (_physical("0110") - _physical("1001"))),
            ("Ψ− = (ψ−ψ+ − ψ+ψ−)/√2", Psi_m, s * (_bell_pair(psi_m, psi_p) - _bell_pair(psi_p, psi_m))),
        ],
        "eq5": [("|+⟩|+⟩ = (Φ+ + Ψ+)/√2", pp, s * (Phi_p + Psi_p))],
        "eq6": [("|0⟩|0⟩ = (Φ+ + Φ−)/√2", z00, s * (Phi_p + Phi_m))],
        "eq7": [("|0⟩|1⟩ = (Ψ+ + Ψ−)/√2", z01, s * (Psi_p + Psi_m))],
        "eq8": [("|1⟩|0⟩ = (Ψ+ − Ψ−)/√2", z10, s * (Psi_p - Psi_m))],
        "eq9": [("|1⟩|1⟩ = (Φ+ − Φ−)/√2", z11, s * (Phi_p - Phi_m))],
    }


IDENTITY_NAMES = tuple(f"eq{i}" for i in range(1, 10))


def verify_identities(only: Optional[Sequence[str]] = None,
                      tolerance: float = IDENTITY_TOLERANCE) -> List[CheckResult]:
    """
    以向量等式核验逻辑 Bell 态的定义及其展开式

    Args:
        only: 只运行这些编号（eq1..eq9）
        tolerance: 最大逐分量偏差
    """
    suite = _identity_suite()
    selected = list(only) if only else list(IDENTITY_NAMES)
    unknown = [name for name in selected if name not in suite]
    if unknown:
        raise ValueError(f"未知的恒等式: {unknown}，可选: {list(IDENTITY_NAMES)}")

    results = []
    for name in selected:
        deviation = max(qcore.max_deviation(lhs, rhs) for _, lhs, rhs in suite[name])
        failing = [label for label, lhs, rhs in suite[name] if qcore.max_deviation(lhs, rhs) >= tolerance]
        if failing:
            logger.warning(f"Identity {name} failed: {failing}")
        results.append(CheckResult(
            name=name,
            passed=not failing,
            max_deviation=deviation,
            detail="; ".join(failing) if failing else f"{len(suite[name])} equalities",
        ))
    return results


# ---------------------------------------------------------------------------
# 求和关系表
# ---------------------------------------------------------------------------

TABLE1_COLUMNS = ("k_a", "k_b", "c_a", "c_b", "k_t", "r")

PRINTED_TABLE1 = {
    # (x, y, Alice 结果比特, Bob 结果比特): (k_a, k_b, c_a, c_b, k_t, r)
    (0, 0, 0, 0): (0, 0, 0, 0, 0, 0),
    (0, 0, 0, 1): (0, 1, 0, 1, 1, 0),
    (0, 0, 1, 0): (1, 0, 1, 0, 1, 0),
    (0, 0, 1, 1): (1, 1, 1, 1, 0, 0),
    (0, 1, 0, 0): (0, 0, 0, 1, 0, 1),
    (0, 1, 0, 1): (0, 1, 0, 0, 1, 1),
    (0, 1, 1, 0): (1, 0, 1, 1, 1, 1),
    (0, 1, 1, 1): (1, 1, 1, 0, 0, 1),
    (1, 0, 0, 0): (0, 0, 1, 0, 0, 1),
    (1, 0, 0, 1): (0, 1, 1, 1, 1, 1),
    (1, 0, 1, 0): (1, 0, 0, 0, 1, 1),
    (1, 0, 1, 1): (1, 1, 0, 1, 0, 1),
    (1, 1, 0, 0): (0, 0, 1, 1, 0, 0),
    (1, 1, 0, 1): (0, 1, 1, 0, 1, 0),
    (1, 1, 1, 0): (1, 0, 0, 1, 1, 0),
    (1, 1, 1, 1): (1, 1, 0, 1, 0, 0),  # c_b 按规则应为 1 ⊕ 1 = 0
}


class Table1Row(BaseModel):
    """关系表中的一行"""
    x: int
    y: int
    alice_result: LogicalBasisLabel
    bob_result: LogicalBasisLabel
    announcement_type: str = Field(..., description="phi 或 psi")
    derived: Dict[str, int]
    printed: Dict[str, int]
    mismatches: List[str] = Field(default_factory=list)

    @property
    def sum_correct(self) -> bool:
        return self.derived["r"] == self.x ^ self.y


class Table1Report(BaseModel):
    rows: List[Table1Row]

    @property
    def mismatches(self) -> List[tuple[Table1Row, str]]:
        return [(row, column) for row in self.rows for column in row.mismatches]

    @property
    def hard_failures(self) -> List[Table1Row]:
        return [row for row in self.rows if not row.sum_correct]

    @property
    def passed(self) -> bool:
        return not self.hard_failures


def announcement_support(alice: LogicalBasisLabel, bob: LogicalBasisLabel) -> List[DoubleBellOutcome]:
    """诚实双 Bell 基测量在 |alice⟩|bob⟩ 上可能给出的结果"""
    basis = qcore.double_bell_basis()
    state = qcore.tensor(qcore.encode(alice), qcore.encode(bob))
    probabilities = qcore.outcome_probabilities(state, basis)
    return [label for label, p in zip(basis.labels, probabilities) if p > IDENTITY_TOLERANCE]


def _announcement_type(support: List[DoubleBellOutcome]) -> str:
    if set(support) == set(PHI_TYPE_PAIRS):
        return "phi"
    if set(support) == set(PSI_TYPE_PAIRS):
        return "psi"
    raise ValueError(f"测量结果分布既不是 φ 型也不是 ψ 型: {[str(o) for o in support]}")


def verify_table1() -> Table1Report:
    """穷举 16 行，计算所有派生列并与印刷表对比"""
    rows = []
    for (x, y, a, b), printed_values in PRINTED_TABLE1.items():
        alice, bob = LogicalBasisLabel.from_bit(a), LogicalBasisLabel.from_bit(b)
        support = announcement_support(alice, bob)
        derived = derive_row(x, y, alice, bob, support[0])
        printed = dict(zip(TABLE1_COLUMNS, printed_values))
        row = Table1Row(
            x=x, y=y, alice_result=alice, bob_result=bob,
            announcement_type=_announcement_type(support),
            derived=derived, printed=printed,
            mismatches=[c for c in TABLE1_COLUMNS if derived[c] != printed[c]],
        )
        if row.mismatches:
            logger.warning(
                f"Table 1 row (x={x}, y={y}, {alice.value}, {bob.value}) differs from print in {row.mismatches}"
            )
        rows.append(row)
    return Table1Report(rows=rows)


def table1_check() -> CheckResult:
    report = verify_table1()
    detail = ", ".join(
        f"({row.x},{row.y},{row.alice_result.value},{row.bob_result.value}) {column}: "
        f"printed {row.printed[column]}, derived {row.derived[column]}"
        for row, column in report.mismatches
    )
    return CheckResult(
        name="table1",
        passed=report.passed,
        warning=bool(report.mismatches),
        detail=detail or "16 rows match",
    )


# ---------------------------------------------------------------------------
# 退相位不变性
# ---------------------------------------------------------------------------

DFS_PHASES = (0.1, 0.5, 1.0, np.pi / 2, 2.0, np.pi, 4.0, 5.5)


def verify_dfs_invariance(phases: Sequence[float] = DFS_PHASES,
                          tolerance: float = IDENTITY_TOLERANCE) -> CheckResult:
    """逻辑态经过任意相位的窗口后只差一个全局相位"""
    states = {label.value: qcore.encode(label) for label in LogicalBasisLabel}
    states.update(qcore.logical_bell_states())
    failing = []
    for phase in phases:
        window = DephasingWindow.from_angle(phase)
        for name, state in states.items():
            if not qcore.equal_up_to_global_phase(transmit(state, window), state, tolerance):
                failing.append(f"{name}@{phase:.3f}")
    return CheckResult(
        name="dfs",
        passed=not failing,
        detail="; ".join(failing) if failing else f"{len(states)} states x {len(phases)} phases",
    )


def group_outcome_counts(channel: ChannelConfig, samples: int, seed: int) -> Counter:
    """诚实组的 (操作, 检验结果) 分布"""
    rng = np.random.default_rng(seed)
    counts: Counter = Counter()
    for _ in range(samples):
        group = simulate_checked_group("passive", channel, rng)
        counts[(group.alice_op.value, group.bob_op.value, group.check_result.value)] += 1
    return counts


def verify_dfs_statistics(samples: int = 10_000, seed: int = 0, bound: float = 0.02) -> CheckResult:
    """退相位信道与无噪声信道下的组级结果分布之间的总变差距离"""
    dephasing = group_outcome_counts(ChannelConfig.dephasing(), samples, seed)
    noiseless = group_outcome_counts(ChannelConfig.noiseless(), samples, seed + 1)
    distance = total_variation_distance(dephasing, noiseless)
    failures = sum(count for key, count in dephasing.items() if key[2] == "fail")
    return CheckResult(
        name="dfs-statistics",
        passed=distance < bound and failures == 0,
        max_deviation=distance,
        detail=f"TVD {distance:.4f} over {samples} groups, {failures} failed checks under dephasing",
    )


def run_verification(only: Optional[Sequence[str]] = None) -> List[CheckResult]:
    """verify 子命令：恒等式、关系表和退相位不变性"""
    if only:
        unknown = set(only) - set(IDENTITY_NAMES) - {"table1", "dfs"}
        if unknown:
            raise ValueError(f"未知的检查: {sorted(unknown)}")
        identity_names = [name for name in only if name in IDENTITY_NAMES]
        results = verify_identities(identity_names) if identity_names else []
        if "table1" in only:
            results.append(table1_check())
        if "dfs" in only:
            results.append(verify_dfs_invariance())
        return results
    return [*verify_identities(), table1_check(), verify_dfs_invariance()]
