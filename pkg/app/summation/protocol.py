"""
两方半量子求和协议引擎
TP 与 Alice、Bob 的五步状态机，输出求和结果或带原因的中止判决
"""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from app.core.exceptions import WrongRegisterSize
from app.summation.adversaries.base import PARTICLE_QUBITS, AdversaryStrategy, PassiveAdversary
from app.summation.models.channel import ChannelConfig
from app.summation.models.protocol import (
    AbortReason,
    EveCheckTally,
    GroupRecord,
    GroupRole,
    HonestyCheckResult,
    ProtocolKeys,
    ProtocolParams,
    ResourceTally,
    RunOutcome,
    User,
    UserOp,
    Verdict,
    xor_bits,
)
from app.summation.models.state import DoubleBellOutcome, LogicalBasisLabel
from app.summation.quantum.channel import sample_window, transmit
from app.summation.quantum.qcore import (
    Z_DP_BASIS,
    StateVector,
    encode,
    measure_logical,
    split_product,
    tensor,
)

logger = logging.getLogger(__name__)

QUBITS_PER_PARTICLE = 2
ANNOUNCEMENT_BITS = 4

Sequences = Dict[User, List[StateVector]]


def step1_prepare(
    params: ProtocolParams,
    rng: np.random.Generator,
    adversary: Optional[AdversaryStrategy] = None,
) -> tuple[List[StateVector], List[StateVector]]:
    """
    Step 1: TP 制备两个长度为 n·q 的粒子序列 S1（发给 Alice）和 S2（发给 Bob）

    诚实 TP 的每个粒子都是 |+_dp⟩；不诚实 TP 通过 adversary.prepare 替换。

    Raises:
        NonIntegerParticleCount: n·q 不是整数
    """
    adversary = adversary or PassiveAdversary()
    length = params.particles_per_sequence()
    s1 = [adversary.prepare(User.ALICE, i, rng) for i in range(length)]
    s2 = [adversary.prepare(User.BOB, i, rng) for i in range(length)]
    return s1, s2


def step2_user_action(
    incoming: StateVector,
    op: UserOp,
    rng: np.random.Generator,
) -> tuple[StateVector, Optional[LogicalBasisLabel]]:
    """
    Step 2: 用户对收到的粒子做 CTRL 或 SIFT

    incoming 的物理比特 (0, 1) 是逻辑粒子；若窃听者的辅助粒子仍附着在寄存器上，
    SIFT 只测量并替换粒子部分，辅助部分原样保留。

    Returns:
        (发回 TP 的寄存器, SIFT 时的 Z_dp 结果)
    """
    if op == UserOp.CTRL:
        return incoming, None

    label, collapsed = measure_logical(incoming, Z_DP_BASIS, rng, PARTICLE_QUBITS)
    fresh = encode(label)
    if incoming.num_qubits == QUBITS_PER_PARTICLE:
        return fresh, label
    _, rest = split_product(collapsed, PARTICLE_QUBITS)
    return tensor(fresh, rest), label


def exchange_particle(
    user: User,
    index: int,
    particle: StateVector,
    op: UserOp,
    adversary: AdversaryStrategy,
    channel_cfg: ChannelConfig,
    rng: np.random.Generator,
) -> tuple[StateVector, Optional[LogicalBasisLabel]]:
    """一个粒子的往返：TP → 用户 → TP，每一程一个退相位窗口"""
    flight = transmit(particle, sample_window(channel_cfg, rng), PARTICLE_QUBITS)
    flight = adversary.intercept_forward(user, index, flight, rng)
    flight, result = step2_user_action(flight, op, rng)
    flight = adversary.intercept_return(user, index, flight, rng)
    if flight.num_qubits != QUBITS_PER_PARTICLE:
        # 每个窗口只允许一个逻辑粒子进入 TP
        raise WrongRegisterSize(f"返回 TP 的寄存器必须是单个逻辑粒子: {flight.num_qubits} 个物理比特")
    flight = transmit(flight, sample_window(channel_cfg, rng), PARTICLE_QUBITS)
    return flight, result


def select_eve_check_groups(
    groups: Sequence[GroupRecord],
    params: ProtocolParams,
    rng: np.random.Generator,
) -> List[int]:
    """TP 均匀随机选出 n·r 个组用于窃听检测"""
    chosen = sorted(int(i) for i in rng.choice(len(groups), size=params.eve_check_groups, replace=False))
    for i in chosen:
        groups[i].role = GroupRole.EVE_CHECK
    return chosen


def step3_eve_check(
    groups: Sequence[GroupRecord],
    stored_states: Sequences,
    params: ProtocolParams,
    rng: np.random.Generator,
    threshold: float = 0.0,
    adversary: Optional[AdversaryStrategy] = None,
) -> tuple[Optional[Verdict], EveCheckTally]:
    """
    Step 3: TP 测量所有 EveCheck 组中返回的粒子

    CTRL 粒子在 X_dp 下应为 |+_dp⟩，SIFT 粒子在 Z_dp 下应与用户公布的结果一致。
    任一用户的 CTRL 错误率超过阈值即 EveDetectedCtrl，其次检查 SIFT。

    Returns:
        (中止判决或 None, 统计)
    """
    adversary = adversary or PassiveAdversary()
    tally = EveCheckTally()
    for group in groups:
        if group.role != GroupRole.EVE_CHECK:
            continue
        for user in User:
            particle = stored_states[user][group.index]
            if group.op_of(user) == UserOp.CTRL:
                basis, expected = adversary.eve_check_reference(user, group.index)
            else:
                basis, expected = Z_DP_BASIS, group.result_of(user)
            observed, _ = measure_logical(particle, basis, rng)
            counts = tally.counts(user, group.op_of(user))
            counts.checked += 1
            counts.errors += int(observed != expected)

    for op, reason in ((UserOp.CTRL, AbortReason.EVE_DETECTED_CTRL),
                       (UserOp.SIFT, AbortReason.EVE_DETECTED_SIFT)):
        for user in User:
            rate = tally.counts(user, op).error_rate
            if rate is not None and rate > threshold:
                logger.debug(f"Step 3 abort: {user.value} {op.value} error rate {rate:.3f} > {threshold}")
                return Verdict.aborted(reason, 3), tally
    return None, tally


def announce_remaining(
    groups: Sequence[GroupRecord],
    stored_states: Sequences,
    adversary: AdversaryStrategy,
    rng: np.random.Generator,
) -> Dict[int, DoubleBellOutcome]:
    """Step 4 前半：TP 对所有未参与窃听检测的组做双 Bell 基测量并全部公布，公布过的组先记为 Surplus"""
    announcements: Dict[int, DoubleBellOutcome] = {}
    for group in groups:
        if group.role == GroupRole.EVE_CHECK:
            continue
        outcome = adversary.announce(
            group.index,
            stored_states[User.ALICE][group.index],
            stored_states[User.BOB][group.index],
            rng,
        )
        group.role = GroupRole.SURPLUS
        group.tp_announcement = outcome
        announcements[group.index] = outcome
    return announcements


def expected_announcement_type(group: GroupRecord) -> Optional[str]:
    """诚实 TP 应当公布的结果类型：equal / phi / psi，混合组无约束"""
    if group.both_ctrl:
        return "equal"
    if group.both_sift:
        return "phi" if group.alice_result == group.bob_result else "psi"
    return None


def check_announcement(group: GroupRecord, announcement: DoubleBellOutcome) -> HonestyCheckResult:
    """单个组的 TP 诚实性检验"""
    expected = expected_announcement_type(group)
    if expected is None:
        return HonestyCheckResult.NOT_CHECKED
    consistent = {
        "equal": announcement.is_equal_pair,
        "phi": announcement.is_phi_type,
        "psi": announcement.is_psi_type,
    }[expected]
    return HonestyCheckResult.PASS if consistent else HonestyCheckResult.FAIL


def step4_honesty_check(
    groups: Sequence[GroupRecord],
    tp_announcements: Dict[int, DoubleBellOutcome],
    params: ProtocolParams,
    rng: np.random.Generator,
) -> Optional[Verdict]:
    """
    Step 4 后半：Alice 和 Bob 在全部公布之后联合随机选出 n·d 个组检验 TP

    混合 CTRL/SIFT 组标记为 not-checked，不计入失败。
    """
    candidates = sorted(tp_announcements)
    picks = rng.choice(len(candidates), size=params.honesty_check_groups, replace=False)
    failed = 0
    for pick in sorted(int(p) for p in picks):
        group = groups[candidates[pick]]
        group.role = GroupRole.TP_HONESTY_CHECK
        group.check_result = check_announcement(group, tp_announcements[group.index])
        failed += group.check_result == HonestyCheckResult.FAIL
    if failed:
        logger.debug(f"Step 4 abort: {failed} honesty-check group(s) failed")
        return Verdict.aborted(AbortReason.TP_DISHONEST, 4)
    return None


def announcement_bit(announcement: DoubleBellOutcome) -> int:
    """φ 型公布 → k_t = 0，ψ 型 → k_t = 1"""
    if announcement.is_phi_type:
        return 0
    if announcement.is_psi_type:
        return 1
    raise ValueError(f"公布结果不是单一类型，无法导出 k_t: {announcement}")


def derive_row(x_bit: int, y_bit: int, alice_result: LogicalBasisLabel,
               bob_result: LogicalBasisLabel, announcement: DoubleBellOutcome) -> Dict[str, int]:
    """一个求和位上的全部派生量 k_a, k_b, c_a, c_b, k_t, r"""
    k_a, k_b = alice_result.bit, bob_result.bit
    k_t = announcement_bit(announcement)
    c_a, c_b = k_a ^ x_bit, k_b ^ y_bit
    return {"k_a": k_a, "k_b": k_b, "c_a": c_a, "c_b": c_b, "k_t": k_t, "r": c_a ^ c_b ^ k_t}


def step5_summation(
    groups: Sequence[GroupRecord],
    tp_announcements: Dict[int, DoubleBellOutcome],
    x: str,
    y: str,
    params: ProtocolParams,
) -> RunOutcome:
    """
    Step 5: 取剩余 n(4+δ) 组中的前 n 个双 SIFT 组生成 K_A、K_B、C_T 并计算 R

    多出的双 SIFT 组保持 Surplus 角色。C_A、C_B 只在 Alice 与 Bob 之间传递。
    """
    pool = [
        groups[i] for i in sorted(tp_announcements)
        if groups[i].role != GroupRole.TP_HONESTY_CHECK
    ]
    for group in pool:
        group.role = GroupRole.SURPLUS
    sift_groups = [group for group in pool if group.both_sift]
    if len(sift_groups) < params.n:
        logger.debug(f"Step 5 abort: {len(sift_groups)} both-SIFT groups < n={params.n}")
        return RunOutcome(
            verdict=Verdict.aborted(AbortReason.INSUFFICIENT_SIFT_GROUPS, 5),
            transcript=list(groups),
        )

    rows = []
    for j, group in enumerate(sift_groups[:params.n]):
        group.role = GroupRole.SUMMATION_KEY
        rows.append(derive_row(int(x[j]), int(y[j]), group.alice_result, group.bob_result,
                               tp_announcements[group.index]))

    def column(name: str) -> str:
        return "".join(str(row[name]) for row in rows)

    keys = ProtocolKeys(
        k_a=column("k_a"), k_b=column("k_b"), c_t=column("k_t"),
        c_a=column("c_a"), c_b=column("c_b"),
    )
    result = xor_bits(keys.c_a, keys.c_b, keys.c_t)
    return RunOutcome(verdict=Verdict.succeeded(result), transcript=list(groups), keys=keys)


def _validate_inputs(params: ProtocolParams, x: str, y: str) -> None:
    for name, bits in (("x", x), ("y", y)):
        if len(bits) != params.n:
            raise ValueError(f"{name} 的长度必须等于 n={params.n}: {len(bits)}")
        if set(bits) - {"0", "1"}:
            raise ValueError(f"{name} 只能包含 0/1: {bits}")


def run_protocol(
    params: ProtocolParams,
    x: str,
    y: str,
    adversary: Optional[AdversaryStrategy] = None,
    channel_cfg: Optional[ChannelConfig] = None,
    rng: Optional[np.random.Generator] = None,
    threshold: float = 0.0,
) -> RunOutcome:
    """
    运行完整的五步协议

    每个信道上同一时刻只有一个在途粒子：TP 收到上一个粒子后才发出下一个。

    Args:
        params: 协议参数
        x: Alice 的比特串（x_1 在最左）
        y: Bob 的比特串
        adversary: 攻击策略，默认无攻击
        channel_cfg: 信道配置，默认均匀随机相位的集体退相位信道
        rng: 随机源，默认新建一个
        threshold: Step 3 容许的错误率

    Returns:
        RunOutcome: Success(R) 或 Abort(reason, step)，附完整记录
    """
    adversary = adversary or PassiveAdversary()
    channel_cfg = channel_cfg or ChannelConfig()
    rng = rng or np.random.default_rng()
    _validate_inputs(params, x, y)
    logger.debug(f"Run start: n={params.n}, adversary={adversary.describe()}, channel={channel_cfg.describe()}")

    resources = ResourceTally()
    s1, s2 = step1_prepare(params, rng, adversary)
    prepared = {User.ALICE: s1, User.BOB: s2}
    resources.tp_qubits += QUBITS_PER_PARTICLE * (len(s1) + len(s2))

    stored: Sequences = {User.ALICE: [], User.BOB: []}
    groups: List[GroupRecord] = []
    for i in range(len(s1)):
        ops = {user: UserOp.SIFT if rng.integers(2) else UserOp.CTRL for user in User}
        results: Dict[User, Optional[LogicalBasisLabel]] = {}
        for user in User:
            returned, results[user] = exchange_particle(
                user, i, prepared[user][i], ops[user], adversary, channel_cfg, rng
            )
            stored[user].append(returned)
            if ops[user] == UserOp.SIFT:
                resources.user_qubits += QUBITS_PER_PARTICLE
        groups.append(GroupRecord(
            index=i,
            alice_op=ops[User.ALICE], bob_op=ops[User.BOB],
            alice_result=results[User.ALICE], bob_result=results[User.BOB],
        ))

    def finish(outcome: RunOutcome, eve_check: EveCheckTally) -> RunOutcome:
        update = {"eve_check": eve_check, "resources": resources,
                  "ancilla_log": list(adversary.ancilla_log)}
        if outcome.verdict.success:
            summation = [g.index for g in outcome.groups_with_role(GroupRole.SUMMATION_KEY)]
            update["tp_key_guess"] = adversary.key_guess(summation)
        outcome = outcome.model_copy(update=update)
        logger.debug(f"Run finished: {outcome.verdict}")
        return outcome

    select_eve_check_groups(groups, params, rng)
    verdict, tally = step3_eve_check(groups, stored, params, rng, threshold, adversary)
    if verdict is not None:
        return finish(RunOutcome(verdict=verdict, transcript=groups), tally)

    announcements = announce_remaining(groups, stored, adversary, rng)
    verdict = step4_honesty_check(groups, announcements, params, rng)
    if verdict is not None:
        return finish(RunOutcome(verdict=verdict, transcript=groups), tally)

    outcome = step5_summation(groups, announcements, x, y, params)
    if outcome.verdict.success:
        resources.classical_bits += ANNOUNCEMENT_BITS * params.n + 2 * params.n
    return finish(outcome, tally)
