"""
Monte Carlo 实验框架
按 (seed, trial) 派生独立随机流，分块并行执行并合并计数
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional

import numpy as np

from app.core.exceptions import UnsupportedAttack
from app.summation.adversaries import create_adversary
from app.summation.analysis.formulas import analytic_detection
from app.summation.analysis.statistics import half_width, wilson_interval
from app.summation.models.channel import ChannelConfig
from app.summation.models.experiment import ExperimentReport, ExperimentSpec, TrialCounts
from app.summation.models.protocol import (
    AbortReason,
    GroupRecord,
    GroupRole,
    RunOutcome,
    User,
    UserOp,
    xor_bits,
)
from app.summation.protocol import check_announcement, exchange_particle, run_protocol

logger = logging.getLogger(__name__)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """第 trial 次运行的独立随机流"""
    return np.random.default_rng([seed, trial])


def _random_bits(rng: np.random.Generator, n: int) -> str:
    return "".join(str(int(b)) for b in rng.integers(0, 2, size=n))


def run_trial(spec: ExperimentSpec, trial: int) -> tuple[RunOutcome, str, str]:
    """执行一次带种子的运行，返回 (结果, x, y)"""
    rng = trial_rng(spec.seed, trial)
    x = spec.x if spec.x is not None else _random_bits(rng, spec.params.n)
    y = spec.y if spec.y is not None else _random_bits(rng, spec.params.n)
    adversary = create_adversary(spec.adversary, spec.target)
    outcome = run_protocol(spec.params, x, y, adversary, spec.channel, rng, spec.threshold)
    return outcome, x, y


def tally_outcome(outcome: RunOutcome, x: str, y: str) -> TrialCounts:
    """把一次运行折算成计数"""
    counts = TrialCounts(trials=1)
    verdict = outcome.verdict
    if verdict.success:
        counts.successes = 1
        counts.correctness_failures = int(verdict.result != xor_bits(x, y))
    else:
        counts.aborts = {verdict.reason.value: 1}

    for user in User:
        for op in UserOp:
            key = f"{user.value}_{op.value.lower()}"
            check = outcome.eve_check.counts(user, op)
            counts.check_checked[key] = check.checked
            counts.check_errors[key] = check.errors

    ops = {(group.index, user): group.op_of(user) for group in outcome.transcript for user in User}
    for record in outcome.ancilla_log:
        if record.inferred_op is not None:
            counts.inference_total += 1
            counts.inference_correct += int(record.inferred_op == ops[(record.index, record.user)])

    if verdict.success and outcome.tp_key_guess is not None and outcome.keys is not None:
        guess = outcome.tp_key_guess.k_a + outcome.tp_key_guess.k_b
        truth = outcome.keys.k_a + outcome.keys.k_b
        counts.leakage_total = len(truth)
        counts.leakage_correct = sum(g == t for g, t in zip(guess, truth))

    if verdict.success or verdict.reason == AbortReason.INSUFFICIENT_SIFT_GROUPS:
        pool = [g for g in outcome.transcript
                if g.role in (GroupRole.SUMMATION_KEY, GroupRole.SURPLUS)]
        counts.both_sift_runs = 1
        counts.both_sift_groups = sum(g.both_sift for g in pool)
    return counts


def _run_chunk(spec: ExperimentSpec, start: int, stop: int) -> TrialCounts:
    total = TrialCounts()
    for trial in range(start, stop):
        outcome, x, y = run_trial(spec, trial)
        total = total.merge(tally_outcome(outcome, x, y))
    return total


def _chunks(trials: int, workers: int) -> List[tuple[int, int]]:
    size = -(-trials // workers)
    return [(start, min(start + size, trials)) for start in range(0, trials, size)]


def _ratio(numerator: int, denominator: int) -> Optional[float]:
    return numerator / denominator if denominator else None


def build_report(spec: ExperimentSpec, counts: TrialCounts, wall_time: float = 0.0) -> ExperimentReport:
    """由合并后的计数生成报告"""
    interval = wilson_interval(counts.detections, counts.trials)
    try:
        prediction = analytic_detection(spec.adversary, spec.params.honesty_check_groups)
    except UnsupportedAttack:
        prediction = None

    return ExperimentReport(
        spec=spec,
        trials=counts.trials,
        successes=counts.successes,
        detection_rate=counts.detections / counts.trials,
        ci95=interval,
        ci95_half_width=half_width(interval),
        analytic_prediction=prediction,
        abort_breakdown=dict(sorted(counts.aborts.items())),
        correctness_failures=counts.correctness_failures,
        key_leakage=_ratio(counts.leakage_correct, counts.leakage_total),
        check_error_rates={
            key: _ratio(counts.check_errors.get(key, 0), checked)
            for key, checked in sorted(counts.check_checked.items())
        },
        eve_inference_accuracy=_ratio(counts.inference_correct, counts.inference_total),
        insufficient_sift_rate=counts.aborts.get(AbortReason.INSUFFICIENT_SIFT_GROUPS.value, 0) / counts.trials,
        mean_both_sift_groups=_ratio(counts.both_sift_groups, counts.both_sift_runs),
        expected_both_sift_groups=spec.params.expected_both_sift_groups,
        wall_time=wall_time,
    )


def run_experiment(spec: ExperimentSpec) -> ExperimentReport:
    """
    执行 spec.trials 次独立运行

    种子固定时报告（wall_time 除外）与 workers 数量无关。

    Raises:
        NonIntegerParticleCount: n·q 不是整数
        UnsupportedAttack: 攻击策略未注册
    """
    spec.params.particles_per_sequence()
    create_adversary(spec.adversary, spec.target)
    logger.info(
        f"Experiment start: adversary={spec.adversary}, trials={spec.trials}, "
        f"seed={spec.seed}, channel={spec.channel.describe()}, workers={spec.workers}"
    )
    started = time.perf_counter()

    if spec.workers == 1 or spec.trials == 1:
        counts = _run_chunk(spec, 0, spec.trials)
    else:
        counts = TrialCounts()
        with ProcessPoolExecutor(max_workers=spec.workers) as executor:
            futures = [executor.submit(_run_chunk, spec, start, stop)
                       for start, stop in _chunks(spec.trials, spec.workers)]
            for future in futures:
                counts = counts.merge(future.result())

    report = build_report(spec, counts, time.perf_counter() - started)
    logger.info(
        f"Experiment finished: detection_rate={report.detection_rate:.4f}, "
        f"correctness_failures={report.correctness_failures}, wall_time={report.wall_time:.2f}s"
    )
    if report.correctness_failures:
        logger.warning(f"{report.correctness_failures} successful run(s) returned R != x XOR y")
    return report


def simulate_checked_group(
    attack: str,
    channel: ChannelConfig,
    rng: np.random.Generator,
    target: User = User.ALICE,
) -> GroupRecord:
    """
    单独模拟一个被选作 TP 诚实性检测的组

    用户随机选择操作，TP 按策略制备并公布，返回带 check_result 的组记录。
    """
    adversary = create_adversary(attack, target)
    ops = {user: UserOp.SIFT if rng.integers(2) else UserOp.CTRL for user in User}
    returned, results = {}, {}
    for user in User:
        particle = adversary.prepare(user, 0, rng)
        returned[user], results[user] = exchange_particle(user, 0, particle, ops[user], adversary, channel, rng)
    announcement = adversary.announce(0, returned[User.ALICE], returned[User.BOB], rng)
    group = GroupRecord(
        index=0,
        alice_op=ops[User.ALICE], bob_op=ops[User.BOB],
        alice_result=results[User.ALICE], bob_result=results[User.BOB],
        role=GroupRole.TP_HONESTY_CHECK, tp_announcement=announcement,
    )
    group.check_result = check_announcement(group, announcement)
    return group
