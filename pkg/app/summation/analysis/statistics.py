"""
统计工具
Wilson 置信区间、总变差距离、经验互信息以及诚实但好奇的 TP 的视图
"""
import math
from collections import Counter
from typing import Hashable, Iterable, Mapping, Tuple

from scipy.stats import norm

from app.summation.models.protocol import GroupRole, RunOutcome


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """
    比例的 Wilson score 区间

    Args:
        successes: 事件发生次数
        trials: 总试验次数
        confidence: 置信水平

    Returns:
        (下界, 上界)
    """
    if trials <= 0:
        raise ValueError(f"试验次数必须为正: {trials}")
    if not 0 <= successes <= trials:
        raise ValueError(f"成功次数必须在[0, {trials}]之间: {successes}")
    z = norm.ppf(1 - (1 - confidence) / 2)
    p = successes / trials
    denominator = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denominator
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denominator
    return max(0.0, centre - half), min(1.0, centre + half)


def half_width(interval: Tuple[float, float]) -> float:
    return (interval[1] - interval[0]) / 2


def total_variation_distance(a: Mapping[Hashable, int], b: Mapping[Hashable, int]) -> float:
    """两个经验分布（计数表）之间的总变差距离"""
    total_a, total_b = sum(a.values()), sum(b.values())
    if not total_a or not total_b:
        raise ValueError("计数表不能为空")
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a.get(k, 0) / total_a - b.get(k, 0) / total_b) for k in keys)


def empirical_mutual_information(pairs: Iterable[Tuple[Hashable, Hashable]]) -> float:
    """样本对 (u, v) 的经验互信息（比特）"""
    joint = Counter(pairs)
    total = sum(joint.values())
    if not total:
        return 0.0
    left, right = Counter(), Counter()
    for (u, v), count in joint.items():
        left[u] += count
        right[v] += count
    information = 0.0
    for (u, v), count in joint.items():
        information += count / total * math.log2(count * total / (left[u] * right[v]))
    return information


def tp_view(outcome: RunOutcome) -> str:
    """
    TP 在求和组上能看到的比特：自己公布结果的类型（即 C_T）

    C_A、C_B 只在 Alice 与 Bob 之间传递，不属于 TP 的视图。
    """
    bits = []
    for group in outcome.groups_with_role(GroupRole.SUMMATION_KEY):
        bits.append("0" if group.tp_announcement.is_phi_type else "1")
    return "".join(bits)
