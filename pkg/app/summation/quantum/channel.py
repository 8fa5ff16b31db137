"""
集体退相位噪声信道
|0⟩ → |0⟩, |1⟩ → e^{iφ}|1⟩，同一时间窗口内所有物理比特共享 φ
"""
import logging
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from app.summation.models.channel import (
    TWO_PI,
    ChannelConfig,
    ChannelMode,
    DephasingWindow,
    PhaseDistribution,
)
from app.summation.quantum.qcore import StateVector

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def _hamming_weights(num_qubits: int, qubits: tuple[int, ...]) -> np.ndarray:
    """每个计算基索引在给定比特上的 1 的个数"""
    indices = np.arange(1 << num_qubits)
    weights = np.zeros(1 << num_qubits, dtype=np.int64)
    for qubit in qubits:
        weights += (indices >> (num_qubits - 1 - qubit)) & 1
    weights.setflags(write=False)
    return weights


def transmit(
    s: StateVector,
    window: DephasingWindow,
    qubits: Optional[Sequence[int]] = None,
) -> StateVector:
    """
    让寄存器（或其中的 qubits）经过一个退相位窗口

    每个计算基振幅乘以 e^{iφ·w}，w 为该基态在被传输比特上的汉明重量。
    """
    if window.phase == 0.0:
        return s
    qubits = tuple(range(s.num_qubits)) if qubits is None else tuple(qubits)
    weights = _hamming_weights(s.num_qubits, qubits)
    return StateVector(s.amplitudes * np.exp(1j * window.phase * weights), normalize=True)


def sample_window(cfg: ChannelConfig, rng: np.random.Generator) -> DephasingWindow:
    """按信道配置抽取一个窗口的相位"""
    if cfg.mode == ChannelMode.NOISELESS:
        return DephasingWindow(phase=0.0)
    if cfg.phase_distribution == PhaseDistribution.FIXED_PHASE:
        return DephasingWindow(phase=cfg.fixed_phase)
    return DephasingWindow.from_angle(float(rng.uniform(0.0, TWO_PI)))
