"""
半诚实 TP 的参与者攻击
Attack I: Z_dp 基制备 + 公布真实的双 Bell 测量结果
Attack II: 用 Z_dp⊗Z_dp 测量代替双 Bell 测量，随机公布伪造结果
"""
from typing import Dict, Optional, Sequence

import numpy as np

from app.summation.adversaries.base import AdversaryStrategy
from app.summation.models.protocol import KeyGuess, User
from app.summation.models.state import PHI_TYPE_PAIRS, PSI_TYPE_PAIRS, DoubleBellOutcome, LogicalBasisLabel
from app.summation.quantum.qcore import Z_DP_BASIS, MeasurementBasis, StateVector, encode, measure_logical


class TpStrategy(AdversaryStrategy):
    """不诚实 TP：记录自己掌握的每个位置上的 Z_dp 信息，用于窃取 K_A、K_B"""

    is_dishonest_tp = True

    def __init__(self, target: Optional[User] = None):
        super().__init__(target=None)
        self.known_labels: Dict[tuple[User, int], LogicalBasisLabel] = {}

    def describe(self) -> str:
        return self.name

    def key_guess(self, summation_indices: Sequence[int]) -> Optional[KeyGuess]:
        if not summation_indices:
            return None
        guesses = {}
        for user in User:
            bits = []
            for index in summation_indices:
                label = self.known_labels.get((user, index))
                bits.append(str(label.bit) if label is not None else "0")
            guesses[user] = "".join(bits)
        return KeyGuess(k_a=guesses[User.ALICE], k_b=guesses[User.BOB])


class TpAttackI(TpStrategy):
    """所有粒子随机制备在 |0_dp⟩ 或 |1_dp⟩，Step 4 公布真实测量结果"""

    name = "tp-attack-1"

    def prepare(self, user: User, index: int, rng: np.random.Generator) -> StateVector:
        label = LogicalBasisLabel.from_bit(int(rng.integers(2)))
        self.known_labels[(user, index)] = label
        return encode(label)

    def eve_check_reference(self, user: User, index: int) -> tuple[MeasurementBasis, LogicalBasisLabel]:
        # TP 按自己实际制备的态检验 CTRL 粒子，自身的偏离不会在 Step 3 引发中止
        return Z_DP_BASIS, self.known_labels[(user, index)]


class TpAttackII(TpStrategy):
    """剩余组用 Z_dp⊗Z_dp 测量，按结果是否相同随机公布 φ 型或 ψ 型结果"""

    name = "tp-attack-2"

    def announce(self, index: int, alice_particle: StateVector, bob_particle: StateVector,
                 rng: np.random.Generator) -> DoubleBellOutcome:
        alice_label, _ = measure_logical(alice_particle, Z_DP_BASIS, rng)
        bob_label, _ = measure_logical(bob_particle, Z_DP_BASIS, rng)
        self.known_labels[(User.ALICE, index)] = alice_label
        self.known_labels[(User.BOB, index)] = bob_label
        candidates = PHI_TYPE_PAIRS if alice_label == bob_label else PSI_TYPE_PAIRS
        return candidates[int(rng.integers(len(candidates)))]
