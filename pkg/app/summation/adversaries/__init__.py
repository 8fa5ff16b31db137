"""
求和协议模块 - 攻击策略
按名称注册，供命令行和实验框架选择
"""
from typing import Dict, Optional, Type

from app.core.exceptions import UnsupportedAttack
from app.summation.adversaries.base import AdversaryStrategy, PassiveAdversary
from app.summation.adversaries.eve import EveDoubleCnot, EveMeasureResend, EveSingleCnot
from app.summation.adversaries.tp import TpAttackI, TpAttackII
from app.summation.models.protocol import User

ADVERSARIES: Dict[str, Type[AdversaryStrategy]] = {
    strategy.name: strategy
    for strategy in (
        PassiveAdversary,
        EveDoubleCnot,
        EveSingleCnot,
        EveMeasureResend,
        TpAttackI,
        TpAttackII,
    )
}


def create_adversary(name: str, target: Optional[User | str] = None) -> AdversaryStrategy:
    """
    按名称创建一个新的策略实例（每次运行一个）

    Raises:
        UnsupportedAttack: 名称未注册
    """
    try:
        strategy = ADVERSARIES[name]
    except KeyError:
        raise UnsupportedAttack(f"未知的攻击策略: {name}，可选: {sorted(ADVERSARIES)}") from None
    return strategy(target=User(target) if target is not None else None)


__all__ = ["ADVERSARIES", "AdversaryStrategy", "create_adversary"]
