"""
判定结果模型
素性判定、交不可约判定和表示验证违规项
"""

import dataclasses
import typing as tp

from src.models.base import BaseModel
from src.models.envelope import IntervalProjection

PRIMITIVE = "primitive"
NOT_PRIME = "not-prime"
INCONCLUSIVE = "inconclusive-at-horizon"

YES = "yes"
NO = "no"
UNKNOWN = "inconclusive-at-depth"


@dataclasses.dataclass(frozen=True)
class Violation(BaseModel):
    """
    表示不变量的一次违反

    Attributes:
        kind: overlap / gap / not-increasing / no-outgoing-arm / size / template
        level: 所在层
        summand: 所在分量
        arm: 相关臂的序号
        positions: 涉及的位置
        message: 可读说明
    """

    kind: str
    level: int
    summand: tp.Optional[int] = None
    arm: tp.Optional[int] = None
    positions: tp.Tuple[int, ...] = ()
    message: str = ""

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["positions"] = list(self.positions)
        return d


@dataclasses.dataclass(frozen=True)
class PrimenessVerdict(BaseModel):
    """
    包络图的素性判定

    节点可以是包络中的区间投影，也可以是类型图中的类型名。

    Attributes:
        status: primitive / not-prime / inconclusive-at-horizon
        method: pairwise / bounded / empty
        witness: 本原时的本质路径前缀（每层一个节点）
        counterexample: 非素时无公共后代的一对节点
        pairs: 全部失败的节点对（用于构造交不可约的反例）
        preperiod: 可达矩阵序列的前周期
        period: 可达矩阵序列的周期
        window: 分析覆盖的最后一层
        lag: 反例中第二个节点比第一个晚的层数
    """

    status: str
    method: str
    witness: tp.Tuple[tp.Any, ...] = ()
    counterexample: tp.Optional[tp.Tuple[tp.Any, tp.Any]] = None
    pairs: tp.Tuple[tp.Tuple[tp.Any, tp.Any], ...] = ()
    preperiod: tp.Optional[int] = None
    period: tp.Optional[int] = None
    window: tp.Optional[int] = None
    lag: int = 0
    note: str = ""

    @property
    def is_primitive(self) -> bool:
        return self.status == PRIMITIVE

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "method": self.method,
            "witness": [_node_dict(p) for p in self.witness],
            "counterexample": (
                [_node_dict(p) for p in self.counterexample] if self.counterexample else None
            ),
            "preperiod": self.preperiod,
            "period": self.period,
            "window": self.window,
            "lag": self.lag,
            "note": self.note,
        }


def _node_dict(node: tp.Any):
    if isinstance(node, IntervalProjection):
        return node.to_dict()
    return str(node)
