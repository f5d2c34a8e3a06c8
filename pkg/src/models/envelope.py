"""
包络图数据模型
区间投影节点、包络臂与派生的Bratteli图 B'
"""

import dataclasses
import typing as tp
from functools import cached_property

from src.models.base import BaseModel
from src.models.diagram import MatrixUnit, TafPresentation

KEPT_FINITE = "finite"
KEPT_STATIONARY = "stationary"
KEPT_HORIZON = "horizon"


@dataclasses.dataclass(frozen=True, order=True, slots=True)
class IntervalProjection(BaseModel):
    """第 level 层第 summand 个分量上的对角区间投影 [a, b]"""

    level: int
    summand: int
    a: int
    b: int

    @property
    def size(self) -> int:
        return self.b - self.a + 1

    @property
    def corner(self) -> MatrixUnit:
        """右上角矩阵单位 e_{a,b}"""
        return MatrixUnit(self.level, self.summand, self.a, self.b)

    def contains_position(self, k: int) -> bool:
        return self.a <= k <= self.b

    def __str__(self):
        return f"[{self.a},{self.b}]@({self.level},{self.summand})"


@dataclasses.dataclass(frozen=True, slots=True)
class EnvelopeNode(BaseModel):
    """
    包络节点：区间投影及其标记

    Attributes:
        projection: 区间投影
        maximal: 是否为所在分量中的极大 J-自由区间
        kept: 是否保留到 B'（None 表示在视界内无法判定）
    """

    projection: IntervalProjection
    maximal: bool
    kept: tp.Optional[bool]

    def to_dict(self) -> dict:
        p = self.projection
        return {
            "level": p.level,
            "summand": p.summand,
            "a": p.a,
            "b": p.b,
            "maximal": self.maximal,
            "kept": self.kept,
        }


@dataclasses.dataclass(frozen=True, slots=True)
class EnvelopeArm(BaseModel):
    """
    包络臂 π_i 的一个重数为一的分量

    相对坐标下的注入为 m ↦ ι(a+m-1) - c + 1；images 与原臂共享同一个元组。

    Attributes:
        source: 源节点 [a,b]（第 i 层）
        target: 目标节点 [c,d]（第 i+1 层）
        origin: 诱导该臂的原表示臂序号
        images: 原臂的全部像 ι(1), ..., ι(n)
    """

    source: IntervalProjection
    target: IntervalProjection
    origin: int
    images: tp.Tuple[int, ...] = dataclasses.field(default=(), repr=False, compare=False)

    @property
    def level(self) -> int:
        return self.source.level

    def __call__(self, m: int) -> int:
        return self.images[self.source.a + m - 2] - self.target.a + 1

    @property
    def injection(self) -> tp.Tuple[int, ...]:
        return tuple(self(m) for m in range(1, self.source.size + 1))

    def to_dict(self) -> dict:
        return {
            "level": self.source.level,
            "source": [self.source.summand, self.source.a, self.source.b],
            "target": [self.target.summand, self.target.a, self.target.b],
            "injection": list(self.injection),
            "origin": self.origin,
        }


@dataclasses.dataclass(frozen=True)
class EnvelopeDiagram(BaseModel):
    """
    商代数 C*-包络的派生Bratteli图

    Attributes:
        presentation: 原表示
        depth: 记录的层数
        levels: levels[i-1] 为第 i 层的节点（按 (summand, a, b) 排序）
        arms: 相邻层之间的包络臂
        horizon: 保留判定使用的视界
        lookahead: 判定时实际计算到的层
        kept_method: finite / stationary / horizon
        final: 顶层是否是表示的最终层（有限系统）
    """

    presentation: TafPresentation
    depth: int
    levels: tp.Tuple[tp.Tuple[EnvelopeNode, ...], ...]
    arms: tp.Tuple[EnvelopeArm, ...]
    horizon: int
    lookahead: int
    kept_method: str
    final: bool

    @cached_property
    def _node_index(self) -> tp.Dict[IntervalProjection, EnvelopeNode]:
        return {n.projection: n for level in self.levels for n in level}

    @cached_property
    def _out_arms(self) -> tp.Dict[IntervalProjection, tp.Tuple[EnvelopeArm, ...]]:
        index: tp.Dict[IntervalProjection, tp.List[EnvelopeArm]] = {}
        for arm in self.arms:
            index.setdefault(arm.source, []).append(arm)
        return {k: tuple(v) for k, v in index.items()}

    def nodes(self, level: int) -> tp.Tuple[EnvelopeNode, ...]:
        return self.levels[level - 1]

    def node(self, p: IntervalProjection) -> EnvelopeNode:
        return self._node_index[p]

    def arms_from(self, p: IntervalProjection) -> tp.Tuple[EnvelopeArm, ...]:
        return self._out_arms.get(p, ())

    def arms_between(
        self, source: IntervalProjection, target: IntervalProjection
    ) -> tp.List[EnvelopeArm]:
        return [arm for arm in self.arms_from(source) if arm.target == target]

    def kept(self, level: int) -> tp.List[IntervalProjection]:
        return [n.projection for n in self.levels[level - 1] if n.kept]

    def undecided(self, level: int) -> tp.List[IntervalProjection]:
        return [n.projection for n in self.levels[level - 1] if n.kept is None]

    @property
    def decided_depth(self) -> int:
        """最后一个所有节点都已判定的层（之前各层也都已判定）"""
        for i, level in enumerate(self.levels, start=1):
            if any(n.kept is None for n in level):
                return i - 1
        return self.depth

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "horizon": self.horizon,
            "lookahead": self.lookahead,
            "kept_method": self.kept_method,
            "final": self.final,
            "levels": [[n.to_dict() for n in level] for level in self.levels],
            "arms": [arm.to_dict() for arm in self.arms],
        }
