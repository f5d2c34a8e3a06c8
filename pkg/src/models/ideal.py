"""
理想数据模型
用阈值轮廓表示每个分量上的闭集，用逐层闭集表表示深度有界的理想
"""

import dataclasses
import typing as tp

from src.errors import DataParseError
from src.models.base import BaseModel
from src.models.diagram import MatrixUnit, TafPresentation

MEMBER_IN = "in"
MEMBER_OUT = "out-at-depth"


@dataclasses.dataclass(frozen=True)
class ClosedSet:
    """
    T_n 上满足逐层闭包条件的矩阵单位集合

    threshold[k-1] = t(k)：第 k 行中 (k,l) 属于集合当且仅当 l ≥ t(k)。
    t 单调不减且 k ≤ t(k) ≤ n+1（t(k) = n+1 表示该行为空）。
    """

    size: int
    threshold: tp.Tuple[int, ...]

    @classmethod
    def empty(cls, size: int) -> "ClosedSet":
        return cls(size, tuple([size + 1] * size))

    @classmethod
    def full(cls, size: int) -> "ClosedSet":
        return cls(size, tuple(range(1, size + 1)))

    @classmethod
    def from_pairs(cls, size: int, pairs: tp.Iterable[tp.Tuple[int, int]]) -> "ClosedSet":
        """
        包含给定 (row, col) 的最小闭集

        (k0,l0) 生成所有 k ≤ k0、l ≥ l0 的单位，于是 t(k) = min{l0 : k0 ≥ k}
        """
        best = [size + 1] * (size + 2)
        for k, l in pairs:
            if l < best[k]:
                best[k] = l
        threshold = [size + 1] * size
        running = size + 1
        for k in range(size, 0, -1):
            running = min(running, best[k])
            threshold[k - 1] = running
        return cls(size, tuple(threshold))

    def __contains__(self, pair: tp.Tuple[int, int]) -> bool:
        k, l = pair
        return 1 <= k <= l <= self.size and l >= self.threshold[k - 1]

    def __len__(self) -> int:
        return sum(self.size + 1 - t for t in self.threshold)

    def is_empty(self) -> bool:
        return self.threshold[0] == self.size + 1 if self.size else True

    def pairs(self) -> tp.Iterator[tp.Tuple[int, int]]:
        for k in range(1, self.size + 1):
            for l in range(self.threshold[k - 1], self.size + 1):
                yield (k, l)

    def corners(self) -> tp.List[tp.Tuple[int, int]]:
        """最小生成元：每个阈值台阶的最右下角"""
        out = []
        for k in range(1, self.size + 1):
            t = self.threshold[k - 1]
            if t > self.size:
                continue
            if k == self.size or self.threshold[k] > t:
                out.append((k, t))
        return out

    def intersection(self, other: "ClosedSet") -> "ClosedSet":
        return ClosedSet(self.size, tuple(map(max, self.threshold, other.threshold)))

    def union(self, other: "ClosedSet") -> "ClosedSet":
        return ClosedSet(self.size, tuple(map(min, self.threshold, other.threshold)))

    def issubset(self, other: "ClosedSet") -> bool:
        return all(a >= b for a, b in zip(self.threshold, other.threshold))


@dataclasses.dataclass(frozen=True)
class IdealTable(BaseModel):
    """
    深度有界的理想表

    Attributes:
        presentation: 所属的表示
        sets: sets[i-1][j] 为第 i 层第 j 个分量上的闭集
        saturated: 每层是否已应用过反向饱和
        exact: 表是否在全部深度上精确（否则 out 答案只在当前深度成立）
        qualifier: 精确性说明
    """

    presentation: TafPresentation
    sets: tp.Tuple[tp.Tuple[ClosedSet, ...], ...]
    saturated: tp.Tuple[bool, ...]
    exact: bool = False
    qualifier: str = "depth-qualified"

    @property
    def depth(self) -> int:
        return len(self.sets)

    def closed_set(self, level: int, summand: int) -> ClosedSet:
        return self.sets[level - 1][summand]

    def contains_unit(self, u: MatrixUnit) -> bool:
        return (u.row, u.col) in self.sets[u.level - 1][u.summand]

    def units(self, level: int) -> tp.List[MatrixUnit]:
        return [
            MatrixUnit(level, j, k, l)
            for j, cs in enumerate(self.sets[level - 1])
            for k, l in cs.pairs()
        ]

    def unit_set(self, depth: tp.Optional[int] = None) -> tp.FrozenSet[MatrixUnit]:
        """前 depth 层的全部矩阵单位"""
        depth = self.depth if depth is None else depth
        return frozenset(u for i in range(1, depth + 1) for u in self.units(i))

    def generators(self) -> tp.List[MatrixUnit]:
        """每层每个分量的角点（按层、分量顺序）"""
        return [
            MatrixUnit(i, j, k, l)
            for i, level_sets in enumerate(self.sets, start=1)
            for j, cs in enumerate(level_sets)
            for k, l in cs.corners()
        ]

    def same_sets(self, other: "IdealTable", depth: tp.Optional[int] = None) -> bool:
        depth = min(self.depth, other.depth) if depth is None else depth
        return self.sets[:depth] == other.sets[:depth]

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "exact": self.exact,
            "qualifier": self.qualifier,
            "saturated": list(self.saturated),
            "generators": [u.to_dict() for u in self.generators()],
            "levels": [
                {"level": i, "units": [u.to_dict() for u in self.units(i)]}
                for i in range(1, self.depth + 1)
            ],
        }


@dataclasses.dataclass(frozen=True)
class IdealDocument(BaseModel):
    """
    理想文件：生成元列表，可选深度
    """

    generators: tp.Tuple[MatrixUnit, ...]
    depth: tp.Optional[int] = None

    @classmethod
    def load(cls, d: tp.Optional[dict], where: str = "$"):
        if not isinstance(d, dict):
            raise DataParseError(message="理想文件需要一个对象", details={"location": where})
        generators = d.get("generators")
        if not isinstance(generators, list):
            raise DataParseError(
                message="generators 必须是列表", details={"location": f"{where}.generators"}
            )
        depth = d.get("depth")
        if depth is not None and (isinstance(depth, bool) or not isinstance(depth, int) or depth < 1):
            raise DataParseError(
                message="depth 必须是正整数", details={"location": f"{where}.depth"}
            )
        return cls(
            generators=tuple(
                MatrixUnit.load(g, where=f"{where}.generators[{i}]")
                for i, g in enumerate(generators)
            ),
            depth=depth,
        )

    def to_dict(self) -> dict:
        d = {"generators": [u.to_dict() for u in self.generators]}
        if self.depth is not None:
            d["depth"] = self.depth
        return d
