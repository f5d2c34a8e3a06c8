"""
Bratteli图数据模型
定义强极大TAF代数的有限表示：分量、嵌入臂、平稳模板、矩阵单位
"""

import dataclasses
import typing as tp
from functools import cached_property

from src.errors import DataParseError
from src.models.base import BaseModel, require_int

LAYOUT_BLOCK = "block"
LAYOUT_INTERLEAVE = "interleave"
LAYOUTS = (LAYOUT_BLOCK, LAYOUT_INTERLEAVE)


@dataclasses.dataclass(frozen=True, order=True, slots=True)
class MatrixUnit(BaseModel):
    """
    矩阵单位 e^{(level)}_{row,col}
    位于第 level 层、第 summand 个分量，上三角要求 row ≤ col
    """

    level: int
    summand: int
    row: int
    col: int

    @property
    def is_diagonal(self) -> bool:
        return self.row == self.col

    @classmethod
    def load(cls, d: tp.Optional[dict], where: str = "$"):
        """
        从字典加载矩阵单位 {level, summand, row, col}

        Raises:
            DataParseError: 字段缺失或 row > col
        """
        if not isinstance(d, dict):
            raise DataParseError(
                message="矩阵单位需要一个对象", details={"location": where}
            )
        unit = cls(
            level=require_int(d, "level", where, minimum=1),
            summand=require_int(d, "summand", where, minimum=0),
            row=require_int(d, "row", where, minimum=1),
            col=require_int(d, "col", where, minimum=1),
        )
        if unit.row > unit.col:
            raise DataParseError(
                message="矩阵单位必须是上三角的 (row ≤ col)",
                details={"location": where, "row": unit.row, "col": unit.col},
            )
        return unit

    def __str__(self):
        return f"e^({self.level},{self.summand})_{{{self.row},{self.col}}}"


@dataclasses.dataclass(frozen=True)
class Summand(BaseModel):
    """
    分量：第 level 层的第 id 个上三角矩阵代数 T_size
    """

    level: int
    id: int
    size: int


@dataclasses.dataclass(frozen=True)
class EmbeddingArm(BaseModel):
    """
    嵌入臂：从第 level 层分量 source 到第 level+1 层分量 target 的一个重数为一的嵌入，
    injection[k-1] 是位置 k 的像（严格递增）
    """

    level: int
    source: int
    target: int
    injection: tp.Tuple[int, ...]

    def __call__(self, k: int) -> int:
        """位置 k（从1开始）的像"""
        return self.injection[k - 1]

    @classmethod
    def load(cls, d: tp.Optional[dict], where: str = "$"):
        if not isinstance(d, dict):
            raise DataParseError(message="嵌入臂需要一个对象", details={"location": where})
        injection = d.get("injection")
        if not isinstance(injection, list) or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in injection
        ):
            raise DataParseError(
                message="injection 必须是整数列表",
                details={"location": f"{where}.injection"},
            )
        return cls(
            level=require_int(d, "level", where, minimum=1),
            source=require_int(d, "source", where, minimum=0),
            target=require_int(d, "target", where, minimum=0),
            injection=tuple(injection),
        )

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "source": self.source,
            "target": self.target,
            "injection": list(self.injection),
        }


@dataclasses.dataclass(frozen=True)
class StationaryTemplate(BaseModel):
    """
    平稳模板：从 from_level 起每层的分量类型与臂模式重复（尺寸可以增长）

    Attributes:
        from_level: 模板开始生效的层
        types: 每层分量按顺序对应的类型名
        arms: 按顺序列出的 (源类型, 目标类型)
        layout: (目标类型, 排布方式) 列表，排布方式为 block 或 interleave
    """

    from_level: int
    types: tp.Tuple[str, ...]
    arms: tp.Tuple[tp.Tuple[str, str], ...]
    layout: tp.Tuple[tp.Tuple[str, str], ...] = ()

    def layout_of(self, type_name: str) -> str:
        """目标类型的排布方式（默认 block）"""
        return dict(self.layout).get(type_name, LAYOUT_BLOCK)

    def type_index(self, type_name: str) -> int:
        return self.types.index(type_name)

    @classmethod
    def load(cls, d: tp.Optional[dict], where: str = "$"):
        """
        从 {from_level, template: {types, arms, layout}} 加载

        Raises:
            DataParseError: 结构不符或引用了未声明的类型
        """
        if not isinstance(d, dict):
            raise DataParseError(message="stationary 需要一个对象", details={"location": where})
        from_level = require_int(d, "from_level", where, minimum=1)
        template = d.get("template")
        if not isinstance(template, dict):
            raise DataParseError(
                message="缺少 template 对象", details={"location": f"{where}.template"}
            )
        types = template.get("types")
        arms = template.get("arms")
        layout = template.get("layout", {})
        if not isinstance(types, list) or not types or not all(isinstance(t, str) for t in types):
            raise DataParseError(
                message="template.types 必须是非空字符串列表",
                details={"location": f"{where}.template.types"},
            )
        if len(set(types)) != len(types):
            raise DataParseError(
                message="template.types 中有重复类型",
                details={"location": f"{where}.template.types"},
            )
        if not isinstance(arms, list):
            raise DataParseError(
                message="template.arms 必须是列表",
                details={"location": f"{where}.template.arms"},
            )
        parsed_arms = []
        for i, arm in enumerate(arms):
            if (
                not isinstance(arm, list)
                or len(arm) != 2
                or arm[0] not in types
                or arm[1] not in types
            ):
                raise DataParseError(
                    message="模板臂必须是 [源类型, 目标类型] 且类型已声明",
                    details={"location": f"{where}.template.arms[{i}]", "got": repr(arm)},
                )
            parsed_arms.append((arm[0], arm[1]))
        if not isinstance(layout, dict):
            raise DataParseError(
                message="template.layout 必须是对象",
                details={"location": f"{where}.template.layout"},
            )
        for type_name, mode in layout.items():
            if type_name not in types or mode not in LAYOUTS:
                raise DataParseError(
                    message=f"排布方式必须是 {LAYOUTS} 之一且类型已声明",
                    details={"location": f"{where}.template.layout.{type_name}"},
                )
        return cls(
            from_level=from_level,
            types=tuple(types),
            arms=tuple(parsed_arms),
            layout=tuple(sorted(layout.items())),
        )

    def to_dict(self) -> dict:
        return {
            "from_level": self.from_level,
            "template": {
                "types": list(self.types),
                "arms": [list(a) for a in self.arms],
                "layout": dict(self.layout),
            },
        }


@dataclasses.dataclass(frozen=True)
class TafPresentation(BaseModel):
    """
    强极大TAF代数的有限表示 A = lim(A_i, φ_i)，截断到 depth 层

    Attributes:
        levels: 每层分量尺寸 levels[i-1][j] = size(第i层第j个分量)
        arms: 相邻层之间的嵌入臂
        stationary: 可选的平稳模板
    """

    levels: tp.Tuple[tp.Tuple[int, ...], ...]
    arms: tp.Tuple[EmbeddingArm, ...]
    stationary: tp.Optional[StationaryTemplate] = None

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def is_stationary(self) -> bool:
        return self.stationary is not None

    def size(self, level: int, summand: int) -> int:
        return self.levels[level - 1][summand]

    def summands(self, level: int) -> tp.List[Summand]:
        return [
            Summand(level=level, id=j, size=s)
            for j, s in enumerate(self.levels[level - 1])
        ]

    def type_of(self, level: int, summand: int) -> tp.Optional[str]:
        """分量的模板类型名（模板生效之前的层返回 None）"""
        if self.stationary is None or level < self.stationary.from_level:
            return None
        return self.stationary.types[summand]

    def label(self, level: int, summand: int) -> str:
        """分量的可读标签"""
        type_name = self.type_of(level, summand)
        return type_name if type_name is not None else f"s{summand}"

    @cached_property
    def _arms_by_source(self) -> tp.Dict[tp.Tuple[int, int], tp.Tuple[EmbeddingArm, ...]]:
        index: tp.Dict[tp.Tuple[int, int], tp.List[EmbeddingArm]] = {}
        for arm in self.arms:
            index.setdefault((arm.level, arm.source), []).append(arm)
        return {k: tuple(v) for k, v in index.items()}

    @cached_property
    def _arm_positions(self) -> tp.Dict[EmbeddingArm, int]:
        return {arm: i for i, arm in enumerate(self.arms)}

    def arms_from(self, level: int, summand: int) -> tp.Tuple[EmbeddingArm, ...]:
        """从 (level, summand) 出发的所有臂（保持输入顺序）"""
        return self._arms_by_source.get((level, summand), ())

    def arm_index(self, arm: EmbeddingArm) -> int:
        """臂在表示中的序号（用于包络臂的来源标注）"""
        return self._arm_positions[arm]

    def units(self, level: int) -> tp.Iterator[MatrixUnit]:
        """按 (summand, row, col) 顺序枚举第 level 层所有上三角矩阵单位"""
        for j, n in enumerate(self.levels[level - 1]):
            for k in range(1, n + 1):
                for l in range(k, n + 1):
                    yield MatrixUnit(level, j, k, l)

    @classmethod
    def load(cls, d: tp.Optional[dict], where: str = "$"):
        """
        从 {levels, arms, stationary} 文档加载

        Raises:
            DataParseError: 文档结构不符
        """
        if not isinstance(d, dict):
            raise DataParseError(message="表示需要一个对象", details={"location": where})
        levels = d.get("levels")
        if not isinstance(levels, list) or not levels:
            raise DataParseError(
                message="levels 必须是非空列表", details={"location": f"{where}.levels"}
            )
        parsed_levels = []
        for i, level in enumerate(levels):
            if not isinstance(level, list) or not level or not all(
                isinstance(s, int) and not isinstance(s, bool) for s in level
            ):
                raise DataParseError(
                    message="每一层必须是非空的整数尺寸列表",
                    details={"location": f"{where}.levels[{i}]"},
                )
            parsed_levels.append(tuple(level))
        arms = d.get("arms", [])
        if not isinstance(arms, list):
            raise DataParseError(
                message="arms 必须是列表", details={"location": f"{where}.arms"}
            )
        parsed_arms = tuple(
            EmbeddingArm.load(a, where=f"{where}.arms[{i}]") for i, a in enumerate(arms)
        )
        stationary = d.get("stationary")
        template = (
            StationaryTemplate.load(stationary, where=f"{where}.stationary")
            if stationary is not None
            else None
        )
        return cls(levels=tuple(parsed_levels), arms=parsed_arms, stationary=template)

    def to_dict(self) -> dict:
        d = {
            "levels": [list(level) for level in self.levels],
            "arms": [arm.to_dict() for arm in self.arms],
        }
        if self.stationary is not None:
            d["stationary"] = self.stationary.to_dict()
        return d
