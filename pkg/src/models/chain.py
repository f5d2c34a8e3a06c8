"""
mi-链与链检查结果模型
"""

import dataclasses
import typing as tp

from src.errors import DataParseError
from src.models.base import BaseModel, require_int
from src.models.diagram import MatrixUnit


@dataclasses.dataclass(frozen=True)
class MiChain(BaseModel):
    """
    矩阵单位链：从 start_level 起每层一个单位

    Attributes:
        start_level: 起始层 N
        units: 第 N, N+1, ... 层的矩阵单位
    """

    start_level: int
    units: tp.Tuple[MatrixUnit, ...]

    @property
    def last_level(self) -> int:
        return self.start_level + len(self.units) - 1

    def at(self, level: int) -> tp.Optional[MatrixUnit]:
        """第 level 层的链单位（超出链范围时返回 None）"""
        idx = level - self.start_level
        if 0 <= idx < len(self.units):
            return self.units[idx]
        return None

    def truncated(self, last_level: int) -> "MiChain":
        keep = max(0, last_level - self.start_level + 1)
        return MiChain(self.start_level, self.units[:keep])

    @classmethod
    def load(cls, d: tp.Optional[dict], where: str = "$"):
        if not isinstance(d, dict):
            raise DataParseError(message="链文件需要一个对象", details={"location": where})
        start_level = require_int(d, "start_level", where, minimum=1)
        units = d.get("units")
        if not isinstance(units, list):
            raise DataParseError(
                message="units 必须是列表", details={"location": f"{where}.units"}
            )
        return cls(
            start_level=start_level,
            units=tuple(
                MatrixUnit.load(u, where=f"{where}.units[{i}]") for i, u in enumerate(units)
            ),
        )

    def to_dict(self) -> dict:
        return {
            "start_level": self.start_level,
            "units": [u.to_dict() for u in self.units],
        }


@dataclasses.dataclass(frozen=True)
class ChainCheck(BaseModel):
    """
    is_mi_chain 的结果

    Attributes:
        ok: 是否为 mi-链
        condition: 第一个违反的条件 "A" 或 "B"
        level: 违反发生的层
        message: 说明
    """

    ok: bool
    condition: tp.Optional[str] = None
    level: tp.Optional[int] = None
    message: str = ""
