"""
基础模型类
提供从字典加载对象、导出为字典的基础功能
"""

import dataclasses
import logging
import typing as tp

from src.errors import DataParseError

logger = logging.getLogger(__name__)


class BaseModel:
    """
    基础模型类
    所有数据模型（不可变dataclass）的基类，提供字典与对象之间的转换
    """

    __slots__ = ()

    @classmethod
    def load(cls, d: tp.Optional[dict], where: str = "$"):
        """
        从字典加载模型对象

        Args:
            d: 包含模型数据的字典
            where: 该字典在输入文档中的位置（用于错误报告）

        Returns:
            模型实例

        Raises:
            DataParseError: 不是字典或字段不匹配
        """
        if d is None or not isinstance(d, dict):
            raise DataParseError(
                message=f"{cls.__name__} 需要一个对象",
                details={"location": where, "got": type(d).__name__},
            )
        try:
            return cls(**d)
        except (TypeError, KeyError, ValueError) as e:
            logger.warning(f"加载 {cls.__name__} 失败: {e}")
            raise DataParseError(
                message=f"加载 {cls.__name__} 失败: {e}",
                details={"location": where},
                original_exception=e,
            ) from e

    def to_dict(self) -> dict:
        """
        转换为可JSON序列化的字典

        Returns:
            dict: 模型字段字典
        """
        return dataclasses.asdict(self)


def require_int(d: dict, key: str, where: str, minimum: tp.Optional[int] = None) -> int:
    """
    读取整数字段

    Args:
        d: 源字典
        key: 字段名
        where: 源字典在文档中的位置
        minimum: 最小允许值（可选）

    Returns:
        int: 字段值

    Raises:
        DataParseError: 缺失、类型错误或小于最小值
    """
    if key not in d:
        raise DataParseError(
            message=f"缺少字段 {key}", details={"location": where}
        )
    value = d[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise DataParseError(
            message=f"字段 {key} 必须是整数",
            details={"location": f"{where}.{key}", "got": repr(value)},
        )
    if minimum is not None and value < minimum:
        raise DataParseError(
            message=f"字段 {key} 必须 ≥ {minimum}",
            details={"location": f"{where}.{key}", "got": value},
        )
    return value
