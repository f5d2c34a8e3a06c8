"""
错误处理模块
定义工作台中的自定义异常类

异常的 code 同时作为命令行的退出码：输入/用法错误为 3，内部一致性错误为 4。
"""

import typing as tp

from .utils import color


class WorkbenchError(Exception):
    """
    工作台异常基类

    Attributes:
        message: 错误消息
        code: 退出码（默认3）
        details: 出错位置等附加信息（层级、分量、文件、行列）
        original_exception: 被包装的底层异常
    """

    code = 3

    def __init__(
        self,
        message: tp.Optional[str] = None,
        code: tp.Optional[int] = None,
        details: tp.Optional[dict] = None,
        original_exception: tp.Optional[BaseException] = None,
    ):
        self.message = message or (str(original_exception) if original_exception else "未知错误")
        if code is not None:
            self.code = code
        self.details = dict(details or {})
        self.original_exception = original_exception
        super().__init__(self.message)

    def location(self) -> str:
        return ", ".join(f"{k}={v}" for k, v in self.details.items())

    def __str__(self):
        where = self.location()
        return color.r(f"{self.__class__.__name__}: {self.message}" + (f" [{where}]" if where else ""))

    def __repr__(self):
        return f"{self.__class__.__name__}(message={self.message!r}, code={self.code}, details={self.details})"

    def to_dict(self) -> dict:
        """报告中的错误条目；details 的值统一转为字符串"""
        return {
            "error": self.__class__.__name__,
            "message": self.message,
            "details": {k: str(v) for k, v in self.details.items()},
        }


class DataParseError(WorkbenchError):
    """
    数据解析错误
    表示输入文档（表示、理想、链）不符合格式约定
    """


class PresentationError(WorkbenchError):
    """
    表示结构错误
    表示中的层级、分量或臂引用越界（区别于不变量违反）
    """


class ValidationError(WorkbenchError):
    """
    验证错误
    表示参数取值非法（深度、视界、区间范围等）
    """


class DepthError(ValidationError):
    """
    深度错误
    请求的层级超出可用深度
    """


class PreconditionError(WorkbenchError):
    """
    前置条件错误
    操作在其前置条件之外被调用（如对非本原包络求链）
    """


class OracleBoundError(ValidationError):
    """
    穷举规模错误
    暴力枚举的实例超过配置的规模上限
    """


class ConstructionError(WorkbenchError):
    """
    构造一致性错误
    内部一致性检查失败，对合法输入不应出现
    """

    code = 4
