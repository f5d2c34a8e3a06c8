"""
工具函数模块
终端着色、报告文件读写与退出处理
"""

import json
import logging
import os
import sys

from termcolor import colored

logger = logging.getLogger(__name__)

# Windows平台需要初始化colorama以支持颜色输出
if sys.platform == "win32":
    import colorama

    os.system("color")
    colorama.init()

# 退出码 -> 颜色：0 肯定，1 否定，2 无法判定，其余为错误
EXIT_COLORS = {0: "green", 1: "red", 2: "yellow"}


class ColorText:
    """返回着色文本"""

    @staticmethod
    def r(msg):
        return colored(msg, "red")

    @staticmethod
    def g(msg):
        return colored(msg, "green")

    @staticmethod
    def y(msg):
        return colored(msg, "yellow")

    @staticmethod
    def c(msg):
        return colored(msg, "cyan")

    @staticmethod
    def m(msg):
        return colored(msg, "magenta")

    @staticmethod
    def for_exit(msg, exit_code: int) -> str:
        """按退出码着色，未知退出码用洋红色"""
        return colored(msg, EXIT_COLORS.get(exit_code, "magenta"))


class Echo:
    """打印着色消息；直接调用时原样打印"""

    @staticmethod
    def _color_print(msg, color, **kwargs):
        print(colored(msg, color), **kwargs)
        (kwargs.get("file") or sys.stdout).flush()

    @staticmethod
    def r(msg, **kwargs):
        Echo._color_print(msg, "red", **kwargs)

    @staticmethod
    def g(msg, **kwargs):
        Echo._color_print(msg, "green", **kwargs)

    @staticmethod
    def y(msg, **kwargs):
        Echo._color_print(msg, "yellow", **kwargs)

    @staticmethod
    def c(msg, **kwargs):
        Echo._color_print(msg, "cyan", **kwargs)

    @staticmethod
    def m(msg, **kwargs):
        Echo._color_print(msg, "magenta", **kwargs)

    def __call__(self, *args, **kwargs):
        print(*args, **kwargs)
        (kwargs.get("file") or sys.stdout).flush()


echo = Echo()
color = ColorText()


def soft_exit(exit_code):
    """退出进程；Windows 打包版本先等待按键，避免窗口直接关闭"""
    if sys.platform == "win32" and getattr(sys, "frozen", False):
        input(color.y("\n按任意键退出"))
    sys.exit(exit_code)


def load_from_file(filename):
    """
    从JSON文件加载数据

    Args:
        filename: 文件名

    Returns:
        从文件加载的JSON值

    Raises:
        DataParseError: 文件不存在、无法读取或不是合法JSON
    """
    from .errors import DataParseError

    try:
        with open(filename, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        logger.warning(f"解析文件 {filename} 失败: {e}")
        raise DataParseError(
            message=f"文件不是合法的JSON: {e.msg}",
            details={"file": filename, "line": e.lineno, "column": e.colno},
            original_exception=e,
        ) from e
    except (PermissionError, OSError) as e:
        logger.warning(f"加载文件 {filename} 失败: {e}")
        raise DataParseError(
            message=f"无法读取文件: {e}",
            details={"file": filename},
            original_exception=e,
        ) from e


def dump_to_file(d, filename):
    """
    将数据保存到JSON文件

    Args:
        d: 要保存的数据（字典或列表）
        filename: 文件名

    Raises:
        DataParseError: 写入失败
    """
    from .errors import DataParseError

    try:
        with open(filename, "w", encoding="utf-8") as f:
            json.dump(d, f, ensure_ascii=False, indent=2, sort_keys=True)
    except (PermissionError, OSError, TypeError) as e:
        logger.error(f"保存文件 {filename} 失败: {e}")
        raise DataParseError(
            message=f"无法写入文件: {e}",
            details={"file": filename},
            original_exception=e,
        ) from e
