"""
配置模块
从环境变量（由 main.py 通过 .env 加载）读取工作台配置
"""

import logging
import os
import typing as tp

logger = logging.getLogger(__name__)


def parse_bool_env(value: tp.Optional[str]) -> bool:
    """解析布尔类型环境变量"""
    return bool(value) and value.lower() in ("true", "1", "yes", "on")


def parse_int_env(name: str, default: int) -> int:
    """
    解析整数类型环境变量，非法值回退到默认值

    Args:
        name: 环境变量名
        default: 默认值

    Returns:
        int: 解析结果
    """
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"环境变量 {name}={raw!r} 不是整数，使用默认值 {default}")
        return default


class Settings:
    """
    工作台配置
    每次实例化时读取当前环境，命令行参数在此之上覆盖
    """

    def __init__(self):
        self.oracle_max_n = parse_int_env("TAF_ORACLE_MAX_N", 6)
        self.oracle_max_units = parse_int_env("TAF_ORACLE_MAX_UNITS", 16)
        self.depth = parse_int_env("TAF_DEPTH", 6)
        self.horizon = parse_int_env("TAF_HORIZON", 3)
        self.path_length = parse_int_env("TAF_PATH_LENGTH", 8)
        self.log_file = os.getenv("TAF_LOG_FILE", "taf_workbench.log")
        self.debug = parse_bool_env(os.getenv("DEBUG", "false"))

    def __repr__(self):
        return f"Settings({self.__dict__})"


def get_settings() -> Settings:
    """返回按当前环境构建的配置"""
    return Settings()
