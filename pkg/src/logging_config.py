"""
日志配置模块
工作台只写文件日志，终端输出统一走 utils.echo
"""

import logging
import typing as tp
from pathlib import Path

DEFAULT_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def setup_logging(
    log_file: str = "taf_workbench.log",
    level: int = logging.INFO,
    log_format: tp.Optional[str] = None,
) -> logging.Logger:
    """
    把根 logger 指向单个 UTF-8 日志文件

    Args:
        log_file: 日志文件路径，父目录不存在时创建（默认: taf_workbench.log）
        level: 日志级别（DEBUG=true 时由 main 传入 logging.DEBUG）
        log_format: 自定义格式（可选）

    Returns:
        logging.Logger: 根 logger
    """
    log_path = Path(log_file)
    log_path.parent.mkdir(parents=True, exist_ok=True)

    handler = logging.FileHandler(log_path, encoding="utf-8")
    handler.setFormatter(logging.Formatter(log_format or DEFAULT_FORMAT))
    handler.setLevel(level)

    root_logger = logging.getLogger()
    for old in list(root_logger.handlers):
        root_logger.removeHandler(old)
        if isinstance(old, logging.FileHandler):
            old.close()
    root_logger.setLevel(level)
    root_logger.addHandler(handler)

    logging.getLogger(__name__).debug(f"日志写入 {log_path}，级别 {logging.getLevelName(level)}")
    return root_logger
