import inspect
import logging
import os
import sys
from typing import Optional

from tqdm import tqdm

# 默认日志级别，可通过环境变量 RELSEN_LOG_LEVEL 覆盖（如 DEBUG 显示每步软传感器日志）
LOG_LEVEL = logging.getLevelName(os.environ.get("RELSEN_LOG_LEVEL", "INFO").upper())
if not isinstance(LOG_LEVEL, int):
    LOG_LEVEL = logging.INFO

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# 这些库在导入或运行时会打印 INFO 日志
QUIET_LOGGERS = ("numexpr", "matplotlib", "PIL")

_configured = False


class TqdmHandler(logging.StreamHandler):
    """通过 tqdm.write 输出，避免打断基准测试的进度条"""

    def emit(self, record: logging.LogRecord):
        try:
            tqdm.write(self.format(record), file=self.stream)
            self.flush()
        except Exception:
            self.handleError(record)


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """
    获取 logger，首次调用时配置根 logger

    Args:
        name: logger 名称，为 None 时使用调用方模块名

    Returns:
        logging.Logger
    """
    if not _configured:
        _configure(LOG_LEVEL)

    if name is None:
        caller = inspect.currentframe().f_back
        name = caller.f_globals.get("__name__", "relsen") if caller else "relsen"
    return logging.getLogger(name)


def _configure(level: int):
    global _configured

    root = logging.getLogger()
    root.setLevel(level)
    for handler in root.handlers[:]:
        if isinstance(handler, TqdmHandler):
            root.removeHandler(handler)

    handler = TqdmHandler(sys.stdout)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=LOG_DATE_FORMAT))
    root.addHandler(handler)

    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)

    _configured = True


def set_log_level(level: int):
    """重新配置日志级别"""
    global LOG_LEVEL
    LOG_LEVEL = level
    _configure(level)


def set_verbose(verbose: bool = True):
    set_log_level(logging.DEBUG if verbose else logging.INFO)
