"""
Logging configuration for the HDX toolkit.

Console output goes to stderr so that JSON reports on stdout stay clean.
Files under log_dir:

- chevalley_hdx.log: everything from DEBUG up
- chevalley_hdx_errors.log: ERROR and above
- certificates.log: verification outcomes only (certificates, λ values,
  connectivity, calibration, budgets)
"""

import logging
import logging.handlers
import os
import sys
import time
from functools import wraps
from typing import Dict, Optional

MAIN_LOG = "chevalley_hdx.log"
ERROR_LOG = "chevalley_hdx_errors.log"
CERTIFICATE_LOG = "certificates.log"

DETAILED_FORMAT = '%(asctime)s | %(levelname)-8s | %(name)-20s | %(funcName)-15s | %(message)s'
CONSOLE_FORMAT = '%(asctime)s | %(levelname)-8s | %(message)s'

_loggers: Dict[str, logging.Logger] = {}


def _rotating(path: str, level: int, formatter: logging.Formatter, max_file_size: int, backup_count: int,
              handler_class=logging.handlers.RotatingFileHandler) -> logging.Handler:
    handler = handler_class(path, maxBytes=max_file_size, backupCount=backup_count, encoding='utf-8')
    handler.setLevel(level)
    handler.setFormatter(formatter)
    return handler


def setup_logging(log_level: str = "INFO",
                  log_file: bool = True,
                  log_dir: str = "logs",
                  max_file_size: int = 10 * 1024 * 1024,
                  backup_count: int = 5) -> None:
    """
    Install console, rotating file and certificate handlers on the root logger.

    Args:
        log_level: console level (DEBUG, INFO, WARNING, ERROR)
        log_file: write the three log files
        log_dir: directory for log files
        max_file_size: rotation size in bytes
        backup_count: rotated files to keep
    """
    try:
        numeric_level = getattr(logging, log_level.upper(), logging.INFO)
        root_logger = logging.getLogger()
        root_logger.setLevel(logging.DEBUG if log_file else numeric_level)
        root_logger.handlers.clear()

        console_handler = ColoredConsoleHandler(sys.stderr)
        console_handler.setLevel(numeric_level)
        console_handler.setFormatter(logging.Formatter(fmt=CONSOLE_FORMAT, datefmt='%H:%M:%S'))
        root_logger.addHandler(console_handler)

        if log_file:
            os.makedirs(log_dir, exist_ok=True)
            detailed = logging.Formatter(fmt=DETAILED_FORMAT, datefmt='%Y-%m-%d %H:%M:%S')
            root_logger.addHandler(_rotating(os.path.join(log_dir, MAIN_LOG), logging.DEBUG, detailed,
                                             max_file_size, backup_count))
            root_logger.addHandler(_rotating(os.path.join(log_dir, ERROR_LOG), logging.ERROR, detailed,
                                             max_file_size, backup_count))
            root_logger.addHandler(_rotating(os.path.join(log_dir, CERTIFICATE_LOG), logging.INFO, detailed,
                                             max_file_size, backup_count, CertificateLogHandler))

        get_logger(__name__).debug(f"🔧 Logging initialized: console {log_level}, files {'on' if log_file else 'off'}")

    except Exception as e:
        logging.basicConfig(level=logging.INFO, format='%(asctime)s | %(levelname)s | %(message)s',
                            datefmt='%H:%M:%S', stream=sys.stderr)
        logging.error(f"❌ Logging setup failed: {str(e)}")


class ColoredConsoleHandler(logging.StreamHandler):
    """Colors the level name when stderr is a terminal."""

    COLORS = {
        'DEBUG': '\033[36m',
        'INFO': '\033[37m',
        'WARNING': '\033[33m',
        'ERROR': '\033[31m',
        'CRITICAL': '\033[35m',
    }
    RESET = '\033[0m'

    def emit(self, record):
        try:
            stream = getattr(self, "stream", None)
            if stream is not None and getattr(stream, "isatty", lambda: False)():
                record = logging.makeLogRecord(record.__dict__)
                record.levelname = f"{self.COLORS.get(record.levelname, self.RESET)}{record.levelname}{self.RESET}"
            super().emit(record)
        except Exception:
            self.handleError(record)


class CertificateLogHandler(logging.handlers.RotatingFileHandler):
    """Keeps verification outcomes; errors always pass."""

    KEYWORDS = ('certificate', 'lambda', 'λ', 'connected', 'calibrat', 'budget',
                'transitiv', 'intersection', 'eigenvalue', 'trickle', 'walk count')

    def emit(self, record):
        try:
            message = record.getMessage().lower()
            if record.levelno >= logging.ERROR or any(k in message for k in self.KEYWORDS):
                super().emit(record)
        except Exception:
            self.handleError(record)


def get_logger(name: str) -> logging.Logger:
    """Registry-cached logger; pass __name__."""
    if name not in _loggers:
        _loggers[name] = logging.getLogger(name)
    return _loggers[name]


def log_performance(func):
    """Log wall time at DEBUG, and failures with their elapsed time at ERROR."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        logger = get_logger(func.__module__)
        start = time.perf_counter()
        try:
            result = func(*args, **kwargs)
        except Exception as e:
            logger.error(f"❌ {func.__name__} failed after {time.perf_counter() - start:.3f}s: {str(e)}")
            raise
        logger.debug(f"⏱️ {func.__name__} completed in {time.perf_counter() - start:.3f}s")
        return result

    return wrapper


def log_startup_info(command: Optional[str] = None):
    """Banner at the start of a run."""
    logger = get_logger("startup")
    logger.info("=" * 60)
    logger.info(f"🚀 chevalley-hdx starting{': ' + command if command else ''}")
    logger.info(f"🐍 Python {sys.version.split()[0]}, cwd {os.getcwd()}")
    logger.info("=" * 60)


def log_shutdown_info(exit_code: int = 0):
    """Banner at the end of a run."""
    logger = get_logger("shutdown")
    logger.info("=" * 60)
    logger.info(f"🏁 chevalley-hdx finished with exit code {exit_code}")
    logger.info("=" * 60)
