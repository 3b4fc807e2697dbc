# ptgain/logs.py

import logging
import sys
from typing import Optional

logger = logging.getLogger("ptgain")

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def configure_logging(log_file: Optional[str] = 'ptgain.log', echo_level: int = logging.WARNING) -> logging.Logger:
    """
    Attaches an append-mode file handler (and a stderr echo for warnings and errors)
    to the package logger. Safe to call more than once; handlers are replaced.
    """
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(LOG_FORMAT)
    if log_file:
        file_handler = logging.FileHandler(log_file, mode='a', encoding='utf-8')
        file_handler.setFormatter(formatter)
        file_handler.setLevel(logging.INFO)
        logger.addHandler(file_handler)

    echo = logging.StreamHandler(sys.stderr)
    echo.setFormatter(formatter)
    echo.setLevel(echo_level)
    logger.addHandler(echo)

    logger.setLevel(logging.INFO)
    logger.propagate = False
    return logger


def log_info(message: str):
    logger.info(message)


def log_warning(message: str):
    logger.warning(message)


def log_error(message: str):
    logger.error(message)
