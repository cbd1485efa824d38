"""Logging configuration using Loguru"""
import sys
from typing import Optional
from loguru import logger
from src.core.config import get_settings


def setup_logging(level: Optional[str] = None):
    """Configure Loguru logger with colorful formatting.

    Logs go to stderr: stdout is reserved for the CSV/JSON documents
    emitted by the command line.
    """
    settings = get_settings()

    # Remove default handler
    logger.remove()

    # Add custom handler with formatting
    logger.add(
        sys.stderr,
        format=(
            "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | "
            "<level>{level: <8}</level> | "
            "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | "
            "<level>{message}</level>"
        ),
        level=(level or settings.log_level).upper(),
        colorize=True,
        backtrace=True,
        diagnose=True,
    )

    return logger


# Initialize logger on module import
log = setup_logging()
