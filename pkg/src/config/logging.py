"""Logging configuration for the application."""
import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from typing import Optional

from .settings import get_settings


def setup_logging(level: Optional[str] = None) -> None:
    """Set up logging configuration for the application.

    The root logger writes to stderr, so that stdout stays reserved for the JSON
    reports of the command line, and to a rotating file under LOG_DIR.

    Args:
        level: Optional level name overriding the LOG_LEVEL setting
    """
    settings = get_settings()
    level_name = (level or settings.LOG_LEVEL).upper()
    log_level = getattr(logging, level_name, logging.INFO)

    log_dir = settings.LOG_DIR
    os.makedirs(log_dir, exist_ok=True)

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)

    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(formatter)

    file_handler = RotatingFileHandler(
        os.path.join(log_dir, "app.log"),
        maxBytes=10485760,  # 10MB
        backupCount=5,
    )
    file_handler.setLevel(log_level)
    file_handler.setFormatter(formatter)

    # Repeated CLI invocations in one process must not stack handlers
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
    root_logger.addHandler(console_handler)
    root_logger.addHandler(file_handler)

    loggers = [
        "src.core.service.potential_service",
        "src.core.service.threshold_service",
        "src.core.service.coupled_service",
        "src.core.service.wave_service",
        "src.adapter.driven.model.quadrature_resource",
        "src.adapter.driving.cli.handler",
    ]

    for logger_name in loggers:
        logger = logging.getLogger(logger_name)
        logger.setLevel(log_level)

    logging.info("Logging system initialized")
