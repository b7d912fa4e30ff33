"""
Centralized logging configuration for the guidance laboratory.
Provides consistent logging setup across all modules.
"""

import json
import logging
import sys
import time
from contextlib import contextmanager
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

try:
    from colorama import Fore, Style, init
    COLORAMA_AVAILABLE = True
    init(autoreset=True)
except ImportError:
    COLORAMA_AVAILABLE = False

ROOT_LOGGER_NAME = "guidance_lab"

# Custom log levels
LAB_SUCCESS = 25
LAB_STEP = 15

logging.addLevelName(LAB_SUCCESS, "SUCCESS")
logging.addLevelName(LAB_STEP, "STEP")


def success(self, message, *args, **kwargs):
    if self.isEnabledFor(LAB_SUCCESS):
        self._log(LAB_SUCCESS, message, args, **kwargs)


def step(self, message, *args, **kwargs):
    if self.isEnabledFor(LAB_STEP):
        self._log(LAB_STEP, message, args, **kwargs)


logging.Logger.success = success
logging.Logger.step = step


class JsonFormatter(logging.Formatter):
    """JSON-lines formatter for structured logging"""

    def format(self, record: logging.LogRecord) -> str:
        log_obj = {
            "timestamp": self.formatTime(record, "%Y-%m-%d %H:%M:%S"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        for key in ("experiment_id", "seed", "epoch", "step"):
            if hasattr(record, key):
                log_obj[key] = getattr(record, key)
        if record.exc_info:
            log_obj["exception"] = self.formatException(record.exc_info)
        return json.dumps(log_obj, ensure_ascii=False)


class LabFormatter(logging.Formatter):
    """Console formatter with optional colors and a short logger name"""

    def __init__(self, use_colors: bool = True):
        super().__init__()
        colors_supported = COLORAMA_AVAILABLE and use_colors

        if colors_supported:
            self.COLORS = {
                "DEBUG": Fore.CYAN,
                "STEP": Fore.BLUE,
                "INFO": Fore.GREEN,
                "SUCCESS": Fore.GREEN + Style.BRIGHT,
                "WARNING": Fore.YELLOW,
                "ERROR": Fore.RED,
                "CRITICAL": Fore.RED + Style.BRIGHT,
            }
            self.RESET = Style.RESET_ALL
        else:
            self.COLORS = {}
            self.RESET = ""

        self.use_colors = colors_supported

    def format(self, record: logging.LogRecord) -> str:
        if record.name.startswith(ROOT_LOGGER_NAME):
            logger_name = record.name.split(".")[-1]
        else:
            logger_name = record.name

        timestamp = self.formatTime(record, "%H:%M:%S")

        if self.use_colors and record.levelname in self.COLORS:
            level_color = self.COLORS[record.levelname]
            formatted = (
                f"{level_color}{timestamp} - {logger_name} - {record.levelname}{self.RESET}"
                f" - {record.getMessage()}"
            )
        else:
            formatted = f"{timestamp} - {logger_name} - {record.levelname} - {record.getMessage()}"

        if record.exc_info:
            formatted += "\n" + self.formatException(record.exc_info)

        return formatted


def setup_logging(
    level: str = "INFO",
    log_file: Optional[Path] = None,
    quiet: bool = False,
    verbose: bool = False,
    use_colors: bool = True,
    json_format: bool = False,
) -> logging.Logger:
    """
    Set up the package logger tree.

    Args:
        level: Base logging level (DEBUG, STEP, INFO, WARNING, ERROR)
        log_file: Optional file path; the file handler always logs at DEBUG
        quiet: Only show warnings and errors
        verbose: Show debug messages
        use_colors: Colored console output when colorama is importable
        json_format: Emit JSON lines instead of human-readable text

    Returns:
        The configured ``guidance_lab`` logger
    """
    if quiet:
        effective_level = logging.WARNING
    elif verbose:
        effective_level = logging.DEBUG
    else:
        effective_level = logging.getLevelName(level.upper())
        if not isinstance(effective_level, int):
            effective_level = logging.INFO

    logger = logging.getLogger(ROOT_LOGGER_NAME)
    logger.setLevel(effective_level)
    logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(effective_level)
    console_handler.setFormatter(JsonFormatter() if json_format else LabFormatter(use_colors=use_colors))
    logger.addHandler(console_handler)

    if log_file:
        log_file = Path(log_file)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            log_file, maxBytes=5 * 1024 * 1024, backupCount=5, encoding="utf-8"
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(JsonFormatter() if json_format else LabFormatter(use_colors=False))
        logger.addHandler(file_handler)

    logger.propagate = False
    return logger


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger for a module within the package.

    Args:
        name: Module name (prefixed with 'guidance_lab.' when missing)
    """
    if not name.startswith(ROOT_LOGGER_NAME):
        name = f"{ROOT_LOGGER_NAME}.{name}"
    return logging.getLogger(name)


@contextmanager
def temporary_log_level(logger: logging.Logger, level: int):
    """
    Temporarily change the level of ``logger``.

    Usage:
        with temporary_log_level(logger, logging.DEBUG):
            logger.debug("Detailed debugging info")
    """
    original_level = logger.level
    logger.setLevel(level)
    try:
        yield
    finally:
        logger.setLevel(original_level)


@contextmanager
def log_duration(logger: logging.Logger, operation: str):
    """
    Log the wall-clock duration of an operation.

    Usage:
        with log_duration(logger, "Seed 0"):
            train_seed()
    """
    start = time.perf_counter()
    try:
        yield
    finally:
        duration = time.perf_counter() - start
        logger.info(f"{operation} completed in {duration:.3f}s")


class ProgressLogger:
    """
    Logger wrapper tracking progress through a fixed number of steps.

    Usage:
        progress = ProgressLogger(logger, total_steps=30)
        progress.step("epoch 1: val_loss=2.31")
    """
    def __init__(self, logger: logging.Logger, total_steps: int):
        self.logger = logger
        self.total_steps = total_steps
        self.current_step = 0

    def step(self, message: str):
        """Log a progress step with percentage completion."""
        self.current_step += 1
        progress = (self.current_step / self.total_steps) * 100
        self.logger.info(f"[{progress:5.1f}%] {message}")


def configure_external_loggers(level: str = "WARNING"):
    """Quiet noisy third-party loggers."""
    log_level = getattr(logging, level.upper(), logging.WARNING)
    for logger_name in ("matplotlib", "matplotlib.font_manager", "PIL"):
        logging.getLogger(logger_name).setLevel(log_level)
