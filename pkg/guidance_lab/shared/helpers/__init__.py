from .logging_utils import (
    setup_logging,
    get_logger,
    temporary_log_level,
    log_duration,
    ProgressLogger,
    configure_external_loggers,
)

__all__ = [
    "setup_logging",
    "get_logger",
    "temporary_log_level",
    "log_duration",
    "ProgressLogger",
    "configure_external_loggers",
]
