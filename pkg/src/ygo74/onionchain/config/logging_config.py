"""Logging configuration module."""
import logging
import sys
from typing import Optional

from .settings import ObservabilitySettings, settings as default_settings

APP_LOGGER = "ygo74.onionchain"
TRACE_LOGGER = "ygo74.onionchain.simulation"


def setup_logging(observability: Optional[ObservabilitySettings] = None) -> None:
    """Setup application logging configuration.

    LOG_LEVEL controls the general level, ONIONCHAIN_LOG controls how much of
    the simulator event trace is echoed.

    Args:
        observability (Optional[ObservabilitySettings]): Settings to use, global ones by default
    """
    observability = observability or default_settings.observability
    numeric_level: int = getattr(logging, observability.log_level, logging.INFO)

    # stderr keeps stdout free for CSV and command output
    logging.basicConfig(
        level=numeric_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
    )

    configure_application_loggers(numeric_level, observability.trace_level)


def configure_application_loggers(level: int, trace_level: str = "off") -> None:
    """Configure application-specific loggers.

    Args:
        level (int): Logging level to set
        trace_level (str): Event trace verbosity (off, info or debug)
    """
    app_loggers: list[str] = [
        APP_LOGGER,
        f"{APP_LOGGER}.application",
        f"{APP_LOGGER}.infrastructure",
        f"{APP_LOGGER}.interfaces",
        f"{APP_LOGGER}.domain",
    ]

    for logger_name in app_loggers:
        logger = logging.getLogger(logger_name)
        logger.setLevel(level)
        logger.propagate = True

    trace_levels = {"off": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
    logging.getLogger(TRACE_LOGGER).setLevel(trace_levels.get(trace_level, logging.WARNING))

    logging.getLogger(APP_LOGGER).debug(
        f"Logging configured with level: {logging.getLevelName(level)}, trace: {trace_level}"
    )
