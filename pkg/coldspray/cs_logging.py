#!/usr/bin/env python3

""" Configures logging """

# Copyright 2024 Cold Loop contributors
#
# This file is part of Cold Loop.
#
# Cold Loop is free software: you can redistribute it and/or modify it under
# the terms of the GNU General Public License as published by the Free Software
# Foundation, either version 3 of the License, or (at your option) any later
# version.
#
# Cold Loop is distributed in the hope that it will be useful, but WITHOUT ANY
# WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR
# A PARTICULAR PURPOSE. See the GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License along with
# Cold Loop. If not, see <https://www.gnu.org/licenses/>.

# Standard library imports
import logging
import sys

# 3rd party imports
from loguru import logger

# Local imports
from .util import lookup_env_var

LOG_LEVEL: str = lookup_env_var("LOG_LEVEL") or "INFO"
JSON_LOGS: bool = lookup_env_var("JSON_LOGS") == "1"

class InterceptHandler(logging.Handler):
    """
    Intercept standard logging messages and send to Loguru sink.
    From loguru documentation here: <https://pypi.org/project/loguru/>
    """

    def emit(self, record: logging.LogRecord) -> None:
        # Get corresponding Loguru level if it exists
        level: str | int
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        # Find caller that generated logged message
        frame, depth = logging.currentframe(), 2
        while frame is not None and frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back # type: ignore
            depth += 1

        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())

def setup_loguru() -> None:
    """
    Setup loguru logging. Library modules keep using the standard logging
    module, and everything ends up in loguru sinks.
    """

    # Intercept everything at the root logger.
    logging.root.handlers = [InterceptHandler()]
    logging.root.setLevel(LOG_LEVEL)

    # Remove every other logger's handlers and propagate to root logger.
    # pylint: disable=no-member
    for name in list(logging.root.manager.loggerDict.keys()):
        logging.getLogger(name).handlers = []
        logging.getLogger(name).propagate = True

    # Quiet matplotlib's font manager chatter.
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    logging.getLogger("PIL").setLevel(logging.WARNING)

    # Configure loguru.
    logger.configure(handlers=[{"sink": sys.stderr, "serialize": JSON_LOGS, "level": LOG_LEVEL}])

def add_run_log(filename: str) -> int:
    """ Add a file sink for a run directory. Returns the sink id. """
    return logger.add(filename, level="DEBUG", serialize=JSON_LOGS, encoding="utf-8")

def remove_run_log(sink_id: int) -> None:
    """ Remove a file sink added by add_run_log. """
    logger.remove(sink_id)
