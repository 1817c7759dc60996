"""
Structured JSON logging configuration.
Log records go to stderr so stdout stays reserved for CSV/JSON results.
"""

import logging
import sys
from datetime import datetime, timezone
from typing import Optional

from pythonjsonlogger import jsonlogger

from config import Config


class RunFormatter(jsonlogger.JsonFormatter):
    """JSON formatter adding timestamp, level and source location."""

    def add_fields(self, log_record, record, message_dict):
        super(RunFormatter, self).add_fields(log_record, record, message_dict)

        if not log_record.get('timestamp'):
            now = datetime.now(timezone.utc).strftime('%Y-%m-%dT%H:%M:%S.%fZ')
            log_record['timestamp'] = now

        if log_record.get('level'):
            log_record['level'] = log_record['level'].upper()
        else:
            log_record['level'] = record.levelname

        log_record['source'] = f"{record.filename}:{record.lineno}"


def setup_logger(level: Optional[str] = None, stream=None) -> logging.Logger:
    """
    Configure the root logger with JSON formatting.

    Args:
        level: Log level name; defaults to Config.LOG_LEVEL
        stream: Output stream; defaults to sys.stderr

    Returns:
        The configured root logger
    """
    handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    handler.setFormatter(RunFormatter('%(timestamp)s %(level)s %(name)s %(message)s'))

    root = logging.getLogger()
    root.handlers.clear()
    root.addHandler(handler)
    root.setLevel((level or Config.LOG_LEVEL).upper())

    root.debug("Structured logging initialized")
    return root
