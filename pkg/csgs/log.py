#!/usr/bin/env python3

# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

import logging
import sys
import traceback
from typing import Optional

import csgs

LEVELS = {'debug': 0, 'info': 1, 'warn': 2, 'error': 3}
RUN_LOG_FORMAT = '%(asctime)s %(levelname)-7s %(message)s'

py_logger = logging.getLogger("csgs")
py_logger.setLevel(logging.DEBUG)
py_logger.addHandler(logging.NullHandler())

_run_log_handler: Optional[logging.Handler] = None


def _enabled(level: str) -> bool:
    return LEVELS[level] >= LEVELS.get(csgs.log_level or 'info', LEVELS['info'])


def debug(message: str) -> None:
    if _enabled('debug'):
        print(message, file=sys.stdout)

    py_logger.debug(message)


def info(message: str) -> None:
    if _enabled('info'):
        print(message, file=sys.stdout)

    py_logger.info(message)


def warn(message: str, exc_info=False) -> None:
    if _enabled('warn') and not csgs.supress_warnings:
        print(message, file=sys.stderr)
        if exc_info:
            traceback.print_exc(file=sys.stderr)

    py_logger.warning(message, exc_info=exc_info)


def error(message: str, exc_info=False) -> None:
    print(message, file=sys.stderr)
    if exc_info:
        traceback.print_exc(file=sys.stderr)

    py_logger.error(message, exc_info=exc_info)


def is_debug() -> bool:
    return csgs.log_level == 'debug'


def attach_run_log(path: str) -> None:
    """
    Mirror every message of the current run, debug included, into `path`
    """
    global _run_log_handler
    detach_run_log()

    handler = logging.FileHandler(path, mode='w', encoding='utf-8')
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter(RUN_LOG_FORMAT))
    py_logger.addHandler(handler)
    _run_log_handler = handler


def detach_run_log() -> None:
    global _run_log_handler
    if _run_log_handler is None:
        return

    py_logger.removeHandler(_run_log_handler)
    _run_log_handler.close()
    _run_log_handler = None
