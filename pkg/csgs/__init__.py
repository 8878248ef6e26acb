#!/usr/bin/env python3

# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

import pathlib
from abc import ABC, abstractmethod
from typing import Optional, Dict

# =====================
# Overall Configuration
# =====================

log_level: Optional[str] = 'info'
"""Log level to use. Options are 'debug', 'info', 'warn' and 'error'"""

supress_warnings: bool = False
"""If true 'warn'-level messages would not be printed into stderr"""

project_root: str = str(pathlib.Path(__file__).parent.parent.resolve())
"""This is the _root_ folder of the project. All resource files (configs, etc.) will be relative to this folder"""


# ======
# Errors
# ======

class CsgsError(RuntimeError):
    pass


class GridError(CsgsError):
    pass


class PotentialError(CsgsError):
    pass


class ValidationError(CsgsError):
    pass


class FunctionalError(CsgsError):
    pass


class NonFiniteEnergyError(FunctionalError):
    pass


class FiberingError(CsgsError):
    pass


class ZeroFieldError(FiberingError):
    pass


class DegenerateNonlinearityError(FiberingError):
    pass


class NonpositiveQuadraticFormError(FiberingError):
    pass


class ConvergenceError(CsgsError):
    pass


class SolverError(CsgsError):
    pass


class FieldFileError(CsgsError):
    pass


class ConfigError(CsgsError):
    key: str

    def __init__(self, key: str, message: str) -> None:
        super().__init__(f"{key}: {message}")
        self.key = key


# ========
# Commands
# ========

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ASSUMPTIONS_VIOLATED = 2
EXIT_NOT_CONVERGED = 3
EXIT_CHECK_FAILED = 4


class Command(ABC):
    """
    One CLI subcommand. Commands receive the parsed run configuration and an output folder and
    return the process exit code.
    """
    _config: 'RunConfig'
    _output_dir: str

    def __init__(self, config: 'RunConfig', output_dir: str) -> None:
        self._config = config
        self._output_dir = output_dir

    @property
    def config(self) -> 'RunConfig':
        return self._config

    @property
    def output_dir(self) -> str:
        return self._output_dir

    @abstractmethod
    def execute(self) -> int:
        raise NotImplementedError

    def summary(self) -> Dict:
        """
        Machine-readable summary of the last execution, dumped to `summary.yaml` by commands that keep one
        """
        return {}
