#!/usr/bin/env python3

# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

import argparse
import os
import sys
from typing import List, Optional

import csgs
from csgs import CsgsError, ConfigError, EXIT_OK, EXIT_ERROR, log, utils

SUBCOMMANDS = ('validate', 'solve', 'sweep', 'compare', 'pohozaev', 'sobolev')
DEFAULT_OUTPUT_DIR = './out'
RUN_LOG_FILE_NAME = 'run.log'


def run_command(
        command: str,
        config: str,
        out: str = DEFAULT_OUTPUT_DIR,
        seed: Optional[int] = None,
        verbose: bool = False,
) -> int:
    previous_level = csgs.log_level
    if verbose:
        csgs.log_level = 'debug'

    try:
        return _run_command(command, config, out, seed)
    finally:
        csgs.log_level = previous_level


def _run_command(command: str, config: str, out: str, seed: Optional[int]) -> int:
    from csgs.run_config import RunConfig

    try:
        run_config = RunConfig.from_dict(utils.load_config(config))
        if seed is not None:
            run_config = run_config.with_seed(seed)
    except ConfigError as e:
        log.error(f"Unable to start: {config} is invalid: {e}")
        return EXIT_ERROR

    try:
        os.makedirs(out, exist_ok=True)
    except OSError as e:
        log.error(f"Unable to create output folder '{out}': {e}")
        return EXIT_ERROR

    command_class = utils.load_class(f"{command.capitalize()}Command", "commands")
    log.attach_run_log(os.path.join(out, RUN_LOG_FILE_NAME))

    try:
        log.debug(f"Running {command} with {config} (seed {run_config.solver.seed})")
        status_code = command_class(run_config, out).execute()
    except (CsgsError, OSError) as e:
        log.error(f"Unable to {command}: {e}")
        return EXIT_ERROR
    except Exception as e:
        log.error(f"Unable to {command}: {e}", exc_info=e)
        return EXIT_ERROR
    finally:
        log.detach_run_log()

    if status_code == EXIT_OK:
        log.info(f"{command.capitalize()} completed successfully, artifacts are in '{out}'")

    return status_code


def build_parser() -> argparse.ArgumentParser:
    args_parser = argparse.ArgumentParser(
        description="Ground states of linearly coupled Schrödinger systems on a truncated box",
        usage=f"""\npython3 csgs/run.py {{{','.join(SUBCOMMANDS)}}} --config Config_Name_Or_Path [--out Folder] [--seed N] [-v]
            \nExample call: python3 csgs/run.py solve --config solve_subcritical --out ./out/solve
        """
    )
    args_parser.add_argument(
        'command',
        choices=SUBCOMMANDS,
        help="What to run",
    )
    args_parser.add_argument(
        '--config', '-c',
        required=True,
        type=str,
        help="Path to a YAML run configuration, or the name of a file in the ./configs folder",
    )
    args_parser.add_argument(
        '--out', '-o',
        required=False,
        default=DEFAULT_OUTPUT_DIR,
        type=str,
        help="Folder for the artifacts (CSV reports, field files, summary.yaml)",
    )
    args_parser.add_argument(
        '--seed', '-s',
        required=False,
        default=None,
        type=int,
        help="Overrides solver.seed from the configuration",
    )
    args_parser.add_argument(
        '--verbose', '-v',
        required=False,
        default=False,
        action='store_true',
        help="Print solver progress and debug information",
    )

    return args_parser


def run_cli(argv: List[str]) -> int:
    args_parser = build_parser()

    try:
        args = args_parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_ERROR

    return run_command(**vars(args))


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == '__main__':
    main()
