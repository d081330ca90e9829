"""
Command-line entry point: `nmqsd <task> --config run.json [overrides]`.

Every run writes its CSV and JSON artifacts plus `manifest.json` into the
output directory. Exit status is 0 on success (numerical warnings included),
1 on a numerical failure and 2 on an invalid configuration.
"""

import argparse
import json
import logging
import os
import sys
import time
import warnings
from typing import Optional

import numpy as np
import pandas as pd
import scipy

from pynmqsd import __version__
from pynmqsd.enums import Task
from pynmqsd.exceptions import NumericalError, ValidationError
from pynmqsd.file_utils import (
    config_hash,
    dumps,
    load_config,
    write_frame,
    write_json,
)
from pynmqsd.inputs.ensemble_input import EnsembleInput
from pynmqsd.inputs.grid_input import GridInput
from pynmqsd.inputs.output_input import OutputInput
from pynmqsd.inputs.run_config import RunConfig
from pynmqsd.pynmqsd import RunTask
from pynmqsd.tasks.task_output import TaskOutput

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INVALID = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nmqsd",
        description="Non-Markovian quantum state diffusion numerics",
    )
    subparsers = parser.add_subparsers(dest="task", required=True)
    for task in Task:
        sub = subparsers.add_parser(task.value, help=task.display_name)
        sub.add_argument(
            "--config", required=True, help="Path to the JSON run configuration"
        )
        sub.add_argument("--seed", type=int, help="Override ensemble.seed")
        sub.add_argument("--out", help="Override output.directory")
        sub.add_argument("--workers", type=int, help="Override ensemble.workers")
        sub.add_argument("--dt", type=float, help="Override grid.dt")
        sub.add_argument("--t-max", type=float, help="Override grid.t_max")
        sub.add_argument("--n-traj", type=int, help="Override ensemble.n_traj")
        sub.add_argument(
            "-v",
            "--verbose",
            action="count",
            default=0,
            help="-v for INFO, -vv for DEBUG logging",
        )
    return parser


def apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    config.task = Task(args.task)
    if args.seed is not None or args.workers is not None or args.n_traj is not None:
        if config.ensemble is None:
            config.ensemble = EnsembleInput()
        if args.seed is not None:
            config.ensemble.seed = args.seed
        if args.workers is not None:
            config.ensemble.workers = args.workers
        if args.n_traj is not None:
            config.ensemble.n_traj = args.n_traj
    if args.dt is not None or args.t_max is not None:
        if config.grid is None:
            config.grid = GridInput()
        if args.dt is not None:
            config.grid.dt = args.dt
        if args.t_max is not None:
            config.grid.t_max = args.t_max
    if config.output is None:
        config.output = OutputInput()
    if args.out is not None:
        config.output.directory = args.out
    return config


def write_artifacts(output: TaskOutput, directory: str) -> list[str]:
    os.makedirs(directory, exist_ok=True)
    artifacts = []
    for name in sorted(output.frames):
        file_name = f"{name}.csv"
        write_frame(os.path.join(directory, file_name), output.frames[name])
        artifacts.append(file_name)
    for name in sorted(output.documents):
        file_name = f"{name}.json"
        write_json(os.path.join(directory, file_name), output.documents[name])
        artifacts.append(file_name)
    return artifacts


def library_versions() -> dict:
    return {
        "pynmqsd": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def _seed(config: RunConfig) -> Optional[int]:
    return config.ensemble.seed if config.ensemble is not None else None


def run(config: RunConfig) -> int:
    """Run a configured task, write its artifacts and manifest, return exit status."""
    directory = config.output.directory
    started = time.perf_counter()
    manifest = {
        "task": config.task,
        "config_hash": config_hash(config),
        "seed": _seed(config),
        "versions": library_versions(),
    }
    status = EXIT_OK
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            output = RunTask(config)
        except ValidationError as error:
            print("Invalid configuration:", file=sys.stderr)
            for field_error in error.errors:
                print(f"  {field_error}", file=sys.stderr)
            return EXIT_INVALID
        except NumericalError as error:
            log.error("%s failed: %s", config.task.value, error)
            manifest["error"] = f"{type(error).__name__}: {error}"
            output = TaskOutput(config.task)
            status = EXIT_NUMERICAL
    manifest["warnings"] = [str(w.message) for w in caught]
    manifest["artifacts"] = write_artifacts(output, directory)
    manifest["summary"] = output.summary
    manifest["wall_time_s"] = time.perf_counter() - started
    write_json(os.path.join(directory, "manifest.json"), manifest)
    print(dumps(manifest))
    return status


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    try:
        config = load_config(args.config)
    except (OSError, json.JSONDecodeError) as error:
        print(f"Cannot read config {args.config}: {error}", file=sys.stderr)
        return EXIT_INVALID
    except (KeyError, TypeError, ValueError) as error:
        print(f"Malformed config {args.config}: {error}", file=sys.stderr)
        return EXIT_INVALID
    return run(apply_overrides(config, args))


if __name__ == "__main__":
    sys.exit(main())
