import argparse
import logging
import os
import sys

from pynmqsd.cli import EXIT_INVALID, run
from pynmqsd.enums import Task
from pynmqsd.file_utils import load_study_config

#################
# GATHER INPUTS #
#################

parser = argparse.ArgumentParser(description="Run one task of a study")
parser.add_argument(
    "task",
    type=str,
    choices=[task.value for task in Task],
    help="Task to run",
)
parser.add_argument("study_name", type=str, help="Study folder under studies/")
parser.add_argument("--workers", type=int, help="Override ensemble.workers")
parser.add_argument("-v", "--verbose", action="store_true", help="INFO logging")

args = parser.parse_args()
logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

study_folder = os.path.join("studies", args.study_name)
config_path = os.path.join(study_folder, f"{args.task}.json")
if not os.path.isfile(config_path):
    print(f"ERROR: {config_path} not found.")
    sys.exit(EXIT_INVALID)

config = load_study_config(study_folder, Task(args.task))
if args.workers is not None and config.ensemble is not None:
    config.ensemble.workers = args.workers

###########
# RUN     #
###########

sys.exit(run(config))
