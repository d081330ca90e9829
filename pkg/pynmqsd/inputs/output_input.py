from dataclasses import dataclass


@dataclass
class OutputInput:
    directory: str = "output"
    # noise CSV: one long file with path_id (True) or one file per path
    long_format: bool = True
