from dataclasses import dataclass, field

import pandas as pd

from pynmqsd.enums import Task


@dataclass
class TaskOutput:
    """Everything a task writes: CSV frames, JSON documents and the manifest summary."""

    task: Task
    frames: dict[str, pd.DataFrame] = field(default_factory=dict)
    documents: dict[str, dict] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
