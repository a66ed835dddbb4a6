"""Python access to the foldseq C++ core."""

import json

from ._foldseq import *  # noqa: F401,F403
from ._foldseq import run_experiment as _run_experiment

__version__ = "0.1.0"


def run(name, **config):
    """Run an experiment and return its report as a dict.

    Keyword arguments are config keys; ``seq`` may be a list and ``gen`` a pair.
    """
    lines = []
    for key, value in config.items():
        if key == "gen" and isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        elif isinstance(value, (list, tuple)):
            value = json.dumps(list(value))
        lines.append(f"{key} = {value}")
    return json.loads(_run_experiment(name, "\n".join(lines)))
