"""Python interface to the madm sampler library."""

import json
from pathlib import Path

from ._madm import *  # noqa: F401,F403
from ._madm import __version__, _run_experiment, _run_verify_suite


def run_experiment(config, out):
    """Run the experiment described by ``config``, write its files under ``out`` and return report.json as a dict."""
    return json.loads(_run_experiment(config, str(Path(out))))


def verify(suite, seed=0):
    """Run one verification suite and return its result as a dict with a boolean ``pass`` entry."""
    return json.loads(_run_verify_suite(suite, seed))
