"""Decentralized expert-assisted learning tracking simulator."""

import csv
import io
import json

from . import _d2eal
from ._d2eal import D2EALError, loss

__all__ = [
    "D2EALError",
    "audit",
    "cli",
    "compare",
    "default_config",
    "fuse",
    "loss",
    "monte_carlo",
    "run",
]


def _text(config):
    if config is None:
        return ""
    if isinstance(config, str):
        return config
    return json.dumps(config)


def default_config():
    return json.loads(_d2eal.default_config())


def run(config=None, with_steps=False):
    """One run. Returns the summary dict, plus the per-step rows if asked."""
    summary, steps = _d2eal.run(_text(config), with_steps)
    summary = json.loads(summary)
    if not with_steps:
        return summary
    return summary, list(csv.DictReader(io.StringIO(steps)))


def monte_carlo(config=None, runs=1, threads=0):
    return json.loads(_d2eal.monte_carlo(_text(config), runs, threads))


def compare(config=None, runs=1, threads=0):
    return list(csv.DictReader(io.StringIO(_d2eal.compare(_text(config), runs, threads))))


def fuse(strategy, means, covariances, self_index=0):
    """Fuse 2-D estimates; covariances are row-major [a, b, c, d]."""
    return _d2eal.fuse(strategy, means, covariances, self_index)


def audit(config=None):
    return json.loads(_d2eal.audit(_text(config)))


def cli(*args):
    """Run the command-line front end in-process; returns (code, stdout, stderr)."""
    return _d2eal.cli([str(a) for a in args])
