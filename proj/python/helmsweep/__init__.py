"""Sweeping-preconditioned 3D Helmholtz solver."""

import json

from ._core import (
    RunResult,
    SolveResult,
    assemble,
    direct_solve,
    load_config,
    pml_sigma,
    run,
    speed_at,
)


def run_config(**fields):
    """Run an experiment from keyword fields of the JSON config."""
    return run(json.dumps(fields))


__all__ = [
    "RunResult",
    "SolveResult",
    "assemble",
    "direct_solve",
    "load_config",
    "pml_sigma",
    "run",
    "run_config",
    "speed_at",
]
