"""Python front end for the chatnav navigation stack."""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import _core
from ._core import ConfigError, InvalidArgument, PlanInputError, UnreachableError

__all__ = [
    "ConfigError",
    "InvalidArgument",
    "PlanInputError",
    "UnreachableError",
    "data_dir",
    "decode",
    "evaluate",
    "metrics_report",
    "plan",
    "validate",
]


def data_dir() -> str:
    """Directory holding the shipped worlds, configs and corpora.

    CHATNAV_DATA wins; otherwise the copy installed with the package.
    """
    env = os.environ.get("CHATNAV_DATA")
    if env:
        return env
    return str(Path(__file__).resolve().parent / "data")


def validate(**overrides: Any) -> list[str]:
    return list(_core.validate(data_dir(), dict(overrides)))


def evaluate(corpus: str | os.PathLike[str], *, max_wait: float = 150.0, **overrides: Any) -> dict:
    """Replays a corpus on a simulated clock.

    Returns {"report": ..., "records": [...], "unsettled": n}.
    """
    return json.loads(_core.evaluate(os.fspath(corpus), data_dir(), dict(overrides), max_wait))


def decode(text: str) -> dict:
    return json.loads(_core.decode(text, data_dir()))


def metrics_report(log_path: str | os.PathLike[str]) -> dict:
    return json.loads(_core.metrics_report(os.fspath(log_path)))


def plan(
    rows: Sequence[str],
    start: tuple[float, float],
    goal: tuple[float, float],
    *,
    resolution: float = 1.0,
    inflation: float = 0.0,
) -> Mapping[str, Any]:
    """Plans over an ASCII grid ('#' occupied, row 0 at the top)."""
    return _core.plan(list(rows), resolution, tuple(start), tuple(goal), inflation)
