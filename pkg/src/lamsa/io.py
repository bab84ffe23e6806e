"""Deterministic CSV/JSON emission.

Floats are written with ``repr`` (shortest round-trip, up to 17
significant digits) so that two runs with the same configuration produce
byte-identical file bodies on any platform.  The manifest is the only
file carrying a timestamp and is always written last.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .model import Mode
from .simulate import Trajectory

__all__ = [
    "fmt",
    "flag",
    "write_csv",
    "trajectory_rows",
    "write_trajectory",
    "write_events",
    "write_manifest",
]

TRAJECTORY_HEADER = ["t", "p", "p_dot", "l", "l_dot", "mode", "tau"]


def fmt(x: float) -> str:
    """Shortest round-trip decimal representation of a float."""
    return repr(float(x))


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> int:
    """Write a CSV file with a fixed newline convention; returns the row count."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
            count += 1
    return count


def trajectory_rows(traj: Trajectory) -> list[list[str]]:
    rows = []
    for s in traj.samples:
        rows.append(
            [
                fmt(s.t),
                fmt(s.state.p),
                fmt(s.state.p_dot),
                fmt(s.state.l),
                fmt(s.state.l_dot),
                s.mode.value,
                fmt(s.tau),
            ]
        )
    return rows


def write_trajectory(path: Path, traj: Trajectory) -> int:
    return write_csv(path, TRAJECTORY_HEADER, trajectory_rows(traj))


def write_events(path: Path, traj: Trajectory) -> int:
    """Sibling JSON document listing the mode-switch events."""
    payload = [
        {
            "t": ev.t,
            "kind": ev.kind.value,
            "state": {
                "p": ev.state.p,
                "p_dot": ev.state.p_dot,
                "l": ev.state.l,
                "l_dot": ev.state.l_dot,
            },
        }
        for ev in traj.events
    ]
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return len(payload)


def write_manifest(
    out_dir: Path,
    config_echo: dict,
    outputs: dict[str, int],
    results: dict | None = None,
) -> Path:
    """Record config echo, tool version and per-file row counts; written last."""
    from . import __version__

    manifest = {
        "tool": "lamsa",
        "version": __version__,
        "created": datetime.now(timezone.utc).isoformat(),
        "config": config_echo,
        "outputs": outputs,
    }
    if results is not None:
        manifest["results"] = results
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


def flag(b: bool) -> str:
    """Boolean CSV cell: 1/0 keeps every declared column numeric."""
    return "1" if b else "0"


def mode_code(mode: Mode) -> str:
    return mode.value
