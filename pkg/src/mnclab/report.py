"""JSON run reports and CSV table export.

Reports are written with sorted keys and a fixed indent so that two runs of
the same configuration differ only in the ``timings`` block.  Non-finite
floats are stored as the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import MnclabError

WALL_CLOCK_KEYS = ("timings",)


def plain(obj):
    """Convert a result tree into JSON-safe builtins."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return plain(obj.to_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report: dict) -> str:
    return json.dumps(plain(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(report: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps(report))
    return path


def load_report(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def without_wall_clock(report: dict) -> dict:
    return {k: v for k, v in report.items() if k not in WALL_CLOCK_KEYS}


def _cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".17g")
    if x is None:
        return ""
    return str(x)


def export_csv(report: dict, task_name: str, out_dir) -> list[Path]:
    """Write one CSV per table of `task_name`; returns the paths in table order."""
    tasks = {t["name"]: t for t in report["tasks"]}
    if task_name not in tasks:
        raise MnclabError(f"no task named {task_name!r} in the report")
    task = tasks[task_name]
    tables = task.get("tables") or {}
    if not tables:
        raise MnclabError(f"task {task_name!r} has no tables to export")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for tname in sorted(tables):
        tab = tables[tname]
        path = out_dir / f"{task_name}.{tname}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(tab["columns"])
            for row in tab["rows"]:
                w.writerow([_cell(x) for x in row])
        paths.append(path)
    return paths
