"""CSV and JSON writers.  Floats are written with 17 significant digits."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _clean(obj: Any) -> Any:
    if isinstance(obj, float):
        return None if not math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return _clean(obj.item())
    return obj


def write_json(path: str | Path, doc: dict) -> None:
    Path(path).write_text(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_trajectory(path, y) -> None:
    """Graph function as ``edge,t,y`` rows."""
    write_csv(path, ("edge", "t", "y"), y.rows())


def control_rows(u):
    for j, uj in enumerate(u, start=1):
        x = uj.x
        for i, t in enumerate(x):
            left = float(uj.right[i - 1]) if i > 0 else math.nan
            right = float(uj.left[i]) if i < x.size - 1 else math.nan
            yield j, float(t), left, right


def write_control(path, u) -> None:
    """Controls as ``edge,t,u_left,u_right``: one-sided limits at every breakpoint."""
    write_csv(path, ("edge", "t", "u_left", "u_right"), control_rows(u))
