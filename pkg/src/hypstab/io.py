"""Deterministic writers for JSON reports, CSV tables and plot data."""

import json
import math
from pathlib import Path

import numpy as np

__all__ = ["to_jsonable", "write_json", "write_csv", "write_dat", "fmt"]


def fmt(v):
    """Round-trip text for a number; integers and booleans stay exact."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.17g" % v


def to_jsonable(obj):
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return obj


def write_json(path, obj):
    Path(path).write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def write_dat(path, xs, ys, comment=None):
    """Two whitespace-separated columns, optional leading ``#`` comment."""
    lines = [f"# {comment}"] if comment else []
    lines += [f"{fmt(x)} {fmt(y)}" for x, y in zip(xs, ys)]
    Path(path).write_text("\n".join(lines) + "\n")
