"""Deterministic JSON emission with a fixed number of significant digits."""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np


def _encode(obj: Any, digits: int) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # Strict JSON has no infinities; a diverged margin is carried by its flag.
        if not math.isfinite(x):
            return "null"
        return format(x, f".{digits}g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {_encode(v, digits)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v, digits) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, digits: int = 17) -> str:
    """Serialize ``obj`` keeping dict insertion order and ``digits`` significant digits."""
    return _encode(obj, digits)
