"""Shared report serialization so CLI and HTTP bodies match byte for byte."""

from __future__ import annotations

import json
from typing import Any

DEFAULT_PRECISION = 6


def round_floats(obj: Any, ndigits: int | None = DEFAULT_PRECISION) -> Any:
    """Round every float in a JSON-like structure; None leaves full precision."""
    if ndigits is None:
        return obj
    if isinstance(obj, float):
        return round(obj, ndigits)
    if isinstance(obj, dict):
        return {k: round_floats(v, ndigits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, ndigits) for v in obj]
    return obj


def render_report(report: dict, precision: int | None = DEFAULT_PRECISION) -> str:
    """Canonical JSON body for a report (sorted keys, two-space indent)."""
    return json.dumps(round_floats(report, precision), indent=2, sort_keys=True)
