"""Continuous-flow CNN dataflow planner, cost model and cycle-accurate simulator."""

import json
import os
from typing import Any, Iterable, Union

from . import _core
from ._core import (
    AllocationError,
    ConfigurationError,
    OverflowError,
    ParseError,
    ValidationError,
    format_count,
)

__all__ = [
    "analyze",
    "plan",
    "cost",
    "sweep",
    "simulate",
    "trace_kpu",
    "trace_fcu",
    "format_count",
    "ParseError",
    "ValidationError",
    "AllocationError",
    "ConfigurationError",
    "OverflowError",
]

Spec = Union[str, os.PathLike, dict]


def _text(spec: Spec) -> str:
    # A dict is a network document; anything else is a path.
    if isinstance(spec, dict):
        return json.dumps(spec)
    with open(spec, encoding="utf-8") as f:
        return f.read()


def _rate(rate) -> str:
    return "" if rate is None else str(rate)


def analyze(spec: Spec, rate=None, min_h: int = 1, aggregated: bool = False) -> dict:
    """Per-layer rates, configurations and flow as a table dict."""
    return json.loads(_core.analyze(_text(spec), _rate(rate), min_h, aggregated))


def plan(spec: Spec, rate=None, min_h: int = 1, aggregated: bool = False) -> dict:
    return json.loads(_core.plan(_text(spec), _rate(rate), min_h, aggregated))


def cost(spec: Spec, scope: str = "full", rate=None, min_h: int = 1, aggregated: bool = False) -> dict:
    """Resource table; scope is "full", "core" or "parallel"."""
    return json.loads(_core.cost(_text(spec), scope, _rate(rate), min_h, aggregated))


def sweep(spec: Spec, rates: Iterable, group: str = "") -> dict:
    return json.loads(_core.sweep(_text(spec), [str(r) for r in rates], group))


def simulate(spec: Spec, seed: int = 0, images: int = 1, rate=None, trace: Iterable[str] = ()) -> dict[str, Any]:
    """Simulate seeded random weights and images; also returns the reference outputs."""
    out = _core.simulate(_text(spec), seed, images, _rate(rate), list(trace))
    out["trace"] = [json.loads(line) for line in out["trace"].splitlines() if line]
    return out


def trace_kpu(f: int, k: int, p: int = 0, weights=None, image=None, values: bool = False) -> str:
    weights = list(weights) if weights is not None else [0] * (k * k)
    image = list(image) if image is not None else list(range(1, f * f + 1))
    return _core.trace_kpu(f, k, p, weights, image, values)


def trace_fcu(h: int, j: int, d_in: int, a: int = 1, weights=None, inputs=None, values: bool = False) -> str:
    weights = list(weights) if weights is not None else [0] * (h * d_in)
    inputs = list(inputs) if inputs is not None else list(range(1, d_in + 1))
    return _core.trace_fcu(h, j, d_in, a, weights, inputs, values)
