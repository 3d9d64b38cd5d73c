"""JSON metric instance files.

Schema (one object per file)::

    {"kind": "explicit", "matrix": [[0, 2], [2, 0]]}
    {"kind": "line"}
    {"kind": "hst", "alpha": 2, "parent": [-1, 0, 0], "weight": [2, 1, 1]}
    {"kind": "binary_hst", "height": 3, "alpha": 4}

Every loader validates the invariants of the variant.
"""
from __future__ import annotations

import json
from pathlib import Path

from .hst import HstMetric, HstTree, binary_hst, uniform_hst
from .spaces import ExplicitMetric, LineMetric, MetricError, MetricSpace


def metric_from_dict(spec: dict) -> MetricSpace:
    try:
        kind = spec["kind"]
    except (KeyError, TypeError):
        raise MetricError("metric spec needs a 'kind' field") from None
    try:
        if kind == "explicit":
            return ExplicitMetric(spec["matrix"])
        if kind == "line":
            return LineMetric()
        if kind == "hst":
            return HstMetric(HstTree(float(spec["alpha"]), list(spec["parent"]),
                                     [float(w) for w in spec["weight"]]))
        if kind == "binary_hst":
            return HstMetric(binary_hst(int(spec["height"]), float(spec["alpha"])))
        if kind == "uniform_hst":
            return HstMetric(uniform_hst(int(spec["branching"]), int(spec["height"]),
                                         float(spec["alpha"])))
    except KeyError as e:
        raise MetricError(f"{kind} metric spec is missing field {e}") from None
    raise MetricError(f"unknown metric kind {kind!r}")


def metric_to_dict(space: MetricSpace) -> dict:
    if isinstance(space, ExplicitMetric):
        return {"kind": "explicit", "matrix": space.matrix.tolist()}
    if isinstance(space, LineMetric):
        return {"kind": "line"}
    if isinstance(space, HstMetric):
        t = space.tree
        return {"kind": "hst", "alpha": t.alpha, "parent": list(t.parent), "weight": list(t.weight)}
    raise MetricError(f"cannot serialize {space!r}")


def load_metric(path) -> MetricSpace:
    try:
        spec = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise MetricError(f"{path}: not valid JSON ({e})") from None
    return metric_from_dict(spec)


def save_metric(space: MetricSpace, path) -> None:
    Path(path).write_text(json.dumps(metric_to_dict(space), indent=1) + "\n")
