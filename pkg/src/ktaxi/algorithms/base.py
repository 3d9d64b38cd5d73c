"""Shared plumbing for online algorithms.

An algorithm sees the physical configuration (a tuple of taxi positions
with stable indices), the request and a caller-owned rng, and returns the
index of the taxi that serves.  Algorithms that conceptually park taxis
part-way keep those positions internally; the physical taxi only moves when
it serves, which by the triangle inequality never costs more.
"""
from __future__ import annotations

import numpy as np

from ..core import ProtocolError, Request
from ..metric.spaces import EPS, MetricSpace


class OnlineAlgorithm:
    name = "abstract"
    memoryless = False

    def start(self, cfg0: tuple, metric: MetricSpace) -> None:
        self.metric = metric
        self.k = len(cfg0)

    def serve(self, cfg: tuple, req: Request, rng: np.random.Generator) -> int:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}()"


def taxis_at(cfg: tuple, p, metric: MetricSpace | None = None, tol: float = EPS) -> list[int]:
    """Indices of taxis located at ``p``."""
    out = [i for i, x in enumerate(cfg) if x == p]
    if not out and metric is not None:
        out = [i for i, x in enumerate(cfg) if metric.distance(x, p) <= tol]
    return out


def relocation_taxi(cfg: tuple, req: Request, metric: MetricSpace) -> int:
    at = taxis_at(cfg, req.start, metric)
    if not at:
        raise ProtocolError(f"relocation {req} arrived with no taxi at its start")
    return at[0]


class Greedy(OnlineAlgorithm):
    """Nearest taxi serves; ties go to the lowest index."""

    name = "greedy"
    memoryless = True

    def serve(self, cfg, req, rng):
        d = [self.metric.distance(x, req.start) for x in cfg]
        return int(np.argmin(d))
