"""Metric spaces used by the simulator.

Every distance query goes through :meth:`MetricSpace.distance`.  Points are
plain hashable values (ints for finite metrics and HST leaves, floats on the
line).  :class:`VirtualPoint` lets algorithms park a taxi part-way along a
shortest path; its distances are those of the space obtained by gluing a
segment of length ``d(a, b)`` between ``a`` and ``b``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

EPS = 1e-9


class MetricError(ValueError):
    """Invalid metric definition or unknown point."""


@dataclass(frozen=True)
class VirtualPoint:
    """A point at ``frac * d(anchor, target)`` from ``anchor`` on the glued
    segment between the real points ``anchor`` and ``target``."""

    anchor: Hashable
    target: Hashable
    frac: float

    def __post_init__(self):
        if not 0.0 < self.frac < 1.0:
            raise MetricError(f"virtual fraction must lie in (0, 1), got {self.frac}")
        if isinstance(self.anchor, VirtualPoint) or isinstance(self.target, VirtualPoint):
            raise MetricError("virtual point endpoints must be real points")


class MetricSpace:
    """Base class.  Subclasses implement :meth:`_dist` for real points."""

    kind = "abstract"

    def _dist(self, p, q) -> float:
        raise NotImplementedError

    def contains(self, p) -> bool:
        raise NotImplementedError

    def points(self) -> list | None:
        """Finite point list, or None for infinite spaces."""
        return None

    def check_point(self, p):
        if isinstance(p, VirtualPoint):
            self.check_point(p.anchor)
            self.check_point(p.target)
            return
        if not self.contains(p):
            raise MetricError(f"unknown point {p!r} for {self.kind} metric")

    def distance(self, p, q) -> float:
        if p == q:
            return 0.0
        if isinstance(p, VirtualPoint) or isinstance(q, VirtualPoint):
            return self._glued(p, q)
        return self._dist(p, q)

    # -- virtual points -------------------------------------------------
    def _glued(self, p, q) -> float:
        if not isinstance(p, VirtualPoint):
            p, q = q, p
        seg = self._dist(p.anchor, p.target)
        via = [p.frac * seg + self._to_real_or_virtual(p.anchor, q),
               (1.0 - p.frac) * seg + self._to_real_or_virtual(p.target, q)]
        if isinstance(q, VirtualPoint):
            if (q.anchor, q.target) == (p.anchor, p.target):
                via.append(abs(p.frac - q.frac) * seg)
            elif (q.anchor, q.target) == (p.target, p.anchor):
                via.append(abs(p.frac - (1.0 - q.frac)) * seg)
        return min(via)

    def _to_real_or_virtual(self, real, q) -> float:
        if isinstance(q, VirtualPoint):
            seg = self._dist(q.anchor, q.target)
            return min(q.frac * seg + self.distance(real, q.anchor),
                       (1.0 - q.frac) * seg + self.distance(real, q.target))
        return self.distance(real, q)

    def point_along(self, a, b, frac: float):
        """Point at fraction ``frac`` of the way from real point ``a`` to ``b``."""
        if frac <= 0.0:
            return a
        if frac >= 1.0:
            return b
        return VirtualPoint(a, b, frac)

    def step_toward(self, p, s, delta: float):
        """Move from ``p`` a distance ``delta`` along a shortest path to real ``s``."""
        total = self.distance(p, s)
        if delta >= total - EPS * max(1.0, total):
            return s
        if delta <= 0.0:
            return p
        if not isinstance(p, VirtualPoint):
            return self.point_along(p, s, delta / total)
        seg = self._dist(p.anchor, p.target)
        via_target = (1.0 - p.frac) * seg + self._dist(p.target, s) if p.target != s else (1.0 - p.frac) * seg
        via_anchor = p.frac * seg + (self._dist(p.anchor, s) if p.anchor != s else 0.0)
        if via_target <= via_anchor:
            leg = (1.0 - p.frac) * seg
            if delta < leg:
                return self.point_along(p.anchor, p.target, p.frac + delta / seg)
            rest = self.distance(p.target, s)
            return self.point_along(p.target, s, (delta - leg) / rest) if rest > 0 else s
        leg = p.frac * seg
        if delta < leg:
            return self.point_along(p.anchor, p.target, p.frac - delta / seg)
        rest = self.distance(p.anchor, s)
        return self.point_along(p.anchor, s, (delta - leg) / rest) if rest > 0 else s


class LineMetric(MetricSpace):
    """The real line; points are floats and intermediate points are real."""

    kind = "line"

    def _dist(self, p, q) -> float:
        return abs(float(p) - float(q))

    def contains(self, p) -> bool:
        return isinstance(p, (int, float, np.integer, np.floating)) and math.isfinite(float(p))

    def point_along(self, a, b, frac: float):
        if frac <= 0.0:
            return a
        if frac >= 1.0:
            return b
        return a + frac * (b - a)

    def step_toward(self, p, s, delta: float):
        if abs(s - p) <= delta:
            return s
        return p + math.copysign(delta, s - p)

    def __repr__(self):
        return "LineMetric()"


class ExplicitMetric(MetricSpace):
    """Finite metric given by a distance matrix over points ``0..n-1``."""

    kind = "explicit"

    def __init__(self, matrix, validate: bool = True, tol: float = EPS):
        self.matrix = np.asarray(matrix, dtype=float)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise MetricError("distance matrix must be square")
        self.n = self.matrix.shape[0]
        if validate:
            self.validate(tol)

    def validate(self, tol: float = EPS):
        d = self.matrix
        if np.any(d < -tol):
            raise MetricError("negative distance")
        if np.any(np.abs(np.diag(d)) > tol):
            raise MetricError("nonzero self-distance")
        if not np.allclose(d, d.T, atol=tol):
            raise MetricError("matrix is not symmetric")
        # d[i,j] <= d[i,m] + d[m,j] for all m
        for m in range(self.n):
            if np.any(d > d[:, [m]] + d[[m], :] + tol):
                raise MetricError(f"triangle inequality violated through point {m}")

    def _dist(self, p, q) -> float:
        try:
            return float(self.matrix[p, q])
        except (IndexError, TypeError):
            raise MetricError(f"unknown point pair ({p!r}, {q!r})") from None

    def contains(self, p) -> bool:
        return isinstance(p, (int, np.integer)) and 0 <= p < self.n

    def points(self) -> list:
        return list(range(self.n))

    def __repr__(self):
        return f"ExplicitMetric(n={self.n})"


def check_triangle(space: MetricSpace, pts: Sequence, tol: float = EPS) -> bool:
    """Brute-force triangle-inequality check over all triples of ``pts``."""
    for p, q, r in itertools.product(pts, repeat=3):
        if space.distance(p, q) > space.distance(p, r) + space.distance(r, q) + tol:
            return False
    return True


def distance(space: MetricSpace, p, q) -> float:
    """Distance with point validation."""
    space.check_point(p)
    space.check_point(q)
    return space.distance(p, q)


def pairwise(space: MetricSpace, pts: Iterable) -> np.ndarray:
    pts = list(pts)
    out = np.zeros((len(pts), len(pts)))
    for i, p in enumerate(pts):
        for j in range(i + 1, len(pts)):
            out[i, j] = out[j, i] = space.distance(p, pts[j])
    return out
