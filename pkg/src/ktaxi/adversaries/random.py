"""I.i.d. request baselines."""
from __future__ import annotations

import numpy as np

from ..core import Request, normalize_sequence


def random_requests(points, n: int, relocation_prob: float, rng: np.random.Generator) -> list[Request]:
    """``n`` uniform requests over ``points``; each is a relocation with
    probability ``relocation_prob`` (then preceded by its simple twin)."""
    if not 0.0 <= relocation_prob <= 1.0:
        raise ValueError("relocation_prob must lie in [0, 1]")
    pts = list(points)
    out = []
    for _ in range(n):
        s = pts[rng.integers(len(pts))]
        if rng.random() < relocation_prob:
            out.append(Request(s, pts[rng.integers(len(pts))]))
        else:
            out.append(Request(s, s))
    return normalize_sequence(out)


def random_line_requests(n: int, relocation_prob: float, rng: np.random.Generator,
                         low: float = 0.0, high: float = 10.0, grid: int | None = None) -> list[Request]:
    """Requests on an interval of the line; ``grid`` snaps points to ``grid + 1`` ticks."""
    def draw():
        x = rng.uniform(low, high)
        if grid:
            x = low + round((x - low) / (high - low) * grid) * (high - low) / grid
        return float(x)
    out = []
    for _ in range(n):
        s = draw()
        out.append(Request(s, draw()) if rng.random() < relocation_prob else Request(s, s))
    return normalize_sequence(out)
