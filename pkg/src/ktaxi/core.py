"""Requests, configurations, cost accounting and the simulation loop.

A configuration is a tuple of ``k`` taxi positions; the tuple index is the
taxi's identity and never changes during a run.  Serving ``(s, t)`` with taxi
``i`` moves it empty to ``s`` (hard cost) and then carries it to ``t``; the
easy cost charges both legs.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Protocol, Sequence

import numpy as np

from .metric.spaces import EPS, MetricSpace


class ProtocolError(RuntimeError):
    """An algorithm or source broke the simulation contract."""


@dataclass(frozen=True)
class Request:
    start: Hashable
    dest: Hashable

    @property
    def simple(self) -> bool:
        return self.start == self.dest

    def __iter__(self):
        return iter((self.start, self.dest))


def simple(p) -> Request:
    return Request(p, p)


def normalize_sequence(seq: Iterable) -> list[Request]:
    """Insert ``(s, s)`` before every relocation ``(s, t)`` that lacks it."""
    out: list[Request] = []
    for r in seq:
        r = r if isinstance(r, Request) else Request(*r)
        if not r.simple and not (out and out[-1] == simple(r.start)):
            out.append(simple(r.start))
        out.append(r)
    return out


def is_normalized(seq: Sequence[Request]) -> bool:
    return all(r.simple or (i > 0 and seq[i - 1] == simple(r.start)) for i, r in enumerate(seq))


def configuration(points: Iterable, k: int | None = None) -> tuple:
    cfg = tuple(points)
    if not cfg:
        raise ValueError("a configuration needs at least one taxi")
    if k is not None and len(cfg) != k:
        raise ValueError(f"expected {k} taxis, got {len(cfg)}")
    return cfg


def canonical(cfg: Iterable) -> tuple:
    """Sorted tuple: the multiset view of a configuration."""
    return tuple(sorted(cfg, key=_sort_key))


def _sort_key(p):
    return (type(p).__name__, p) if not isinstance(p, (int, float, np.integer, np.floating)) else ("", p)


def apply_request(cfg: tuple, req: Request, taxi: int, metric: MetricSpace):
    """Serve ``req`` with ``cfg[taxi]``.  Returns ``(cfg, easy_delta, hard_delta)``."""
    if not isinstance(taxi, (int, np.integer)) or not 0 <= taxi < len(cfg):
        raise IndexError(f"taxi index {taxi!r} out of range for {len(cfg)} taxis")
    hard = metric.distance(cfg[taxi], req.start)
    easy = hard + metric.distance(req.start, req.dest)
    new = cfg[:taxi] + (req.dest,) + cfg[taxi + 1:]
    return new, easy, hard


@dataclass
class CostLedger:
    easy: float = 0.0
    hard: float = 0.0
    carried: float = 0.0

    def add(self, easy: float, hard: float):
        self.easy += easy
        self.hard += hard
        self.carried += easy - hard

    def consistent(self, tol: float = EPS) -> bool:
        return abs(self.easy - (self.hard + self.carried)) <= tol * max(1.0, self.easy)

    def cost(self, mode: str) -> float:
        if mode not in ("easy", "hard"):
            raise ValueError(f"cost mode must be 'easy' or 'hard', got {mode!r}")
        return self.easy if mode == "easy" else self.hard


@dataclass(frozen=True)
class Step:
    request: Request
    taxi: int
    cfg: tuple
    easy: float
    hard: float


@dataclass
class Transcript:
    cfg0: tuple
    steps: list[Step] = field(default_factory=list)
    ledger: CostLedger = field(default_factory=CostLedger)

    @property
    def requests(self) -> list[Request]:
        return [s.request for s in self.steps]

    @property
    def final(self) -> tuple:
        return self.steps[-1].cfg if self.steps else self.cfg0

    def __len__(self):
        return len(self.steps)


class RequestSource(Protocol):
    adaptive: bool

    def next_request(self, cfg: tuple) -> Request | None: ...


class FixedSource:
    """Replays a fixed sequence; ignores the online configuration."""

    adaptive = False

    def __init__(self, seq: Iterable):
        self.seq = [r if isinstance(r, Request) else Request(*r) for r in seq]
        self._i = 0

    def next_request(self, cfg):
        if self._i >= len(self.seq):
            return None
        self._i += 1
        return self.seq[self._i - 1]


class OnlineAlgorithm(Protocol):
    memoryless: bool

    def start(self, cfg0: tuple, metric: MetricSpace) -> None: ...

    def serve(self, cfg: tuple, req: Request, rng: np.random.Generator) -> int: ...


def simulate(algo, source, cfg0: tuple, metric: MetricSpace, rng: np.random.Generator,
             horizon: int | None = None, observer=None) -> Transcript:
    """Run ``algo`` against ``source`` for at most ``horizon`` requests.

    Adaptive sources see the realized configuration after every request.
    ``observer(step_index, cfg_before, step)`` is called after each request.
    """
    if source is None:
        source = FixedSource([])
    if getattr(source, "adaptive", False) and horizon is None:
        raise ValueError("adaptive sources need a horizon")
    cfg = configuration(cfg0)
    algo.start(cfg, metric)
    tr = Transcript(cfg)
    n = 0
    while horizon is None or n < horizon:
        req = source.next_request(cfg)
        if req is None:
            break
        taxi = algo.serve(cfg, req, rng)
        if not isinstance(taxi, (int, np.integer)) or not 0 <= taxi < len(cfg):
            raise ProtocolError(f"{type(algo).__name__} returned invalid taxi {taxi!r}")
        new, easy, hard = apply_request(cfg, req, int(taxi), metric)
        step = Step(req, int(taxi), new, easy, hard)
        tr.steps.append(step)
        tr.ledger.add(easy, hard)
        if observer is not None:
            observer(n, cfg, step)
        cfg = new
        n += 1
    return tr


def replay(cfg0: tuple, steps: Iterable[tuple[Request, int]], metric: MetricSpace) -> Transcript:
    """Rebuild a transcript from ``(request, taxi)`` decisions."""
    tr = Transcript(tuple(cfg0))
    cfg = tr.cfg0
    for req, taxi in steps:
        cfg, easy, hard = apply_request(cfg, req, taxi, metric)
        tr.steps.append(Step(req, taxi, cfg, easy, hard))
        tr.ledger.add(easy, hard)
    return tr


# -- files -----------------------------------------------------------------
def _parse_point(tok: str):
    try:
        return int(tok)
    except ValueError:
        x = float(tok)
        if not math.isfinite(x):
            raise ValueError(f"non-finite point {tok!r}") from None
        return x


def read_requests(path) -> list[Request]:
    """Read ``s t`` lines (``#`` starts a comment; a single token is a simple request)."""
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) not in (1, 2):
            raise ValueError(f"{path}:{lineno}: expected 's t', got {line!r}")
        try:
            pts = [_parse_point(t) for t in toks]
        except ValueError as e:
            raise ValueError(f"{path}:{lineno}: {e}") from None
        out.append(Request(pts[0], pts[-1]))
    return out


def write_requests(seq: Iterable[Request], path) -> None:
    with open(path, "w") as fh:
        for r in seq:
            fh.write(f"{r.start!r} {r.dest!r}\n")


def write_transcript_csv(tr: Transcript, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "s", "t", "taxi", "hard_delta", "easy_delta", "hard_total", "easy_total"])
        easy = hard = 0.0
        for i, st in enumerate(tr.steps):
            easy += st.easy
            hard += st.hard
            w.writerow([i, st.request.start, st.request.dest, st.taxi,
                        repr(st.hard), repr(st.easy), repr(hard), repr(easy)])
