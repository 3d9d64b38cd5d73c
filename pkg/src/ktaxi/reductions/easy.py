"""Easy k-taxi from a k-server algorithm.

Every relocation ``(s, t)`` becomes ``2kN + 1`` evenly spaced server
requests from ``s`` to ``t``.  The server algorithm serves them with at most
``k`` fresh servers; whenever a fresh server takes over, the carrying taxi
swaps places with it (two steps of length ``d(s, t) / 2kN``), so the taxi
that picked the passenger up is the one that arrives.  Taxis that the swaps
would park part-way stay where they are until they next serve.

Segment points are plain coordinates, so the host metric must be the line.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import ProtocolError, Request, Step, Transcript, apply_request, is_normalized, simple
from ..metric.spaces import LineMetric


@dataclass
class EasyRun:
    transcript: Transcript                  # the easy k-taxi run on the taxi sequence
    server_transcript: Transcript           # the server algorithm on the expanded sequence
    swap_cost: float = 0.0
    swaps: int = 0
    blocks: list = field(default_factory=list)   # per relocation: number of serving blocks

    @property
    def cost(self) -> float:
        return self.transcript.ledger.easy

    @property
    def server_cost(self) -> float:
        return self.server_transcript.ledger.hard


def segment_points(s: float, t: float, k: int, N: int) -> list[float]:
    n = 2 * k * N
    pts = [s + (t - s) * i / n for i in range(n)]
    return pts + [t]


def easy_taxi_from_kserver(server_algo, N: int, metric, cfg0, seq, rng: np.random.Generator) -> EasyRun:
    """Run the derived easy-taxi algorithm on ``seq``; see module docstring."""
    if not isinstance(metric, LineMetric):
        raise ValueError("segment expansion needs the line metric")
    if N < 1:
        raise ValueError("N must be a positive integer")
    seq = [r if isinstance(r, Request) else Request(*r) for r in seq]
    if not is_normalized(seq):
        raise ValueError("taxi sequence must be normalized")
    k = len(cfg0)
    servers = tuple(cfg0)                   # server algorithm's configuration
    taxis = tuple(cfg0)                     # physical taxi positions
    owner = list(range(k))                  # server index -> taxi index
    server_algo.start(servers, metric)
    srv = Transcript(servers)
    out = Transcript(taxis)
    run = EasyRun(out, srv)

    def serve_point(r):
        nonlocal servers
        a = int(server_algo.serve(servers, simple(r), rng))
        if not 0 <= a < k:
            raise ProtocolError(f"server algorithm returned invalid index {a!r}")
        before = servers[a]
        servers, easy, hard = apply_request(servers, simple(r), a, metric)
        srv.steps.append(Step(simple(r), a, servers, easy, hard))
        srv.ledger.add(easy, hard)
        return a, before

    for req in seq:
        if req.simple:
            a, _ = serve_point(req.start)
            taxi = owner[a]
        else:
            pts = segment_points(req.start, req.dest, k, N)
            step = abs(pts[1] - pts[0])
            a, _ = serve_point(pts[0])
            taxi = owner[a]
            carrier_srv, used, blocks = a, {a}, 1
            for i in range(1, len(pts)):
                b, p = serve_point(pts[i])
                if b == carrier_srv:
                    continue
                # b arrives from p; behind the previous point it could have
                # walked through it, otherwise the carrier swaps with it
                behind = (pts[i] - pts[i - 1]) * (pts[i - 1] - p) >= 0
                if not behind:
                    run.swap_cost += 2 * step
                    run.swaps += 1
                if b not in used:
                    used.add(b)
                    blocks += 1
                owner[b], owner[carrier_srv] = owner[carrier_srv], owner[b]
                carrier_srv = b
            run.blocks.append(blocks)
            if owner[carrier_srv] != taxi:
                raise ProtocolError("carrier lost track of its passenger")
        taxis, easy, hard = apply_request(taxis, req, taxi, metric)
        out.steps.append(Step(req, taxi, taxis, easy, hard))
        out.ledger.add(easy, hard)
    return run
