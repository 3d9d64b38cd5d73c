"""Two-taxi algorithm for arbitrary metrics: double coverage with a bias.

On a simple request both taxis head for ``s``; the passive one (the taxi
that did not serve last) moves twice as fast.  Both stop when one arrives.
The one left short of ``s`` is parked at a virtual point; physically it
stays put until it next serves.
"""
from __future__ import annotations

from ..core import ProtocolError
from ..metric.spaces import EPS
from .base import OnlineAlgorithm, taxis_at


class BiasedDC(OnlineAlgorithm):
    name = "biased_dc"
    memoryless = False

    def start(self, cfg0, metric):
        if len(cfg0) != 2:
            raise ValueError("BiasedDC needs exactly two taxis")
        super().start(cfg0, metric)
        self.pos = list(cfg0)
        self.active = 0
        self.nominal_cost = 0.0
        self.last_cost = 0.0

    @property
    def passive(self) -> int:
        return 1 - self.active

    def state(self) -> tuple:
        return tuple(self.pos), self.active

    def race(self, s) -> tuple[int, float]:
        """``(winner, stop time)`` for a simple request at ``s``."""
        d_a = self.metric.distance(self.pos[self.active], s)
        d_p = self.metric.distance(self.pos[self.passive], s)
        t_stop = min(d_a, d_p / 2.0)
        return (self.active if d_a <= d_p / 2.0 else self.passive), t_stop

    def serve_simple(self, s) -> int:
        winner, t_stop = self.race(s)
        A, P = self.active, self.passive
        if t_stop > 0:
            self.pos[A] = self.metric.step_toward(self.pos[A], s, t_stop)
            self.pos[P] = self.metric.step_toward(self.pos[P], s, 2.0 * t_stop)
        self.pos[winner] = s
        self.last_cost = 3.0 * t_stop
        self.nominal_cost += self.last_cost
        self.active = winner
        return winner

    def serve(self, cfg, req, rng):
        s = req.start
        if req.simple:
            return self.serve_simple(s)
        self.last_cost = 0.0
        i = next((j for j in (self.active, self.passive) if self.pos[j] == s), None)
        if i is None:
            at = taxis_at(cfg, s, self.metric, EPS)
            if not at:
                raise ProtocolError(f"relocation {req} arrived with no taxi at its start")
            i = at[0]
        self.pos[i] = req.dest
        self.active = i
        return i
