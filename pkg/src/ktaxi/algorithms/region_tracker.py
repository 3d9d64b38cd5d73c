"""Three taxis on the line: speed-biased moves plus per-taxi regions.

Besides positions ``x1 <= x2 <= x3`` the algorithm keeps regions
``I1 = (-inf, r1]``, ``I2 = [l2, r2]`` and ``I3 = [l3, inf)`` with
``x_i`` in ``I_i``, and the index ``A`` of the taxi that served last.  A
simple request left of ``x2`` is served by moving taxis toward it at the
rates below (requests right of ``x2`` are handled in the mirror image)::

    row  condition (x1 < s < x2 unless noted)         x1'    x2'      x3'
    a    s < x1                                       -1     0        0
    b    x1 < r1, l2 < x2, l3 < x3                    b+1    -1       -b
    c    x1 < r1, l2 < x2, l3 = x3                    1      -1       0
    d    x1 = r1, l2 = x2                             1      -1       0
    e    x1 < r1, l2 = x2                             b+1    -1       0
    f    x1 = r1, l2 < x2, A >= 2                     1      -(b+1)   0
    g    x1 = r1, l2 < x2, A = 1                      1      -(c+1)   0

While moving, taxis push the frontiers ``r1`` and ``l2`` ahead of them.
Since taxis only approach ``s`` the frontiers are closed-form in the
positions, every condition above flips at most once, and motion between
flips is linear, so the integration below is exact.  After arriving the
active region is shrunk and its remainder shifted to the neighbours, and a
relocation moves ``x_A`` and rebuilds the endpoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ..core import ProtocolError
from ..metric.spaces import LineMetric, MetricError
from .base import OnlineAlgorithm

INF = math.inf
TOL = 1e-9


@dataclass
class TrackerState:
    x: tuple            # sorted positions
    ids: tuple          # physical taxi index of each sorted slot
    r1: float
    l2: float
    r2: float
    l3: float
    A: int              # 1-based active slot
    b: float = 1.0
    c: float = 5.0
    alpha_sigma: float = 4.0
    psi: float = 64.0
    gamma: float | None = None

    def __post_init__(self):
        if self.gamma is None:
            self.gamma = (2 * self.b + 1) / (2 * self.b) * self.psi

    def copy(self) -> "TrackerState":
        return replace(self)

    @property
    def ends(self) -> tuple:
        return (self.r1, self.l2, self.r2, self.l3)

    def r(self, i: int) -> float:
        return (-INF, self.r1, self.r2, INF)[i]

    def l(self, i: int) -> float:       # noqa: E743
        return (-INF, -INF, self.l2, self.l3, INF)[i]

    def set_r(self, i: int, v: float):
        if i == 1:
            self.r1 = v
        elif i == 2:
            self.r2 = v

    def set_l(self, i: int, v: float):
        if i == 2:
            self.l2 = v
        elif i == 3:
            self.l3 = v

    def mirrored(self) -> "TrackerState":
        """The same state under ``z -> -z``."""
        return replace(self, x=tuple(-v for v in reversed(self.x)), ids=tuple(reversed(self.ids)),
                       r1=-self.l3, l2=-self.r2, r2=-self.l2, l3=-self.r1, A=4 - self.A)


def initial_state(cfg0, **consts) -> TrackerState:
    order = sorted(range(3), key=lambda i: (cfg0[i], i))
    x = tuple(float(cfg0[i]) for i in order)
    return TrackerState(x, tuple(order), x[0], x[0], x[1], x[2], 1, **consts)


def check_state(st: TrackerState, tol: float = TOL) -> list[str]:
    """Violated structural invariants (empty list when all hold)."""
    bad = []
    x1, x2, x3 = st.x
    if not (x1 <= x2 + tol and x2 <= x3 + tol):
        bad.append("positions out of order")
    if not (st.r1 <= st.l2 + tol and st.l2 <= st.r2 + tol and st.r2 <= st.l3 + tol):
        bad.append("endpoints out of order")
    if not (x1 <= st.r1 + tol and st.l2 - tol <= x2 <= st.r2 + tol and st.l3 <= x3 + tol):
        bad.append("taxi outside its region")
    xa = st.x[st.A - 1]
    if sum(abs(e - xa) <= tol for e in st.ends) < 2:
        bad.append("fewer than two endpoints at the active taxi")
    return bad


def rates(row: str, b: float, c: float) -> tuple[float, float, float]:
    return {"a": (-1.0, 0.0, 0.0), "b": (b + 1, -1.0, -b), "c": (1.0, -1.0, 0.0),
            "d": (1.0, -1.0, 0.0), "e": (b + 1, -1.0, 0.0), "f": (1.0, -(b + 1), 0.0),
            "g": (1.0, -(c + 1), 0.0)}[row]


def table_row(x, s, at_r1: bool, at_l2: bool, at_l3: bool, A: int) -> str:
    if s < x[0]:
        return "a"
    if at_r1:
        if at_l2:
            return "d"
        return "f" if A >= 2 else "g"
    if at_l2:
        return "e"
    return "c" if at_l3 else "b"


def _approach(st: TrackerState, s: float, events: list | None, tol: float = TOL) -> float:
    """Move taxis until one sits at ``s`` (requires ``s < x2``).  Returns the
    total distance moved.  Updates ``x``, ``r1`` and ``l2`` in place."""
    x = list(st.x)
    r1h, l2h, l3 = st.r1, st.l2, st.l3
    moved = 0.0
    while abs(x[0] - s) > tol and abs(x[1] - s) > tol:
        at_r1 = x[0] >= r1h - tol
        at_l2 = x[1] <= l2h + tol
        at_l3 = x[2] <= l3 + tol
        row = table_row(x, s, at_r1, at_l2, at_l3, st.A)
        v = rates(row, st.b, st.c)
        # time to the next flip or arrival
        cand = []
        if v[0] < 0:
            cand.append((x[0] - s) / -v[0])
        if v[0] > 0:
            cand.append((s - x[0]) / v[0])
            if not at_r1:
                cand.append((r1h - x[0]) / v[0])
        if v[1] < 0:
            cand.append((x[1] - s) / -v[1])
            if not at_l2:
                cand.append((x[1] - l2h) / -v[1])
        if v[2] < 0 and not at_l3:
            cand.append((x[2] - l3) / -v[2])
        dt = max(0.0, min(cand))
        new = [x[i] + v[i] * dt for i in range(3)]
        # snap exact hits
        for i, lim in ((0, s), (1, s)):
            if abs(new[i] - lim) <= tol:
                new[i] = lim
        if v[0] > 0 and abs(new[0] - r1h) <= tol:
            new[0] = r1h
        if v[1] < 0 and abs(new[1] - l2h) <= tol:
            new[1] = l2h
        if v[2] < 0 and abs(new[2] - l3) <= tol:
            new[2] = l3
        moved += sum(abs(v[i]) * dt for i in range(3))
        x = new
        if events is not None:
            events.append((row, dt))
    st.x = tuple(x)
    st.r1 = min(max(x[0], r1h), x[1])
    st.l2 = max(st.r1, min(l2h, x[1]))
    return moved


def _post_arrival(st: TrackerState, s: float, trace, tol: float = TOL):
    """Pick the active taxi at ``s`` and run the shrink and shift steps."""
    st.A = min(i for i in (1, 2, 3) if abs(st.x[i - 1] - s) <= tol)
    A = st.A
    xa = st.x[A - 1]
    if trace is not None:
        trace.append(("arrive", st.copy()))
    # shrink I_A
    lo, hi = st.l(A), st.r(A)
    if lo < xa - tol and xa + tol < hi:
        d = min(xa - lo, hi - xa)
        st.set_l(A, xa if abs(lo + d - xa) <= tol else lo + d)
        st.set_r(A, xa if abs(hi - d - xa) <= tol else hi - d)
    if trace is not None:
        trace.append(("shrink", st.copy()))
    # shift the left remainder into I_{A+1}
    lo, nxt = st.l(A), st.l(A + 1)
    if lo < xa - tol and xa + tol < nxt:
        d = min(xa - lo, nxt - xa)
        st.set_l(A, xa if abs(lo + d - xa) <= tol else lo + d)
        st.set_l(A + 1, xa if abs(nxt - d - xa) <= tol else nxt - d)
    if trace is not None:
        trace.append(("shift_left", st.copy()))
    # shift the right remainder into I_{A-1}
    prv, hi = st.r(A - 1), st.r(A)
    if prv < xa - tol and xa + tol < hi:
        d = min(xa - prv, hi - xa)
        st.set_r(A, xa if abs(hi - d - xa) <= tol else hi - d)
        st.set_r(A - 1, xa if abs(prv + d - xa) <= tol else prv + d)
    if trace is not None:
        trace.append(("shift_right", st.copy()))


def serve_simple(st: TrackerState, s: float, trace: list | None = None,
                 events: list | None = None) -> float:
    """Serve a simple request at ``s`` in place.  Returns the distance moved."""
    s = float(s)
    x2 = st.x[1]
    if s > x2 + TOL:
        m = st.mirrored()
        moved = _approach(m, -s, events)
        sub = [] if trace is not None else None
        _post_arrival(m, -s, sub)
        back = m.mirrored()
        for f in ("x", "ids", "r1", "l2", "r2", "l3", "A"):
            setattr(st, f, getattr(back, f))
        if trace is not None:
            trace.extend((label, snap.mirrored()) for label, snap in sub)
        return moved
    if s < x2 - TOL:
        moved = _approach(st, s, events)
    else:                               # s == x2: nobody moves
        moved = 0.0
        st.x = (st.x[0], s, st.x[2])
    _post_arrival(st, s, trace)
    return moved


def relocate(st: TrackerState, t: float, tol: float = TOL):
    """Move the active taxi to ``t`` and rebuild the endpoints around it."""
    xa = st.x[st.A - 1]
    ends = list(st.ends)
    for _ in range(2):
        j = min(range(len(ends)), key=lambda i: abs(ends[i] - xa))
        if abs(ends[j] - xa) > tol:
            raise ProtocolError("fewer than two endpoints at the active taxi")
        ends.pop(j)
    e1, e2 = sorted(ends)
    moving = st.ids[st.A - 1]
    pairs = [(st.x[i], st.ids[i]) for i in range(3) if i != st.A - 1] + [(float(t), moving)]
    pairs.sort(key=lambda p: (p[0], p[1] != moving))
    st.x = tuple(p[0] for p in pairs)
    st.ids = tuple(p[1] for p in pairs)
    st.A = min(i for i in (1, 2, 3) if st.x[i - 1] == t)
    st.r1, st.l2, st.r2, st.l3 = sorted((e1, e2, float(t), float(t)))


# -- potentials -------------------------------------------------------------
def _overlap(a: float, b: float, lo: float, hi: float) -> float:
    return max(0.0, min(b, hi) - max(a, lo))


def sigma(st: TrackerState, tol: float = TOL) -> float:
    x1, x2, x3 = st.x
    if abs(st.l3 - x3) <= tol:
        return min(st.r1 - x1, x2 - st.l2)
    if abs(x1 - st.r1) <= tol:
        return min(st.r2 - x2, x3 - st.l3)
    return min(st.r1 - x1 + st.r2 - x2, x2 - st.l2 + x3 - st.l3)


def psi_potential(st: TrackerState, y) -> float:
    y = sorted(float(v) for v in y)
    g, p = st.gamma, st.psi
    total = 0.0
    for i in (1, 2, 3):
        a, b = sorted((st.x[i - 1], y[i - 1]))
        inside = _overlap(a, b, st.l(i), st.r(i))
        middle = _overlap(a, b, st.r(i - 1), st.l(i + 1))
        total += (g - p) * inside + g * (middle - inside) + (g + p) * (b - a - middle)
    return total


def tracker_potentials(st: TrackerState, y) -> tuple[float, float, float]:
    """``(Sigma, Psi, Phi)`` against the offline configuration ``y``."""
    s, ps = sigma(st), psi_potential(st, y)
    return s, ps, st.alpha_sigma * s + ps


def competitive_constant(b=1.0, c=5.0, alpha_sigma=4.0, psi=64.0, gamma=None) -> float:
    """Ratio constant implied by the potential argument for these constants.

    Per unit of offline movement: the offline move raises the regions part
    by at most ``gamma + psi``; a request served by the same active pair
    costs at most ``c + 2`` per unit of its distance, with the sum part
    growing at most ``c + 1`` times as fast and the regions part at most
    ``(gamma + psi)(c + 2) + 2 psi``.
    """
    if gamma is None:
        gamma = (2 * b + 1) / (2 * b) * psi
    return (c + 2) + alpha_sigma * (c + 1) + (gamma + psi) * (c + 2) + 2 * psi + (gamma + psi)


def drift_margins(b=1.0, c=5.0, alpha_sigma=4.0, psi=64.0, gamma=None) -> dict:
    """``-(cost' + alpha*Sigma' + Psi')`` upper bounds per table row; all must be >= 0."""
    if gamma is None:
        gamma = (2 * b + 1) / (2 * b) * psi
    gp = gamma - psi
    cost = {r: sum(abs(v) for v in rates(r, b, c)) for r in "abcdefg"}
    sig = {"a": 0.0, "b": -b, "c": -1.0, "d": 1.0, "e": 1.0, "f": b + 1, "g": c + 1}
    ps = {"a": -gp, "b": 0.0, "c": 0.0, "d": -psi, "e": -gp * b, "f": -gp * b,
          "g": 2 * psi - c * gp}
    return {r: -(cost[r] + alpha_sigma * sig[r] + ps[r]) for r in "abcdefg"}


class RegionTracker(OnlineAlgorithm):
    name = "region_tracker"
    memoryless = False

    def __init__(self, b=1.0, c=5.0, alpha_sigma=4.0, psi=64.0, gamma=None, trace=False):
        if not c > b > 0:
            raise ValueError("constants must satisfy c > b > 0")
        self.consts = dict(b=b, c=c, alpha_sigma=alpha_sigma, psi=psi, gamma=gamma)
        self.keep_trace = trace
        self.trace: list = []

    def start(self, cfg0, metric):
        if not isinstance(metric, LineMetric):
            raise MetricError("RegionTracker runs on the line only")
        if len(cfg0) != 3:
            raise ValueError("RegionTracker needs exactly three taxis")
        super().start(cfg0, metric)
        self.state = initial_state(cfg0, **self.consts)
        self.nominal_cost = 0.0
        self.last_cost = 0.0
        self.trace = []

    def serve(self, cfg, req, rng):
        st = self.state
        s = float(req.start)
        tr = [] if self.keep_trace else None
        self.last_cost = 0.0
        if req.simple or abs(st.x[st.A - 1] - s) > TOL:
            self.last_cost = serve_simple(st, s, tr)
            self.nominal_cost += self.last_cost
        taxi = st.ids[st.A - 1]
        if not req.simple:
            if tr is not None:
                tr.append(("before_relocation", st.copy()))
            relocate(st, float(req.dest))
            if tr is not None:
                tr.append(("after_relocation", st.copy()))
        if tr is not None:
            self.trace.append((req, tr))
        return taxi
