"""Event-driven simulation of three pulse-coupled clocks in a line, B - A - C.

Each clock advances its phase at unit rate and fires when the phase reaches
``2 pi``; it is then reset to 0 and kicks its neighbours.  There is no B-C
edge.  Phase differences ``(theta_B - theta_A, theta_C - theta_A)`` are
sampled every time A fires, which gives a discrete orbit to hold against
the line map.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Sequence, Union

import numpy as np

from .core import TWO_PI, _coupling, apply_line_map
from .errors import InvalidKickRule
from .symmetry import wrapped_difference

NAMES = ("B", "A", "C")
B, A, C = 0, 1, 2
NEIGHBOURS = {B: (A,), A: (B, C), C: (A,)}


def sine_kick(theta: float, a: float) -> float:
    """Phase response ``theta -> theta + a sin(theta)``; for ``a < 1`` it is
    monotone and keeps the phase inside ``[0, 2 pi)``."""
    k = round(theta / math.pi)
    s = math.sin(theta - k * math.pi)
    return theta + a * (s if k % 2 == 0 else -s)


def no_kick(theta: float, a: float) -> float:
    return theta


KICK_RULES = {"sine": sine_kick, "none": no_kick}

KickRule = Union[str, Callable[[float, float], float]]


def resolve_kick_rule(rule: KickRule) -> Callable[[float, float], float]:
    if callable(rule):
        return rule
    try:
        return KICK_RULES[rule]
    except (KeyError, TypeError):
        raise InvalidKickRule(f"unknown kick rule {rule!r}; choose from {sorted(KICK_RULES)}") from None


class StroboscopicRecord(NamedTuple):
    cycle: int
    x: float
    y: float
    time: float


class Kick(NamedTuple):
    time: float
    source: str
    target: str


@dataclass
class OscillatorEnsemble:
    """Phases of B, A, C in ``[0, 2 pi)``.

    A clock whose initial phase is exactly 0 fires at ``t = 0``; after that a
    reset phase of 0 means a full period until the next firing.
    """

    theta: List[float]
    a: float
    time: float = 0.0
    kick: Callable[[float, float], float] = field(default=sine_kick, repr=False)

    def __post_init__(self):
        if len(self.theta) != 3:
            raise ValueError("need three phases (theta_B, theta_A, theta_C)")
        self.theta = [float(t) % TWO_PI for t in self.theta]
        self.pending = [i for i, t in enumerate(self.theta) if t == 0.0]

    def next_event(self):
        """Index and delay of the next firing; ties go to B, then A, then C."""
        if self.pending:
            return self.pending[0], 0.0
        best, wait = 0, math.inf
        for i, th in enumerate(self.theta):
            w = TWO_PI - th
            if w < wait:
                best, wait = i, w
        return best, max(wait, 0.0)

    def fire_next(self, log: Optional[list] = None) -> int:
        i, wait = self.next_event()
        if self.pending:
            self.pending.pop(0)
        elif wait > 0.0:
            self.theta = [th + wait for th in self.theta]
            self.time += wait
        self.theta[i] = 0.0
        for j in NEIGHBOURS[i]:
            self.theta[j] = self.kick(self.theta[j], self.a)
            if log is not None:
                log.append(Kick(self.time, NAMES[i], NAMES[j]))
        return i


def phases_from_differences(x: float, y: float):
    """Phases ``(theta_B, theta_A, theta_C)`` with A about to fire."""
    return (x % TWO_PI, 0.0, y % TWO_PI)


def _unwrap(prev: float, value: float) -> float:
    return value + TWO_PI * round((prev - value) / TWO_PI)


def simulate(initial_phases: Sequence[float], params, n_cycles: int,
             kick_rule: KickRule = "sine", event_log: Optional[list] = None,
             start: Optional[Sequence[float]] = None) -> List[StroboscopicRecord]:
    """Run the ensemble for ``n_cycles`` firings of A after the first one.

    The first record is taken at A's first firing (at ``t = 0`` when its
    phase starts at 0).  Records are unwrapped by nearest-branch
    continuation; ``start`` fixes the branch of the first record.

    Args:
        kick_rule: ``"sine"`` (default), ``"none"`` or a callable
            ``(theta, a) -> theta'``.
        event_log: if given, every kick is appended as a :class:`Kick`.
    """
    a = _coupling(params)
    kick = resolve_kick_rule(kick_rule)
    if n_cycles < 1:
        raise ValueError("n_cycles must be >= 1")
    ens = OscillatorEnsemble(list(initial_phases), a, kick=kick)
    records: List[StroboscopicRecord] = []
    prev = None if start is None else (float(start[0]), float(start[1]))
    while len(records) <= n_cycles:
        i, wait = ens.next_event()
        if i == A:
            # A sits at 2 pi (or at 0 when pending); differences mod 2 pi.
            x = (ens.theta[B] + wait) % TWO_PI
            y = (ens.theta[C] + wait) % TWO_PI
            if prev is not None:
                x, y = _unwrap(prev[0], x), _unwrap(prev[1], y)
            records.append(StroboscopicRecord(len(records), x, y, ens.time + wait))
            prev = (x, y)
        ens.fire_next(event_log)
    return records


def compare_with_map(initial_phases: Sequence[float], params, n_cycles: int,
                     kick_rule: KickRule = "sine") -> float:
    """Largest wrapped sup-norm gap between the simulated stroboscopic orbit
    and the line map iterated from the same first record."""
    a = _coupling(params)
    recs = simulate(initial_phases, a, n_cycles, kick_rule)
    sim = np.array([(r.x, r.y) for r in recs])
    z = sim[0].copy()
    worst = 0.0
    for n in range(1, len(sim)):
        z = apply_line_map(z, a)
        worst = max(worst, float(np.max(np.abs(wrapped_difference(sim[n] - z)))))
    return worst


def one_cycle_deviation(x: float, y: float, params, kick_rule: KickRule = "sine") -> float:
    """Sup-norm gap after a single cycle started from differences ``(x, y)``."""
    a = _coupling(params)
    recs = simulate(phases_from_differences(x, y), a, 1, kick_rule, start=(x, y))
    step = np.array([recs[1].x, recs[1].y])
    return float(np.max(np.abs(wrapped_difference(step - apply_line_map(np.array([x, y]), a)))))


def per_cycle_deviations(records: Sequence[StroboscopicRecord], params) -> np.ndarray:
    """``|rec_n - F(rec_{n-1})|`` for each record (0 for the first)."""
    a = _coupling(params)
    xy = np.array([(r.x, r.y) for r in records])
    out = np.zeros(len(xy))
    if len(xy) > 1:
        pred = apply_line_map(xy[:-1], a)
        out[1:] = np.max(np.abs(wrapped_difference(xy[1:] - pred)), axis=1)
    return out
