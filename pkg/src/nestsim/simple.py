"""Population-proportional recruitment strategy: O(k log n) nest choice.

After a single search round, rounds alternate globally between recruitment
(everyone at the home nest) and assessment (everyone at a candidate nest).
An ant committed to a suitable nest leads a recruitment with probability
count/n, where count is the population it assessed at its nest in the
previous round; larger nests therefore snowball.  Ants that searched an
unsuitable nest wait passively and rejoin once led to a suitable one.

The engine drives the vectorized `SimpleCohort`; `step` is the equivalent
single-ant transition used directly in tests.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .world import Go, GoResult, Recruit, RecruitResult, Search, SearchResult

K_SEARCH, K_GO, K_RECRUIT = 0, 1, 2

import numpy as np


def recruit_decision(count: int, n: int, rng) -> int:
    """1 with probability exactly count/n, else 0."""
    if not 0 <= count <= n:
        raise ValueError(f"count {count} outside 0..{n}")
    return int(rng.random() < count / n)


@dataclass
class SimpleAntState:
    active: bool = True
    nest: int = 0
    count: int = 0
    phase: str = "search"       # search -> recruit -> assess -> recruit -> ...
    awaiting: str | None = None


def step(state: SimpleAntState, prev, n: int, rng):
    """Consume the previous round's result and emit this round's request."""
    s = replace(state)
    if s.awaiting == "search":
        assert isinstance(prev, SearchResult)
        s.nest, s.count = prev.nest, prev.count
        if prev.quality == 0:
            s.active = False
        s.phase = "recruit"
    elif s.awaiting == "recruit":
        assert isinstance(prev, RecruitResult)
        if prev.nest != s.nest:
            s.nest = prev.nest
            s.active = True
        s.phase = "assess"
    elif s.awaiting == "assess":
        assert isinstance(prev, GoResult)
        if s.active:
            s.count = prev.count
        s.phase = "recruit"
    else:
        assert prev is None

    if s.phase == "search":
        req = Search()
    elif s.phase == "recruit":
        b = recruit_decision(s.count, n, rng) if s.active else 0
        req = Recruit(b, s.nest)
    else:
        req = Go(s.nest)
    s.awaiting = s.phase
    return s, req


class SimpleCohort:
    """All n ants' states as parallel arrays; semantics mirror `step`.

    Recruit-or-not draws are made as one batch per recruitment round, in
    ant-index order over the currently active ants.
    """

    algorithm = "simple"

    def __init__(self, config):
        n = config.n
        self.config = config
        self.qual = np.asarray(config.qualities, dtype=np.int64)
        self.active = np.ones(n, dtype=bool)
        self.nest = np.zeros(n, dtype=np.int64)
        self.count = np.zeros(n, dtype=np.int64)

    def emit(self, r: int, rng):
        n = self.config.n
        kind = np.empty(n, dtype=np.int8)
        b = np.zeros(n, dtype=np.int8)
        target = np.zeros(n, dtype=np.int64)
        if r == 1:
            kind[:] = K_SEARCH
            return kind, b, target
        target[:] = self.nest
        if r % 2 == 0:  # recruitment round
            kind[:] = K_RECRUIT
            act = np.nonzero(self.active)[0]
            if act.size:
                u = rng.random(act.size)
                b[act] = (u < self.count[act] / n).astype(np.int8)
        else:  # assessment round
            kind[:] = K_GO
        return kind, b, target

    def absorb(self, r: int, res_nest, res_count):
        if r == 1:
            self.nest = res_nest.astype(np.int64)
            self.count = res_count.astype(np.int64)
            self.active = self.qual[self.nest - 1] == 1
            return
        if r % 2 == 0:
            led = res_nest != self.nest
            self.nest[led] = res_nest[led]
            self.active |= led
        else:
            self.count[self.active] = res_count[self.active]

    def convergence_nest(self):
        """Winning nest once all ants are active on one suitable nest, else None."""
        if (
            np.all(self.active)
            and np.all(self.nest == self.nest[0])
            and self.qual[int(self.nest[0]) - 1] == 1
        ):
            return int(self.nest[0])
        return None

    def mode_tallies(self) -> dict:
        a = int(np.count_nonzero(self.active))
        return {"active": a, "passive": self.config.n - a}
