"""Random pairing of recruiters and recruits at the home nest.

All ants that call recruit() in a round form the pool R.  A uniform random
permutation of R is drawn; each actively recruiting ant, when reached in
permutation order and not already led away, picks a uniform random ant from
all of R (itself included) and the pair sticks iff the pick has neither led
nor been led this round.  A self-pick forms an inert self-pair: it changes
nobody's nest but blocks the ant from being recruited later in the round.

Randomness is consumed in a fixed documented order so runs replay exactly:
first the permutation (one rng.permutation call), then one batch of pick
values, one per active caller in ant-index order.  A pick is only *used* if
its owner is still eligible when reached in the permutation; unused picks
are discarded.  Picks are i.i.d. uniform, so this is distributionally
identical to drawing lazily.

An exact-enumeration oracle over the same probability space is provided for
tiny pools.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

MAX_EXACT_POOL = 6


class MatchError(ValueError):
    pass


@dataclass(frozen=True)
class RecruitCall:
    ant: int
    active: int      # 1 = recruiting, 0 = waiting
    target: int      # candidate nest the ant advocates

    def __post_init__(self):
        if self.target == 0:
            raise MatchError("recruit target must be a candidate nest")


@dataclass(frozen=True)
class MatchOutcome:
    """Pairing set plus the nest id handed back to each caller."""

    pairs: tuple       # sorted tuple of (recruiter, recruited) ant-id pairs
    returned: dict     # ant id -> nest id

    def key(self):
        return (self.pairs, tuple(sorted(self.returned.items())))


def match_core(active, targets, perm, picks):
    """Deterministic pairing given the permutation and per-ant pick values.

    `active`, `targets` are sequences indexed by pool position; `perm` is an
    iteration order over pool positions; `picks` maps pool position -> chosen
    pool position (only consulted for active ants).  Returns
    (recruiter, returned): recruiter[x] is the pool position that led x away
    (-1 if none, x itself for a self-pair); returned[x] is x's result nest.
    """
    m = len(targets)
    recruiter = [-1] * m
    has_led = [False] * m
    for a in perm:
        if active[a] and recruiter[a] == -1:
            a2 = picks[a]
            if not has_led[a2] and recruiter[a2] == -1:
                has_led[a] = True
                recruiter[a2] = a
    returned = [
        targets[recruiter[x]] if recruiter[x] not in (-1, x) else targets[x]
        for x in range(m)
    ]
    return recruiter, returned


def match_arrays(active, targets, rng):
    """One recruitment round over parallel pool arrays; the engine fast path.

    Returns (pairs, returned) in pool positions: pairs is a list of
    (recruiter, recruited) including self-pairs, returned a list of nests.
    """
    m = len(targets)
    perm = rng.permutation(m).tolist()
    picks = [-1] * m
    active_idx = [i for i in range(m) if active[i]]
    if active_idx:
        for i, v in zip(active_idx, rng.integers(0, m, size=len(active_idx))):
            picks[i] = int(v)
    recruiter, returned = match_core(active, targets, perm, picks)
    pairs = [(recruiter[x], x) for x in range(m) if recruiter[x] != -1]
    return pairs, returned


def match_round(calls, rng) -> MatchOutcome:
    """Run one recruitment round for a set of RecruitCalls."""
    calls = sorted(calls, key=lambda c: c.ant)
    if not calls:
        raise MatchError("empty call set")
    ants = [c.ant for c in calls]
    if len(set(ants)) != len(ants):
        raise MatchError("duplicate ant in call set")
    active = [c.active for c in calls]
    targets = [c.target for c in calls]
    pairs, returned = match_arrays(active, targets, rng)
    return MatchOutcome(
        pairs=tuple(sorted((ants[a], ants[b]) for a, b in pairs)),
        returned={ants[x]: returned[x] for x in range(len(calls))},
    )


def success_indicator(outcome: MatchOutcome, ant: int) -> int:
    """+1 led another ant, -1 was led away, 0 otherwise (self-pairs inert)."""
    for a, b in outcome.pairs:
        if a == b:
            continue
        if a == ant:
            return 1
        if b == ant:
            return -1
    return 0


def exact_distribution(calls) -> dict:
    """Exact outcome distribution by brute force over tiny pools.

    Enumerates every permutation of the pool and every pick vector of the
    active callers, each atom weighted 1/(|R|! * |R|^|S|).  Returns a map
    from MatchOutcome.key() to an exact Fraction; values sum to 1.
    """
    calls = sorted(calls, key=lambda c: c.ant)
    ants = [c.ant for c in calls]
    if len(set(ants)) != len(ants):
        raise MatchError("duplicate ant in call set")
    m = len(calls)
    if not 1 <= m <= MAX_EXACT_POOL:
        raise MatchError(f"exact enumeration supports 1..{MAX_EXACT_POOL} calls")
    active = [c.active for c in calls]
    targets = [c.target for c in calls]
    active_idx = [i for i in range(m) if active[i]]
    weight = Fraction(1, math.factorial(m) * m ** len(active_idx))

    dist = {}
    for perm in itertools.permutations(range(m)):
        for pick_vec in itertools.product(range(m), repeat=len(active_idx)):
            picks = [-1] * m
            for i, v in zip(active_idx, pick_vec):
                picks[i] = v
            recruiter, returned = match_core(active, targets, perm, picks)
            outcome = MatchOutcome(
                pairs=tuple(
                    sorted(
                        (ants[recruiter[x]], ants[x])
                        for x in range(m)
                        if recruiter[x] != -1
                    )
                ),
                returned={ants[x]: returned[x] for x in range(m)},
            )
            key = outcome.key()
            dist[key] = dist.get(key, Fraction(0)) + weight
    assert sum(dist.values()) == 1
    return dist
