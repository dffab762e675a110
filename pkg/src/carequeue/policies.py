"""Priority disciplines and nurse-assignment rules.

All functions are pure: they read counts from the observable state and
never mutate it. Assignment scores are computed on the state *excluding*
the arriving patient (the arrival is the object being placed, and the
rules do not look at its type).
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

from .model import SystemParams, SystemState

__all__ = [
    "select_service",
    "instant_cost_score",
    "future_cost_score",
    "assign",
]


def select_service(needy_row: Sequence[int], priority: str) -> int:
    """Stage (1-based) the nurse serves next, or 0 when the queue is empty.

    ``shortest_first`` picks the smallest occupied stage, ``longest_first``
    the largest.
    """
    R = len(needy_row)
    if priority == "shortest_first":
        for r in range(R):
            if needy_row[r] > 0:
                return r + 1
        return 0
    if priority == "longest_first":
        for r in range(R - 1, -1, -1):
            if needy_row[r] > 0:
                return r + 1
        return 0
    raise ValueError(f"unknown priority rule {priority!r}")


@lru_cache(maxsize=128)
def stage_weights(R: int, a: float) -> tuple:
    """(w, cw): w[r-1] = r**a and cw[r-1] = sum of r'**a for r' <= r."""
    w = tuple(float(r) ** a for r in range(1, R + 1))
    cw = []
    acc = 0.0
    for x in w:
        acc += x
        cw.append(acc)
    return w, tuple(cw)


def instant_cost_score(state: SystemState, nurse: int, a: float) -> float:
    """H1 score: current holding cost of the nurse's needy queue,
    sum over stages of r**a times the needy count."""
    w, _ = stage_weights(state.R, a)
    row = state.needy[nurse]
    return sum(w[r] * row[r] for r in range(state.R) if row[r])


def future_cost_score(state: SystemState, nurse: int, a: float) -> float:
    """H2 score: aggregate holding cost of all remaining visits of the
    nurse's patients, needy and content alike; a stage-r patient will be
    charged r'**a once for each remaining visit r' <= r."""
    _, cw = stage_weights(state.R, a)
    needy = state.needy[nurse]
    content = state.content[nurse]
    total = 0.0
    for r in range(state.R):
        n = needy[r] + (content[r] if r < state.R - 1 else 0)
        if n:
            total += cw[r] * n
    return total


_SCORERS = {"h1": instant_cost_score, "h2": future_cost_score}


def assign(state: SystemState, params: SystemParams, rule: str, u: float) -> int:
    """Nurse (0-based) receiving the arriving patient.

    ``h1`` / ``h2`` take the argmin of their score, ties broken uniformly
    with the tie-break uniform ``u``; ``random`` ignores scores entirely.
    """
    if rule != "random" and rule not in _SCORERS:
        raise ValueError(f"unknown assignment rule {rule!r}")
    I = params.I
    if I == 1:
        return 0
    if rule == "random":
        return min(int(u * I), I - 1)
    scorer = _SCORERS[rule]
    scores = [scorer(state, i, params.a) for i in range(I)]
    best = min(scores)
    tied = [i for i, s in enumerate(scores) if s == best]
    if len(tied) == 1:
        return tied[0]
    return tied[min(int(u * len(tied)), len(tied) - 1)]
