"""One-period transition timeline and whole-replication driver.

Period layout (all within period t):

1. arrival coin (prob alpha) and, if a patient arrived, its type draw;
2. assignment of the arrival to a nurse, scored on the pre-arrival state;
3. holding-cost snapshot of the needy counts (post-arrival, pre-service);
4. service selection for every idle nurse (non-preemptive: an in-progress
   service continues and blocks a new selection);
5. period end: the served patient completes with prob beta (to content
   with one fewer stage, or discharge at stage 1), then every content
   patient, including one that just completed, draws its return coin
   (prob gamma); returners are eligible for selection from t+1;
6. the period counter advances.

The same code path drives single traced steps and full fast replications.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Tuple

from .model import (
    _GOLD,
    _K2,
    _M64,
    _Patient,
    _mix64,
    PolicySpec,
    RandomStreams,
    RunStats,
    SystemParams,
    SystemState,
    make_run_stats,
)
from .policies import assign, select_service

__all__ = ["PeriodTrace", "step", "run_replication"]


@dataclass
class PeriodTrace:
    """Observable events of one period; nurse indices are 1-based, with 0
    meaning "no arrival" (assignment) or "idle" (service choice)."""

    t: int
    arrival: Optional[int]                       # arriving patient's type, if any
    assignment: int                              # 0 or 1..I
    service_choice: Tuple[int, ...]              # per nurse: 0 or stage served
    completions: List[Tuple[int, int, bool]] = field(default_factory=list)
    returns: List[Tuple[int, int]] = field(default_factory=list)
    needy_snapshot: Tuple[int, ...] = ()         # per-stage totals at costing time


@lru_cache(maxsize=64)
def _theta_cum(theta: tuple) -> tuple:
    acc, out = 0.0, []
    for x in theta:
        acc += x
        out.append(acc)
    out[-1] = 1.0  # guard the last bin against float round-off
    return tuple(out)


def step(state: SystemState, params: SystemParams, policy: PolicySpec,
         streams: RandomStreams) -> PeriodTrace:
    """Advance ``state`` by one period and report what happened."""
    if state.t > params.T:
        raise ValueError(f"period {state.t} exceeds horizon T={params.T}")
    return _advance(state, params, policy, streams, 1, record=True)


def run_replication(params: SystemParams, policy: PolicySpec, seed: int,
                    replication: int = 0,
                    check_conservation: bool = False) -> RunStats:
    """Simulate one replication from an empty system and accumulate
    post-warm-up statistics.

    Identical (seed, replication, params, policy) give bit-identical
    results. ``check_conservation`` verifies the full set of state
    invariants after every period instead of only at the end.
    """
    streams = RandomStreams(seed, replication)
    state = SystemState.empty(params)
    stage_sums = [0] * params.R
    _advance(
        state, params, policy, streams, params.T,
        ua=streams.period_uniforms("arrival_occurrence", params.T),
        ut=streams.period_uniforms("arrival_type", params.T),
        utb=streams.period_uniforms("tie_break", params.T),
        stage_sums=stage_sums,
        check=check_conservation,
    )
    state.check_invariants()
    return make_run_stats(
        stage_sums, params.T - params.warmup, params.a,
        state.admissions, state.discharges, state.arrival_hash,
        seed, replication,
    )


def _advance(state, params, policy, streams, n_periods,
             ua=None, ut=None, utb=None, stage_sums=None,
             record=False, check=False):
    """Run ``n_periods`` periods. With ``record`` (single period only) a
    :class:`PeriodTrace` is returned; otherwise the loop stays lean and
    returns None. ``ua``/``ut``/``utb`` are optional precomputed per-period
    uniform arrays indexed by t-1; without them the keyed scalar draws are
    used, which produce the same values."""
    alpha, beta, gamma = params.alpha, params.beta, params.gamma
    I, R, warmup = params.I, params.R, params.warmup
    cum = _theta_cum(params.theta)
    priority, assignment = policy.priority, policy.assignment
    queues, content_lists = state._queues, state._content
    needy, content, tot_needy = state.needy, state.content, state.tot_needy
    in_service = state.in_service
    u_service, u_content = streams.u_service, streams.u_content
    trace = None

    for _ in range(n_periods):
        t = state.t

        # (1)-(2) arrival and assignment
        u = ua[t - 1] if ua is not None else streams.u_arrival(t)
        ztype = 0
        nurse_1b = 0
        if u < alpha:
            uz = ut[t - 1] if ut is not None else streams.u_type(t)
            ztype = 1
            for c in cum:
                if uz < c:
                    break
                ztype += 1
            if I == 1:
                i = 0
            else:
                utie = utb[t - 1] if utb is not None else streams.u_tie_break(t)
                i = assign(state, params, assignment, utie)
            nurse_1b = i + 1
            p = _Patient(t, ztype)
            queues[i][ztype - 1].append(p)
            needy[i][ztype - 1] += 1
            tot_needy[ztype - 1] += 1
            state._in_system += 1
            state.admissions += 1
            state.arrival_hash = _mix64(
                (state.arrival_hash + t * _GOLD + ztype * _K2) & _M64)

        # (3) holding-cost snapshot: post-arrival, pre-service
        if stage_sums is not None and t > warmup:
            for r in range(R):
                stage_sums[r] += tot_needy[r]

        # (4) service selection for idle nurses
        for i in range(I):
            if in_service[i] is None:
                r = select_service(needy[i], priority)
                if r:
                    in_service[i] = queues[i][r - 1][0]

        if record:
            trace = PeriodTrace(
                t=t,
                arrival=ztype if ztype else None,
                assignment=nurse_1b,
                service_choice=tuple(
                    0 if in_service[i] is None else in_service[i].stage
                    for i in range(I)),
                needy_snapshot=tuple(tot_needy),
            )

        # (5a) completion coins for patients in service
        for i in range(I):
            p = in_service[i]
            if p is None:
                continue
            u = u_service(p.pid, p.stage, p.attempt)
            p.attempt += 1
            if u < beta:
                r0 = p.stage
                queues[i][r0 - 1].popleft()
                needy[i][r0 - 1] -= 1
                tot_needy[r0 - 1] -= 1
                in_service[i] = None
                if r0 == 1:
                    state.discharges += 1
                    state._in_system -= 1
                else:
                    p.stage = r0 - 1
                    p.attempt = 0
                    content_lists[i].append(p)
                    content[i][r0 - 2] += 1
                if record:
                    trace.completions.append((i + 1, r0, r0 == 1))

        # (5b) content return coins; newly content patients join this round
        for i in range(I):
            lst = content_lists[i]
            if not lst:
                continue
            keep = []
            for p in lst:
                u = u_content(p.pid, p.stage, p.attempt)
                p.attempt += 1
                if u < gamma:
                    r = p.stage
                    p.attempt = 0
                    queues[i][r - 1].append(p)
                    needy[i][r - 1] += 1
                    tot_needy[r - 1] += 1
                    content[i][r - 1] -= 1
                    if record:
                        trace.returns.append((i + 1, r))
                else:
                    keep.append(p)
            content_lists[i] = keep

        state.t = t + 1
        if check:
            state.check_invariants()

    return trace
