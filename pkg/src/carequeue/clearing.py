"""Exact two-patient clearing system.

Two patients start needy at time zero, patient 1 of type ``i`` and
patient 2 of type ``j >= i``; there are no further arrivals and service
and content durations are deterministic, shared between the patients at
equal visit index. System 1 always serves patient 1 when both are needy
(shortest-first); system 2 always serves patient 2 (longest-first). The
simulation records every needy/content departure time, every wait, and the
per-period needy occupancy, from which holding costs at any exponent are
exact. Durations are in whole periods; times are end-of-period stamps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, List, Optional, Tuple

__all__ = [
    "ClearingInstance",
    "ClearingResult",
    "OrderingReport",
    "SweepReport",
    "simulate_clearing",
    "check_departure_ordering",
    "clearing_costs",
    "clearing_threshold",
    "iter_instances",
    "sweep_small_instances",
]


@dataclass(frozen=True)
class ClearingInstance:
    """Two-patient inputs: types i <= j and the shared per-visit durations.

    ``s_ns[l-1]`` is the needy (service) duration of visit l, ``s_cs[l-1]``
    the content duration after visit l; both patients use the same entry at
    equal visit index, which is the equal-service-time assumption.
    """

    i: int
    j: int
    s_ns: Tuple[int, ...]
    s_cs: Tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.i <= self.j:
            raise ValueError(f"need 1 <= i <= j, got i={self.i}, j={self.j}")
        object.__setattr__(self, "s_ns", tuple(int(x) for x in self.s_ns))
        object.__setattr__(self, "s_cs", tuple(int(x) for x in self.s_cs))
        if len(self.s_ns) != self.j:
            raise ValueError(f"s_ns must have length j={self.j}")
        if len(self.s_cs) != self.j - 1:
            raise ValueError(f"s_cs must have length j-1={self.j - 1}")
        if any(x < 1 for x in self.s_ns) or any(x < 1 for x in self.s_cs):
            raise ValueError("durations must be whole periods >= 1")

    @classmethod
    def unit(cls, i: int, j: int) -> "ClearingInstance":
        """All service and content durations equal to one period."""
        return cls(i, j, (1,) * j, (1,) * max(j - 1, 0))


class ClearingResult:
    """Departure times, waits, and needy occupancy for both systems."""

    __slots__ = ("instance", "_d_ns", "_d_cs", "_w", "_occ")

    def __init__(self, instance, d_ns, d_cs, w, occ):
        self.instance = instance
        self._d_ns = d_ns    # [m-1][p-1][l-1] -> end-of-period time
        self._d_cs = d_cs
        self._w = w          # [m-1][p-1][l-1] -> whole periods waited
        self._occ = occ      # [m-1][stage] -> patient-periods spent needy

    def departure(self, m: int, p: int, state: str, l: int) -> int:
        """Time patient ``p`` leaves the needy ('ns') or content ('cs')
        state for the l-th time in system ``m``."""
        table = {"ns": self._d_ns, "cs": self._d_cs}[state]
        return table[m - 1][p - 1][l - 1]

    def waiting(self, m: int, p: int, l: int) -> int:
        """Periods spent queued (service excluded) before visit ``l``."""
        return self._w[m - 1][p - 1][l - 1]

    def occupancy(self, m: int) -> Tuple[int, ...]:
        """occupancy(m)[s] = needy patient-periods at s stages remaining."""
        return tuple(self._occ[m - 1])

    def cost(self, m: int, a: float) -> float:
        """Accumulated per-period holding cost of system ``m``."""
        occ = self._occ[m - 1]
        pw = _stage_powers(len(occ) - 1, a)
        return math.fsum(occ[s] * pw[s] for s in range(1, len(occ)) if occ[s])

    def costs(self, a: float) -> Tuple[float, float]:
        return self.cost(1, a), self.cost(2, a)

    def waiting_form_diff(self, a: float) -> float:
        """cost(2, a) - cost(1, a) written purely in waiting times, as the
        service-time terms shared by the two systems cancel."""
        i, j = self.instance.i, self.instance.j
        w1, w2 = self._w[0], self._w[1]
        pw = _stage_powers(j, a)
        total = 0.0
        for l in range(1, i + 1):
            total += pw[i - l + 1] * (w2[0][l - 1] - w1[0][l - 1])
        for l in range(1, j + 1):
            total += pw[j - l + 1] * (w2[1][l - 1] - w1[1][l - 1])
        return total


@lru_cache(maxsize=512)
def _stage_powers(max_stage: int, a: float) -> Tuple[float, ...]:
    return tuple(float(s) ** a for s in range(max_stage + 1))


def _run_system(i: int, j: int, s_ns, s_cs, first: int):
    """Deterministically clear one system; ``first`` (0 or 1) is the patient
    with service priority. Returns per-patient departure lists,
    content-departure lists, waits, and the needy occupancy by stage.

    Selection convention: the priority patient is taken whenever it is
    already waiting, but when both patients return to the queue at the very
    same epoch the other patient is admitted first. Under this convention
    the two systems are exact mirrors of each other until the shorter
    patient discharges, which is what makes the waiting-time swap
    symmetries hold exactly.
    """
    types = (i, j)
    d_ns = ([0] * i, [0] * j)
    d_cs = ([0] * max(i - 1, 0), [0] * max(j - 1, 0))
    w = ([0] * i, [0] * j)
    occ = [0] * (j + 1)

    NEEDY, CONTENT, DONE = 0, 2, 3
    mode = [NEEDY, NEEDY]
    visit = [1, 1]
    entry = [0, 0]          # time the current needy visit began
    content_exit = [0, 0]
    owner = -1
    svc_rem = 0
    order = (first, 1 - first)
    horizon = 4 * (sum(s_ns) + sum(s_cs)) + 8

    t = 0
    while mode[0] != DONE or mode[1] != DONE:
        t += 1
        if t > horizon:
            raise RuntimeError("clearing system failed to empty")

        if owner < 0:
            if mode[0] == NEEDY and mode[1] == NEEDY:
                if entry[0] == entry[1] and entry[0] > 0:
                    owner = order[1]     # simultaneous return: yield the slot
                else:
                    owner = order[0]
            else:
                for p in order:
                    if mode[p] == NEEDY:
                        owner = p
                        break
            if owner >= 0:
                w[owner][visit[owner] - 1] = (t - 1) - entry[owner]
                svc_rem = s_ns[visit[owner] - 1]

        for p in (0, 1):
            if mode[p] == NEEDY:
                occ[types[p] - visit[p] + 1] += 1

        if owner >= 0:
            svc_rem -= 1
            if svc_rem == 0:
                p, l = owner, visit[owner]
                d_ns[p][l - 1] = t
                if l == types[p]:
                    mode[p] = DONE
                else:
                    mode[p] = CONTENT
                    content_exit[p] = t + s_cs[l - 1]
                owner = -1

        for p in (0, 1):
            if mode[p] == CONTENT and content_exit[p] == t:
                d_cs[p][visit[p] - 1] = t
                entry[p] = t
                visit[p] += 1
                mode[p] = NEEDY

    return d_ns, d_cs, w, occ


def simulate_clearing(inst: ClearingInstance) -> ClearingResult:
    """Run both systems to empty and collect departures, waits and costs."""
    r1 = _run_system(inst.i, inst.j, inst.s_ns, inst.s_cs, first=0)
    r2 = _run_system(inst.i, inst.j, inst.s_ns, inst.s_cs, first=1)
    return ClearingResult(
        inst,
        d_ns=(r1[0], r2[0]),
        d_cs=(r1[1], r2[1]),
        w=(r1[2], r2[2]),
        occ=(r1[3], r2[3]),
    )


@dataclass(frozen=True)
class OrderingReport:
    """Departure-time orderings between the two systems, and the step
    orderings inside system 1 that the cross-system chains build on."""

    instance: ClearingInstance
    d_1_1: int   # patient 1 final needy departure in system 1
    d_2_1: int   # patient 1 final needy departure in system 2
    d_2_2: int   # patient 2 final needy departure in system 2
    d_1_2: int   # patient 2 final needy departure in system 1
    chain_patient1: bool   # d_1_1 <= d_2_1 <= d_1_2
    chain_patient2: bool   # d_1_1 <= d_2_2 <= d_1_2
    within_system1_ns: bool
    within_system1_cs: bool

    @property
    def passed(self) -> bool:
        return (self.chain_patient1 and self.chain_patient2
                and self.within_system1_ns and self.within_system1_cs)


def check_departure_ordering(
        inst: ClearingInstance,
        result: Optional[ClearingResult] = None) -> OrderingReport:
    """Evaluate the departure-ordering chains on one instance.

    The shorter patient leaves soonest under shortest-first, latest-patient
    departure is worst under shortest-first, and the longest-first system's
    departures sit in between; within system 1 the shorter patient exits
    each needy and content visit no later than the longer one.
    """
    res = result or simulate_clearing(inst)
    i, j = inst.i, inst.j
    d11 = res.departure(1, 1, "ns", i)
    d21 = res.departure(2, 1, "ns", i)
    d22 = res.departure(2, 2, "ns", j)
    d12 = res.departure(1, 2, "ns", j)
    within_ns = all(
        res.departure(1, 1, "ns", l) <= res.departure(1, 2, "ns", l)
        for l in range(1, i + 1))
    within_cs = all(
        res.departure(1, 1, "cs", l) <= res.departure(1, 2, "cs", l)
        for l in range(1, i))
    return OrderingReport(
        instance=inst,
        d_1_1=d11, d_2_1=d21, d_2_2=d22, d_1_2=d12,
        chain_patient1=d11 <= d21 <= d12,
        chain_patient2=d11 <= d22 <= d12,
        within_system1_ns=within_ns,
        within_system1_cs=within_cs,
    )


def clearing_costs(inst: ClearingInstance, a: float,
                   result: Optional[ClearingResult] = None
                   ) -> Tuple[float, float]:
    """Holding costs (c1, c2) of the two systems at exponent ``a``.

    Also cross-checks the per-period accounting against the waiting-time
    form of the cost difference; a mismatch means the simulation and the
    waiting-time bookkeeping disagree and raises immediately.
    """
    res = result or simulate_clearing(inst)
    c1, c2 = res.costs(a)
    wdiff = res.waiting_form_diff(a)
    if abs((c2 - c1) - wdiff) > 1e-9 * max(1.0, abs(c1), abs(c2)):
        raise ArithmeticError(
            f"per-period cost difference {c2 - c1!r} disagrees with the "
            f"waiting-time form {wdiff!r} on {inst}")
    return c1, c2


def clearing_threshold(inst: ClearingInstance, tolerance: float = 1e-6) -> float:
    """Exponent where the two systems' costs cross, located by bisection.

    Returns 0.0 when the types are equal (the systems coincide) or when
    system 2 is already no worse at a=0, and 1.0 when system 2 is still no
    better at a=1.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    if inst.i == inst.j:
        return 0.0
    res = simulate_clearing(inst)

    def gap(a: float) -> float:
        c1, c2 = res.costs(a)
        return c2 - c1

    if gap(0.0) <= 0:
        return 0.0
    if gap(1.0) >= 0:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        g = gap(mid)
        if g > 0:
            lo = mid
        elif g < 0:
            hi = mid
        else:
            return mid
    return 0.5 * (lo + hi)


# --------------------------------------------------------------------------
# Exhaustive small-instance sweep
# --------------------------------------------------------------------------

@dataclass
class SweepReport:
    instances: int
    failures: List[str]

    @property
    def passed(self) -> bool:
        return not self.failures


def iter_instances(max_type: int = 8,
                   duration_values: Tuple[int, ...] = (1, 2)
                   ) -> Iterable[ClearingInstance]:
    """Every instance with 1 <= i <= j <= max_type and every per-visit
    duration profile drawn from ``duration_values``."""
    for j in range(1, max_type + 1):
        for profile in product(duration_values, repeat=2 * j - 1):
            s_ns = profile[:j]
            s_cs = profile[j:]
            for i in range(1, j + 1):
                yield ClearingInstance(i, j, s_ns, s_cs)


def sweep_small_instances(max_type: int = 8,
                          duration_values: Tuple[int, ...] = (1, 2),
                          a_grid: Tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0),
                          max_failures: int = 20) -> SweepReport:
    """Check every small instance exhaustively:

    - both cross-system departure chains and the within-system orderings;
    - departures strictly increase per visit, waits are nonnegative;
    - swapping the served-first patient swaps the wait sequences;
    - the longer patient never waits after the shorter one is gone (sys 1);
    - cost difference signs at a=0 and a=1, with the a=0 difference equal
      to the longer patient's late waits in system 2, all in exact ints;
    - the per-period and waiting-time cost differences agree on ``a_grid``;
    - both systems' costs are nondecreasing and convex along ``a_grid``.

    Any violation is recorded (up to ``max_failures``) and fails the report.
    """
    failures: List[str] = []
    count = 0

    def record(inst, msg):
        if len(failures) < max_failures:
            failures.append(f"{inst.i},{inst.j},ns={inst.s_ns},cs={inst.s_cs}: {msg}")

    for inst in iter_instances(max_type, duration_values):
        count += 1
        res = simulate_clearing(inst)
        i, j = inst.i, inst.j
        rep = check_departure_ordering(inst, res)
        if not rep.passed:
            record(inst, "departure ordering violated")

        w = res._w
        for m in (1, 2):
            for p, tp in ((1, i), (2, j)):
                prev_ns = 0
                for l in range(1, tp + 1):
                    d = res.departure(m, p, "ns", l)
                    if d <= prev_ns:
                        record(inst, f"D not increasing at m={m} p={p} l={l}")
                    prev_ns = d
                    if res.waiting(m, p, l) < 0:
                        record(inst, f"negative wait at m={m} p={p} l={l}")

        for l in range(1, i + 1):
            if w[0][0][l - 1] != w[1][1][l - 1]:
                record(inst, f"wait swap (first-served) broken at l={l}")
            if w[0][1][l - 1] != w[1][0][l - 1]:
                record(inst, f"wait swap (second-served) broken at l={l}")
        for l in range(i + 1, j + 1):
            if w[0][1][l - 1] != 0:
                record(inst, f"late wait of patient 2 in system 1 at l={l}")

        c1_0, c2_0 = res.costs(0.0)
        c1_1, c2_1 = res.costs(1.0)
        late_waits = sum(w[1][1][l - 1] for l in range(i + 1, j + 1))
        if c2_0 - c1_0 < 0:
            record(inst, f"cost difference negative at a=0: {c2_0 - c1_0}")
        if c2_1 - c1_1 > 0:
            record(inst, f"cost difference positive at a=1: {c2_1 - c1_1}")
        if c2_0 - c1_0 != late_waits:
            record(inst, "a=0 difference != late waits of patient 2 in system 2")

        curve1, curve2 = [], []
        for a in a_grid:
            c1a, c2a = clearing_costs(inst, a, result=res)
            curve1.append(c1a)
            curve2.append(c2a)
        for m, curve in ((1, curve1), (2, curve2)):
            diffs = [curve[k + 1] - curve[k] for k in range(len(curve) - 1)]
            if any(d < -1e-12 for d in diffs):
                record(inst, f"cost decreasing in a (system {m})")
            if any(diffs[k + 1] - diffs[k] < -1e-12 for k in range(len(diffs) - 1)):
                record(inst, f"cost concave in a (system {m})")

    return SweepReport(instances=count, failures=failures)
