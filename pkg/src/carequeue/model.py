"""Core domain types: model parameters, system state, policies, random streams.

The model is a discrete-time queueing system with reentrance: patients of
type r need r nurse visits ("stages"); between visits they rest in a
"content" state and return to the "needy" queue with a per-period
probability. Everything downstream (dynamics, policies, costing,
experiments) builds on the types defined here.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "SystemParams",
    "PolicySpec",
    "RandomStreams",
    "SystemState",
    "RunStats",
    "validate_params",
    "stability_ratio",
    "PRIORITY_RULES",
    "ASSIGNMENT_RULES",
]

PRIORITY_RULES = ("shortest_first", "longest_first")
ASSIGNMENT_RULES = ("h1", "h2", "random")


# --------------------------------------------------------------------------
# Parameters
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SystemParams:
    """All model constants for one simulated system.

    ``theta`` is renormalized to sum to one on construction (the raw vector
    may be given up to scale, e.g. a truncated geometric profile). Pass
    ``renormalize_theta=False`` to require an exact probability vector
    instead.

    Construction never fails on an unstable load; ``is_stable`` flags it.
    """

    alpha: float          # arrival probability per period
    beta: float           # service completion probability per period
    gamma: float          # content -> needy probability per period
    theta: tuple          # arrival type distribution over 1..R
    R: int                # maximum number of service stages
    I: int                # number of nurses
    T: int = 10_000       # horizon in periods
    warmup: int = 2_000   # periods excluded from statistics
    a: float = 0.0        # holding-cost exponent, h(r) = r**a
    renormalize_theta: bool = True

    def __post_init__(self):
        if not isinstance(self.R, int) or self.R < 1:
            raise ValueError(f"R must be an integer >= 1, got {self.R!r}")
        if not isinstance(self.I, int) or self.I < 1:
            raise ValueError(f"I must be an integer >= 1, got {self.I!r}")
        if not isinstance(self.T, int) or self.T < 1:
            raise ValueError(f"T must be an integer >= 1, got {self.T!r}")
        if not isinstance(self.warmup, int) or not 0 <= self.warmup < self.T:
            raise ValueError(
                f"warmup must be an integer in [0, T), got {self.warmup!r} with T={self.T}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha!r}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must be in (0, 1], got {self.beta!r}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma!r}")
        if not self.a >= 0.0:
            raise ValueError(f"cost exponent a must be >= 0, got {self.a!r}")

        raw = tuple(float(x) for x in self.theta)
        if len(raw) != self.R:
            raise ValueError(f"theta must have length R={self.R}, got {len(raw)}")
        if any(x < 0.0 for x in raw):
            raise ValueError("theta entries must be nonnegative")
        total = math.fsum(raw)
        if total <= 0.0:
            raise ValueError("theta must have at least one positive entry")
        if self.renormalize_theta:
            norm = tuple(x / total for x in raw)
        else:
            if abs(total - 1.0) > 1e-9:
                raise ValueError(
                    f"theta sums to {total!r}; pass renormalize_theta=True to rescale")
            norm = raw
        object.__setattr__(self, "theta", norm)

    @property
    def expected_visits(self) -> float:
        """Mean number of nurse visits per admitted patient."""
        return math.fsum((r + 1) * th for r, th in enumerate(self.theta))

    @property
    def stability_ratio(self) -> float:
        return self.alpha * self.expected_visits / (self.beta * self.I)

    @property
    def is_stable(self) -> bool:
        return self.stability_ratio < 1.0


def validate_params(
    alpha: float,
    beta: float,
    gamma: float,
    theta: Sequence[float],
    R: Optional[int] = None,
    I: int = 1,
    T: int = 10_000,
    warmup: int = 2_000,
    a: float = 0.0,
    renormalize_theta: bool = True,
) -> SystemParams:
    """Validate raw inputs and build a :class:`SystemParams`.

    ``R`` defaults to ``len(theta)``. Raises ``ValueError`` on any
    malformed input; an unstable load is accepted and merely flagged.
    """
    theta = tuple(theta)
    if R is None:
        R = len(theta)
    return SystemParams(
        alpha=alpha, beta=beta, gamma=gamma, theta=theta, R=R, I=I,
        T=T, warmup=warmup, a=a, renormalize_theta=renormalize_theta,
    )


def stability_ratio(params: SystemParams) -> float:
    """Offered load: arrival rate of visits over total service capacity.

    Values below one mean the inflow of nurse visits is less than the
    nurses' aggregate completion rate.
    """
    return params.stability_ratio


# --------------------------------------------------------------------------
# Policies
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PolicySpec:
    """Which priority discipline each nurse runs and how arrivals are routed."""

    priority: str = "shortest_first"
    assignment: str = "random"

    def __post_init__(self):
        if self.priority not in PRIORITY_RULES:
            raise ValueError(f"priority must be one of {PRIORITY_RULES}, got {self.priority!r}")
        if self.assignment not in ASSIGNMENT_RULES:
            raise ValueError(
                f"assignment must be one of {ASSIGNMENT_RULES}, got {self.assignment!r}")


# --------------------------------------------------------------------------
# Keyed random streams
# --------------------------------------------------------------------------

_M64 = (1 << 64) - 1
_GOLD = 0x9E3779B97F4A7C15
_K2 = 0xC2B2AE3D27D4EB4F
_K3 = 0x165667B19E3779F9
_INV53 = 1.1102230246251565e-16  # 2**-53

# Substream salts; each named stream hashes keys independently.
_SALTS = {
    "arrival_occurrence": 0x243F6A8885A308D3,
    "arrival_type": 0x13198A2E03707344,
    "service_completion": 0xA4093822299F31D0,
    "content_transition": 0x082EFA98EC4E6C89,
    "tie_break": 0x452821E638D01377,
}


def _mix64(z: int) -> int:
    z &= _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


class RandomStreams:
    """Counter-based uniform draws, keyed rather than sequential.

    Every draw is a pure function of (master seed, replication, substream,
    key tuple), so the same entity sees the same randomness no matter when
    or whether other draws happen. This is what makes policy comparisons
    paired: patient-level draws are keyed by (patient id, stage, attempt)
    and patient ids are arrival periods, both of which are policy-invariant.
    """

    __slots__ = ("master_seed", "replication", "_bases")

    def __init__(self, master_seed: int, replication: int = 0):
        self.master_seed = int(master_seed)
        self.replication = int(replication)
        root = _mix64(self.master_seed ^ _GOLD)
        root = _mix64(root ^ ((self.replication * _K2) & _M64))
        self._bases = {
            name: _mix64(root ^ salt) for name, salt in _SALTS.items()
        }

    def _u01(self, base: int, k1: int, k2: int = 0, k3: int = 0) -> float:
        h = _mix64(base ^ ((k1 * _GOLD) & _M64))
        h = _mix64(h ^ ((k2 * _K2) & _M64))
        h = _mix64(h ^ ((k3 * _K3) & _M64))
        return (h >> 11) * _INV53

    # -- per-period streams -------------------------------------------------

    def u_arrival(self, t: int) -> float:
        return self._u01(self._bases["arrival_occurrence"], t)

    def u_type(self, t: int) -> float:
        return self._u01(self._bases["arrival_type"], t)

    def u_tie_break(self, t: int) -> float:
        return self._u01(self._bases["tie_break"], t)

    # -- per-patient streams ------------------------------------------------

    def u_service(self, patient_id: int, stage: int, attempt: int) -> float:
        return self._u01(self._bases["service_completion"], patient_id, stage, attempt)

    def u_content(self, patient_id: int, stage: int, attempt: int) -> float:
        return self._u01(self._bases["content_transition"], patient_id, stage, attempt)

    # -- vectorized per-period arrays (bit-identical to the scalar path) ----

    def period_uniforms(self, stream: str, T: int) -> np.ndarray:
        """Uniforms for t = 1..T of a per-period stream, index [t-1]."""
        base = np.uint64(self._bases[stream])
        t = np.arange(1, T + 1, dtype=np.uint64)
        h = _vmix(base ^ (t * np.uint64(_GOLD)))
        h = _vmix(h)  # k2 = 0
        h = _vmix(h)  # k3 = 0
        return (h >> np.uint64(11)).astype(np.float64) * _INV53


def _vmix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


# --------------------------------------------------------------------------
# System state
# --------------------------------------------------------------------------

class _Patient:
    """One admitted patient; ``pid`` is the arrival period (unique, at most
    one arrival per period), ``stage`` the remaining visits, ``attempt`` the
    number of keyed draws consumed in the current state visit."""

    __slots__ = ("pid", "stage", "attempt")

    def __init__(self, pid: int, stage: int):
        self.pid = pid
        self.stage = stage
        self.attempt = 0

    def __repr__(self):
        return f"_Patient(pid={self.pid}, stage={self.stage})"


class SystemState:
    """Mutable state of one replication.

    ``needy[i][r-1]`` counts needy patients with r stages left at nurse i,
    including the patient currently in service; ``content[i][r-1]`` counts
    content patients (r at most R-1, since a new arrival is served once
    before it can rest). Confine each instance to a single thread.
    """

    __slots__ = (
        "t", "R", "I", "needy", "content", "tot_needy", "in_service",
        "admissions", "discharges", "arrival_hash",
        "_queues", "_content", "_in_system",
    )

    def __init__(self, I: int, R: int):
        self.t = 1
        self.R = R
        self.I = I
        self.needy = [[0] * R for _ in range(I)]
        self.content = [[0] * (R - 1) for _ in range(I)]
        self.tot_needy = [0] * R
        self.in_service: list = [None] * I   # _Patient or None, per nurse
        self.admissions = 0
        self.discharges = 0
        self.arrival_hash = 0   # folds (period, type) of every admission
        self._queues = [[deque() for _ in range(R)] for _ in range(I)]
        self._content = [[] for _ in range(I)]
        self._in_system = 0

    @classmethod
    def empty(cls, params: SystemParams) -> "SystemState":
        return cls(params.I, params.R)

    @property
    def in_system(self) -> int:
        return self._in_system

    def served_patient(self, nurse: int) -> Optional[tuple]:
        """(stages left, patient id) of the in-service patient, if any."""
        p = self.in_service[nurse]
        return None if p is None else (p.stage, p.pid)

    def total_needy(self) -> int:
        return sum(self.tot_needy)

    def check_invariants(self) -> None:
        """Raise AssertionError if counts, queues and conservation disagree."""
        for i in range(self.I):
            for r in range(self.R):
                n = len(self._queues[i][r])
                assert n == self.needy[i][r] >= 0, (
                    f"needy count mismatch at nurse {i} stage {r + 1}")
                for p in self._queues[i][r]:
                    assert p.stage == r + 1
            ccounts = [0] * (self.R - 1)
            for p in self._content[i]:
                assert 1 <= p.stage <= self.R - 1
                ccounts[p.stage - 1] += 1
            assert ccounts == self.content[i], f"content count mismatch at nurse {i}"
            p = self.in_service[i]
            if p is not None:
                assert self._queues[i][p.stage - 1][0] is p, (
                    "in-service patient must head its stage queue")
        for r in range(self.R):
            assert self.tot_needy[r] == sum(self.needy[i][r] for i in range(self.I))
        in_system = sum(self.tot_needy) + sum(sum(row) for row in self.content)
        assert in_system == self._in_system
        assert self.admissions == self.discharges + in_system, (
            f"conservation broken at t={self.t}: {self.admissions} admitted, "
            f"{self.discharges} discharged, {in_system} in system")


# --------------------------------------------------------------------------
# Replication statistics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RunStats:
    """Post-warm-up accumulation for one replication.

    ``per_stage_periodsum[r-1]`` is the sum over counted periods of the
    needy count at stage r (all nurses), so the holding cost for any
    exponent can be recovered after the fact via :meth:`cost_at`.
    """

    per_stage_periodsum: tuple
    periods_counted: int
    total_cost: float
    avg_queue_all: float
    avg_queue_hi: float
    admissions: int
    discharges: int
    arrival_hash: int
    seed: int
    replication: int = 0

    def cost_at(self, a: float) -> float:
        """Accumulated holding cost had the exponent been ``a`` (same path)."""
        return math.fsum(
            (r + 1) ** a * s for r, s in enumerate(self.per_stage_periodsum))

    @property
    def avg_per_stage(self) -> tuple:
        return tuple(s / self.periods_counted for s in self.per_stage_periodsum)


def make_run_stats(
    per_stage_periodsum: Sequence[int],
    periods_counted: int,
    a: float,
    admissions: int,
    discharges: int,
    arrival_hash: int,
    seed: int,
    replication: int = 0,
) -> RunStats:
    per_stage = tuple(per_stage_periodsum)
    R = len(per_stage)
    hi = [r for r in (R - 1, R) if r >= 1]
    total_all = sum(per_stage)
    total_hi = sum(per_stage[r - 1] for r in hi)
    return RunStats(
        per_stage_periodsum=per_stage,
        periods_counted=periods_counted,
        total_cost=math.fsum((r + 1) ** a * s for r, s in enumerate(per_stage)),
        avg_queue_all=total_all / periods_counted,
        avg_queue_hi=total_hi / periods_counted,
        admissions=admissions,
        discharges=discharges,
        arrival_hash=arrival_hash,
        seed=seed,
        replication=replication,
    )
