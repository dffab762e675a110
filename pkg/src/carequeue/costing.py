"""Holding-cost function, per-period accounting, and the replication-level
objective (mean accumulated cost with its standard error)."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Tuple

from .model import PolicySpec, RunStats, SystemParams, SystemState

__all__ = ["holding_cost", "period_cost", "estimate_J", "run_many", "mean_se"]


def holding_cost(r: int, a: float) -> float:
    """Per-period cost of one needy patient with ``r`` stages left: r**a.

    Content patients incur no holding cost; with a=0 every needy patient
    costs 1 regardless of stage.
    """
    if r < 1:
        raise ValueError(f"stage count must be >= 1, got {r!r}")
    if a < 0:
        raise ValueError(f"cost exponent must be >= 0, got {a!r}")
    return float(r) ** a


def period_cost(state: SystemState, a: float) -> float:
    """Holding cost of the current needy population (all nurses)."""
    return math.fsum(
        (r + 1) ** a * n for r, n in enumerate(state.tot_needy) if n)


def _replication_task(args) -> RunStats:
    params, policy, seed, rep = args
    from .dynamics import run_replication
    return run_replication(params, policy, seed, rep)


def run_many(params: SystemParams, policy: PolicySpec, n_reps: int,
             base_seed: int, workers: int = 1) -> List[RunStats]:
    """Independent replications k = 0..n_reps-1 with seeds base_seed + k.

    Results come back in replication order regardless of ``workers``, so
    downstream aggregation never depends on scheduling.
    """
    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")
    tasks = [(params, policy, base_seed + k, k) for k in range(n_reps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_replication_task, tasks))
    return [_replication_task(t) for t in tasks]


def mean_se(values) -> Tuple[float, float]:
    """Sample mean and standard error; the SE is NaN for a single value."""
    vals = list(values)
    n = len(vals)
    m = math.fsum(vals) / n
    if n < 2:
        return m, float("nan")
    var = math.fsum((v - m) ** 2 for v in vals) / (n - 1)
    return m, math.sqrt(var / n)


def estimate_J(params: SystemParams, policy: PolicySpec, n_reps: int,
               base_seed: int, workers: int = 1) -> Tuple[float, float]:
    """Mean and standard error of the accumulated holding cost over
    ``n_reps`` replications seeded base_seed + k."""
    stats = run_many(params, policy, n_reps, base_seed, workers=workers)
    return mean_se(s.total_cost for s in stats)
