"""Experiment harness: threshold curve, parameter sweeps, tradeoff scatter.

All comparisons use common random numbers: compared policies run on the
same replication seeds and the engine's keyed draws guarantee identical
arrival streams, which every sweep verifies by fingerprint. A priority
rule's sample path does not depend on the cost exponent, so one batch of
replications yields the whole cost curve over an exponent grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .costing import mean_se, run_many
from .model import PolicySpec, RunStats, SystemParams

__all__ = [
    "SweepSpec",
    "SweepRow",
    "ThresholdPoint",
    "ThresholdResult",
    "TradeoffRow",
    "priority_threshold",
    "priority_sweep",
    "assignment_sweep",
    "tradeoff_curve",
    "locate_crossing",
]

Progress = Optional[Callable[[str], None]]


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: vary ``param`` over ``grid`` on top of ``base``."""

    param: str                 # 'a' | 'alpha' | 'beta' | 'gamma'
    grid: Tuple[float, ...]
    base: SystemParams
    n_reps: int = 20
    base_seed: int = 0

    def __post_init__(self):
        if self.param not in ("a", "alpha", "beta", "gamma"):
            raise ValueError(f"unknown sweep parameter {self.param!r}")
        if not self.grid:
            raise ValueError("sweep grid must be nonempty")
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        if self.n_reps < 2:
            raise ValueError("n_reps must be >= 2 for standard errors")
        for v in self.grid:
            replace(self.base, **{self.param: v})  # validates range

    def params_at(self, value: float) -> SystemParams:
        return replace(self.base, **{self.param: value})


@dataclass
class SweepRow:
    """Per-policy cost statistics at one grid value, plus improvements
    against the row's baseline policy (percent cost reduction)."""

    param: str
    value: float
    baseline: str
    stats: Dict[str, Tuple[float, float]]              # key -> (mean J, se)
    improvement_pct: Dict[str, Optional[float]]        # key -> % vs baseline
    diff_vs_baseline: Dict[str, Tuple[float, float]]   # key -> paired diff mean, se
    flagged: bool                                      # baseline cost is zero


@dataclass
class ThresholdPoint:
    a: float
    j_short: float
    se_short: float
    j_long: float
    se_long: float


@dataclass
class ThresholdResult:
    points: List[ThresholdPoint]
    a_hat: Optional[float]
    bracket: Optional[Tuple[float, float]]


@dataclass
class TradeoffRow:
    alpha: float
    beta: float
    gamma: float
    a: float
    rule_chosen: str
    avg_queue_all: float
    se_queue_all: float
    avg_queue_hi: float
    se_queue_hi: float


def _check_paired_arrivals(batches: Sequence[List[RunStats]]) -> None:
    """All compared policies must have consumed identical arrival streams."""
    first = batches[0]
    for other in batches[1:]:
        for s0, s1 in zip(first, other):
            if s0.arrival_hash != s1.arrival_hash:
                raise RuntimeError(
                    f"arrival streams diverged across policies at seed {s0.seed}")


def locate_crossing(grid: Sequence[float], diffs: Sequence[float]
                    ) -> Optional[Tuple[float, Tuple[float, float]]]:
    """First sign change of ``diffs`` along ``grid``, linearly interpolated.

    Returns (crossing, (grid_lo, grid_hi)), or None when the difference
    keeps one sign on the whole grid or the curves coincide everywhere. An
    exact zero on an otherwise nonzero difference counts as a crossing.
    """
    if not any(d != 0.0 for d in diffs):
        return None
    for k in range(len(grid)):
        if diffs[k] == 0.0:
            return grid[k], (grid[k], grid[k])
        if k + 1 < len(grid) and (diffs[k] < 0.0 < diffs[k + 1]
                                  or diffs[k] > 0.0 > diffs[k + 1]):
            frac = diffs[k] / (diffs[k] - diffs[k + 1])
            return grid[k] + frac * (grid[k + 1] - grid[k]), (grid[k], grid[k + 1])
    return None


def priority_threshold(params: SystemParams, a_grid: Sequence[float],
                       n_reps: int = 20, base_seed: int = 0,
                       workers: int = 1, progress: Progress = None
                       ) -> ThresholdResult:
    """Cost curves of shortest-first and longest-first over an exponent
    grid, and the interpolated exponent where they cross.

    Both policies run on the same seeds; since neither consults the
    exponent, each replication is simulated once and re-weighted per grid
    point.
    """
    batches = []
    for rule in ("shortest_first", "longest_first"):
        if progress:
            progress(f"threshold: running {n_reps} replications under {rule}")
        batches.append(run_many(params, PolicySpec(rule, "random"),
                                n_reps, base_seed, workers=workers))
    _check_paired_arrivals(batches)
    short, long_ = batches

    points = []
    diffs = []
    for a in a_grid:
        ms, ses = mean_se(s.cost_at(a) for s in short)
        ml, sel = mean_se(s.cost_at(a) for s in long_)
        points.append(ThresholdPoint(a, ms, ses, ml, sel))
        diffs.append(ms - ml)
    hit = locate_crossing(list(a_grid), diffs)
    if hit is None:
        return ThresholdResult(points, None, None)
    return ThresholdResult(points, hit[0], hit[1])


def _sweep(spec: SweepSpec, policies: Dict[str, PolicySpec], baseline: str,
           workers: int, progress: Progress) -> List[SweepRow]:
    rows = []
    for value in spec.grid:
        params = spec.params_at(value)
        if progress:
            progress(f"sweep {spec.param}={value:g}: "
                     f"{spec.n_reps} replications x {len(policies)} policies")
        batch = {
            key: run_many(params, pol, spec.n_reps, spec.base_seed, workers=workers)
            for key, pol in policies.items()
        }
        _check_paired_arrivals(list(batch.values()))
        stats = {key: mean_se(s.total_cost for s in b) for key, b in batch.items()}
        base_mean = stats[baseline][0]
        flagged = base_mean == 0.0
        improvement: Dict[str, Optional[float]] = {}
        diffs: Dict[str, Tuple[float, float]] = {}
        for key, b in batch.items():
            if key == baseline:
                improvement[key] = None
                diffs[key] = (0.0, 0.0)
                continue
            paired = [b0.total_cost - b1.total_cost
                      for b0, b1 in zip(batch[baseline], b)]
            diffs[key] = mean_se(paired)
            improvement[key] = (None if flagged
                                else 100.0 * (base_mean - stats[key][0]) / base_mean)
        rows.append(SweepRow(
            param=spec.param, value=value, baseline=baseline,
            stats=stats, improvement_pct=improvement,
            diff_vs_baseline=diffs, flagged=flagged,
        ))
    return rows


def priority_sweep(spec: SweepSpec, workers: int = 1,
                   progress: Progress = None) -> List[SweepRow]:
    """Shortest-first vs longest-first for a single nurse, improvement of
    shortest over longest per grid value. The base exponent must be 0 or 1
    (a constant or a linearly increasing holding cost)."""
    if spec.base.I != 1:
        raise ValueError("priority sweep compares disciplines at a single nurse")
    if spec.base.a not in (0.0, 1.0):
        raise ValueError("priority sweep expects the exponent fixed at 0 or 1")
    policies = {
        "shortest_first": PolicySpec("shortest_first", "random"),
        "longest_first": PolicySpec("longest_first", "random"),
    }
    return _sweep(spec, policies, baseline="longest_first",
                  workers=workers, progress=progress)


def assignment_sweep(spec: SweepSpec, workers: int = 1,
                     progress: Progress = None) -> List[SweepRow]:
    """h1 and h2 routing against the random baseline, several nurses.

    The priority discipline is paired with the exponent: shortest-first
    when a=0, longest-first when a=1 (each rule on its better side of the
    threshold).
    """
    if spec.base.I < 2:
        raise ValueError("assignment sweep needs at least two nurses")
    if spec.base.a not in (0.0, 1.0):
        raise ValueError("assignment sweep expects the exponent fixed at 0 or 1")
    rule = "shortest_first" if spec.base.a == 0.0 else "longest_first"
    policies = {
        "h1": PolicySpec(rule, "h1"),
        "h2": PolicySpec(rule, "h2"),
        "random": PolicySpec(rule, "random"),
    }
    return _sweep(spec, policies, baseline="random",
                  workers=workers, progress=progress)


def tradeoff_curve(base: SystemParams,
                   alpha_grid: Sequence[float],
                   beta_grid: Sequence[float],
                   gamma_grid: Sequence[float],
                   a_grid: Sequence[float],
                   n_reps: int = 20, base_seed: int = 0,
                   workers: int = 1, progress: Progress = None
                   ) -> List[TradeoffRow]:
    """Queue-length tradeoff across parameter sets and exponents.

    For every (alpha, beta, gamma) both priority rules are replicated once;
    for each exponent the cheaper rule is selected and its time-average
    queue lengths (all stages vs the two highest) are reported.
    """
    rows = []
    total = len(alpha_grid) * len(beta_grid) * len(gamma_grid)
    done = 0
    for alpha in alpha_grid:
        for beta in beta_grid:
            for gamma in gamma_grid:
                params = replace(base, alpha=float(alpha), beta=float(beta),
                                 gamma=float(gamma))
                done += 1
                if progress:
                    progress(f"tradeoff set {done}/{total}: "
                             f"alpha={alpha:g} beta={beta:g} gamma={gamma:g}")
                batches = {
                    rule: run_many(params, PolicySpec(rule, "random"),
                                   n_reps, base_seed, workers=workers)
                    for rule in ("shortest_first", "longest_first")
                }
                _check_paired_arrivals(list(batches.values()))
                for a in a_grid:
                    best_rule = min(
                        batches,
                        key=lambda r: math.fsum(s.cost_at(a) for s in batches[r]))
                    chosen = batches[best_rule]
                    q_all, se_all = mean_se(s.avg_queue_all for s in chosen)
                    q_hi, se_hi = mean_se(s.avg_queue_hi for s in chosen)
                    rows.append(TradeoffRow(
                        alpha=float(alpha), beta=float(beta), gamma=float(gamma),
                        a=float(a), rule_chosen=best_rule,
                        avg_queue_all=q_all, se_queue_all=se_all,
                        avg_queue_hi=q_hi, se_queue_hi=se_hi,
                    ))
    return rows
