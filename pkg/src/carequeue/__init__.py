"""carequeue: discrete-time simulation of multi-stage nurse care with
patient reentrance, plus an exact two-patient clearing-system oracle.

Patients need a type-dependent number of nurse visits; between visits they
rest ("content") and return to the needy queue at random. The package
compares patient-priority disciplines (shortest-first vs longest-first)
and arrival-assignment heuristics under the power-law holding cost r**a.
"""

from .model import (
    ASSIGNMENT_RULES,
    PRIORITY_RULES,
    PolicySpec,
    RandomStreams,
    RunStats,
    SystemParams,
    SystemState,
    stability_ratio,
    validate_params,
)
from .policies import assign, future_cost_score, instant_cost_score, select_service
from .dynamics import PeriodTrace, run_replication, step
from .costing import estimate_J, holding_cost, period_cost, run_many
from .clearing import (
    ClearingInstance,
    ClearingResult,
    check_departure_ordering,
    clearing_costs,
    clearing_threshold,
    simulate_clearing,
    sweep_small_instances,
)

__version__ = "0.1.0"

__all__ = [
    "ASSIGNMENT_RULES",
    "PRIORITY_RULES",
    "PolicySpec",
    "RandomStreams",
    "RunStats",
    "SystemParams",
    "SystemState",
    "PeriodTrace",
    "ClearingInstance",
    "ClearingResult",
    "validate_params",
    "stability_ratio",
    "select_service",
    "instant_cost_score",
    "future_cost_score",
    "assign",
    "step",
    "run_replication",
    "holding_cost",
    "period_cost",
    "estimate_J",
    "run_many",
    "simulate_clearing",
    "check_departure_ordering",
    "clearing_costs",
    "clearing_threshold",
    "sweep_small_instances",
    "__version__",
]
