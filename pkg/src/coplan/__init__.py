"""Collaboration planning and offloading simulation for co-located devices."""
from .errors import ConfigError, PlanInfeasibleError
from .lp import LinearProgram, LpSolution, Status, solve, solve_lexicographic, verify_solution
from .planner import (
    TIME_ONLY,
    AllocationPlan,
    DeviceKind,
    DeviceProfile,
    EffectiveFleet,
    Mode,
    TaskSpec,
    augment_with_transfer,
    build_cost_time_lp,
    build_energy_time_lp,
    pareto_sweep,
    plan,
    plan_even_split,
)
from .netsim import Event, EventKind, LinkProfile, Trace, account_energy, transfer_cost
from .agents import (
    DepartureEvent,
    PipelineSpec,
    PipelineStage,
    ScanState,
    Strategy,
    adaptive_scan_step,
    collaborator_step,
    handle_departure,
    initiator_run,
    place_pipeline,
)
from .report import CollaborationReport, compute_gains
from .scenario import Scenario, load_scenario, write_scenario

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "PlanInfeasibleError",
    "LinearProgram",
    "LpSolution",
    "Status",
    "solve",
    "solve_lexicographic",
    "verify_solution",
    "TIME_ONLY",
    "AllocationPlan",
    "DeviceKind",
    "DeviceProfile",
    "EffectiveFleet",
    "Mode",
    "TaskSpec",
    "augment_with_transfer",
    "build_cost_time_lp",
    "build_energy_time_lp",
    "pareto_sweep",
    "plan",
    "plan_even_split",
    "Event",
    "EventKind",
    "LinkProfile",
    "Trace",
    "account_energy",
    "transfer_cost",
    "DepartureEvent",
    "PipelineSpec",
    "PipelineStage",
    "ScanState",
    "Strategy",
    "adaptive_scan_step",
    "collaborator_step",
    "handle_departure",
    "initiator_run",
    "place_pipeline",
    "CollaborationReport",
    "compute_gains",
    "Scenario",
    "load_scenario",
    "write_scenario",
]
