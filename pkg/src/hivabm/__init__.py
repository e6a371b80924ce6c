"""Agent-based simulation of HIV spread among FSWs, their clients and the clients' partners."""

from .domain import (
    ConfigError,
    Gender,
    InfectionProvenance,
    Percent,
    Person,
    PersonState,
    PersonType,
    SimConfig,
    Source,
    validate_config,
)
from .engine import CouplingEvent, Trace, WorldState, run
from .metrics import CounterSnapshot, compute_counters
from .contracts import Violation, check_event, check_state, validate_trace
from .experiments import Aggregate, SweepResult, aggregate, run_replicates, sweep

__all__ = [
    "Aggregate", "ConfigError", "CounterSnapshot", "CouplingEvent", "Gender",
    "InfectionProvenance", "Percent", "Person", "PersonState", "PersonType",
    "SimConfig", "Source", "SweepResult", "Trace", "Violation", "WorldState",
    "aggregate", "check_event", "check_state", "compute_counters", "run",
    "run_replicates", "sweep", "validate_config", "validate_trace",
]
