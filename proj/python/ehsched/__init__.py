"""Energy-aware scheduling of task chains on batteryless devices."""

from ._core import (
    CircuitParams,
    InfeasibleProgram,
    InvalidParameter,
    Metrics,
    PreparedScenario,
    Scenario,
    ScenarioError,
    Schedule,
    SimTrace,
    TaskInstance,
    ValidationError,
    Violation,
    compute_metrics,
    load_scenario,
    load_scenario_file,
    prepare,
    simulate_ink,
    simulate_schedule,
    solve,
    solve_windowed,
    sweep_windows,
    verify,
    voltage_step,
)

__all__ = [name for name in dir() if not name.startswith("_")]
