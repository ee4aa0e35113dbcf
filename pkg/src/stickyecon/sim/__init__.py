"""Simulation layer: scenarios, steppers, implicit oracles, and the runner."""

from .oracles import (
    step_implicit_oracle,
    step_multi_implicit_oracle,
    step_taylor_implicit_oracle,
)
from .runner import (
    CSV_HEADER,
    Trajectory,
    VolatilityStats,
    simulate,
    summarize,
    volatility_stats,
    write_agents_csv,
    write_summary_json,
    write_trajectory_csv,
)
from .scenario import (
    CHANNELS,
    VARIANTS,
    AgentSpec,
    InitialState,
    NoiseSpec,
    RunLimits,
    Scenario,
    ShockEvent,
    list_presets,
    load_preset,
    load_scenario,
    scenario_from_dict,
)
from .steppers import MultiAgentStepper, StickyStepper, StickyTaylorStepper

__all__ = [
    "AgentSpec",
    "CHANNELS",
    "CSV_HEADER",
    "InitialState",
    "MultiAgentStepper",
    "NoiseSpec",
    "RunLimits",
    "Scenario",
    "ShockEvent",
    "StickyStepper",
    "StickyTaylorStepper",
    "Trajectory",
    "VARIANTS",
    "VolatilityStats",
    "list_presets",
    "load_preset",
    "load_scenario",
    "scenario_from_dict",
    "simulate",
    "step_implicit_oracle",
    "step_multi_implicit_oracle",
    "step_taylor_implicit_oracle",
    "summarize",
    "volatility_stats",
    "write_agents_csv",
    "write_summary_json",
    "write_trajectory_csv",
]
