"""Minimal-cost daily route assignment and charge scheduling for electric
bus fleets, with behind-the-meter solar, an exact branch-and-bound solver,
and an independent schedule validator."""

from .model import (
    Bus,
    Charger,
    FleetInstance,
    InstanceError,
    InstanceParseError,
    RateInterval,
    RateSchedule,
    SolarForecast,
    TimeGrid,
    Trip,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    price_at,
    save_instance,
    validate_instance,
)
from .milp import MilpProblem, VariableIndex, assemble, debug_dump
from .mps import export_mps, parse_mps
from .bnb import MipResult, SolveConfig, branch_and_bound, warm_start_check
from .lp import solve_lp
from .schedule import (
    Activity,
    Schedule,
    ValidationReport,
    cost_of,
    decode,
    schedule_from_csv,
    schedule_to_csv,
    timeseries_to_csv,
    validate,
)
from .baseline import BaselineResult, baseline_charge_on_return
from .brute import BruteForceSizeError, brute_force_optimum
from .generate import InstanceGenConfig, gen_instance, mutate
from .pipeline import compare_scenarios, solve_instance

__version__ = "0.1.0"

__all__ = [
    "Activity",
    "BaselineResult",
    "BruteForceSizeError",
    "Bus",
    "Charger",
    "FleetInstance",
    "InstanceError",
    "InstanceGenConfig",
    "InstanceParseError",
    "MilpProblem",
    "MipResult",
    "RateInterval",
    "RateSchedule",
    "Schedule",
    "SolarForecast",
    "SolveConfig",
    "TimeGrid",
    "Trip",
    "ValidationReport",
    "VariableIndex",
    "assemble",
    "baseline_charge_on_return",
    "branch_and_bound",
    "brute_force_optimum",
    "compare_scenarios",
    "cost_of",
    "debug_dump",
    "decode",
    "export_mps",
    "gen_instance",
    "instance_from_dict",
    "instance_to_dict",
    "load_instance",
    "mutate",
    "parse_mps",
    "price_at",
    "save_instance",
    "schedule_from_csv",
    "schedule_to_csv",
    "solve_instance",
    "solve_lp",
    "timeseries_to_csv",
    "validate",
    "validate_instance",
    "warm_start_check",
]
