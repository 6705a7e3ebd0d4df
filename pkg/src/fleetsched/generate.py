"""Seeded instance generation and schedule mutation for oracle testing.

gen_instance builds small instances through the same JSON path users take,
sized by default to fit the brute-force guard. Trip energies are whole
multiples of the charging quantum, since the day-repeatability constraint
makes anything else unschedulable.

mutate produces a near-copy of a feasible schedule that breaks one named
constraint family; some breaks necessarily cascade into related families
(documented per mutation), and the validator must flag the named family.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .fixtures import E20_RATES, bell_solar_kw
from .model import FleetInstance, format_hhmm, instance_from_dict, validate_instance
from .schedule import CHARGING, IDLE, SERVING, Activity, Schedule, derive_flows
from . import milp as _milp

# num_steps values that divide the day evenly and fit the brute-force guard
_ORACLE_STEP_COUNTS = [6, 8, 9, 10, 12, 15, 16]


class GenerationError(RuntimeError):
    """Could not produce a structurally valid instance within the retry cap."""


@dataclass(frozen=True)
class InstanceGenConfig:
    seed: int = 0
    buses: tuple[int, int] = (1, 2)
    trips: tuple[int, int] = (1, 4)
    chargers: tuple[int, int] = (1, 2)
    steps: tuple[int, int] = (8, 16)
    overlap_probability: float = 0.3
    price_profile: str = "two-tier"  # flat | two-tier | table-I
    solar_profile: str = "none"  # none | bell
    solar_peak_share: float = 0.75
    retry_cap: int = 40

    def __post_init__(self) -> None:
        if self.price_profile not in ("flat", "two-tier", "table-I"):
            raise ValueError(f"unknown price profile {self.price_profile!r}")
        if self.solar_profile not in ("none", "bell"):
            raise ValueError(f"unknown solar profile {self.solar_profile!r}")


def _price_rows(profile: str, rng: random.Random) -> list[dict]:
    if profile == "flat":
        return [{"start": "00:00", "end": "24:00", "price_per_kwh": 0.10}]
    if profile == "two-tier":
        return [
            {"start": "00:00", "end": "08:00", "price_per_kwh": 0.05},
            {"start": "08:00", "end": "20:00", "price_per_kwh": 0.20},
            {"start": "20:00", "end": "24:00", "price_per_kwh": 0.05},
        ]
    return [dict(row) for row in E20_RATES]


def gen_instance(cfg: InstanceGenConfig, seed: int | None = None) -> FleetInstance:
    """Deterministic per (cfg, seed); resamples draws that fail validation."""
    base_seed = cfg.seed if seed is None else seed
    for attempt in range(cfg.retry_cap):
        rng = random.Random(base_seed * 1_000_003 + attempt)
        inst = _draw_instance(cfg, rng)
        if not validate_instance(inst):
            return inst
    raise GenerationError(
        f"no structurally valid draw after {cfg.retry_cap} attempts for "
        f"seed {base_seed} with config {cfg}"
    )


def _draw_instance(cfg: InstanceGenConfig, rng: random.Random) -> FleetInstance:
    T = rng.choice([t for t in _ORACLE_STEP_COUNTS
                    if cfg.steps[0] <= t <= cfg.steps[1]] or [cfg.steps[1]])
    step_minutes = 1440 // T

    num_buses = rng.randint(*cfg.buses)
    num_trips = rng.randint(*cfg.trips)
    num_chargers = rng.randint(*cfg.chargers)

    # One shared quantum keeps every trip's energy an exact charge multiple.
    quantum = rng.choice([15.0, 20.0, 30.0])
    power_kw = quantum * 60.0 / step_minutes
    efficiency = 1.25

    trips = []
    cursor = 0
    for j in range(num_trips):
        length = rng.randint(1, max(1, min(3, T // 2)))
        latest_start = T - length
        if latest_start < 0:
            continue
        if rng.random() >= cfg.overlap_probability:
            # Sequential placement: never overlaps an earlier trip.
            if cursor > latest_start:
                continue
            start = rng.randint(cursor, latest_start)
        else:
            start = rng.randint(0, latest_start)
        cursor = max(cursor, start + length)
        m = rng.randint(1, 2)
        miles = m * quantum / efficiency
        trips.append(
            {
                "id": f"T{j}",
                "route": f"R{j % 3}",
                "start": format_hhmm(start * step_minutes),
                "end": format_hhmm((start + length) * step_minutes),
                "miles": miles,
            }
        )

    buses = []
    for k in range(num_buses):
        e_min = rng.choice([0.0, quantum])
        e_max = e_min + quantum * rng.randint(5, 8)
        e_init = e_min + quantum * rng.randint(2, 4)
        buses.append(
            {
                "id": f"B{k}",
                "model": "test",
                "e_min_kwh": e_min,
                "e_max_kwh": e_max,
                "e_init_kwh": min(e_init, e_max),
            }
        )

    chargers = [
        {"id": f"P{n}", "power_kw": power_kw} for n in range(num_chargers)
    ]

    data = {
        "step_minutes": step_minutes,
        "efficiency_kwh_per_mile": efficiency,
        "trips": trips,
        "buses": buses,
        "chargers": chargers,
        "rates": _price_rows(cfg.price_profile, rng),
    }
    if cfg.solar_profile == "bell":
        peak_kw = cfg.solar_peak_share * power_kw * num_chargers
        data["solar_kw"] = bell_solar_kw(step_minutes, peak_kw)
    return instance_from_dict(data)


# ---------------------------------------------------------------------------
# Mutation engine

MUTABLE_FAMILIES = (
    _milp.TAG_COVERAGE,
    _milp.TAG_CONTINUITY,
    _milp.TAG_CHARGER_CAP,
    _milp.TAG_ENERGY_DYNAMICS,
    _milp.TAG_POWER_BALANCE,
    _milp.TAG_ENERGY_BOUNDS,
    _milp.TAG_SOLAR_CAP,
    _milp.TAG_E_INITIAL,
    _milp.TAG_E_FINAL,
    _milp.TAG_V_NONNEG,
)

# These two are enforced by the Schedule type itself (one activity per
# bus-step; charging always pairs with exactly one charger), so no schedule
# value can violate them.
STRUCTURAL_FAMILIES = (_milp.TAG_EXCLUSIVITY, _milp.TAG_CHARGER_COUPLING)


def mutate(sched: Schedule, family: str, inst: FleetInstance) -> Schedule | None:
    """A copy of `sched` violating the named family; None = not applicable.

    Cascades: 1e and 1c edits leave the stored energy stale (flags 1g too);
    1i and 1m shift a whole trajectory (flags 1m/1n alongside); 1l and
    V-nonneg repartition one step's sourcing (may flag each other or 1h).
    """
    if family in STRUCTURAL_FAMILIES:
        return None
    if family == _milp.TAG_COVERAGE:
        return _mutate_unassign(sched)
    if family == _milp.TAG_CONTINUITY:
        return _mutate_switch_bus(sched, inst)
    if family == _milp.TAG_CHARGER_CAP:
        return _mutate_double_book(sched, inst)
    if family == _milp.TAG_ENERGY_DYNAMICS:
        return _mutate_energy_kink(sched)
    if family == _milp.TAG_POWER_BALANCE:
        return _mutate_power_balance(sched)
    if family == _milp.TAG_ENERGY_BOUNDS:
        return _mutate_overfill(sched, inst)
    if family == _milp.TAG_SOLAR_CAP:
        return _mutate_solar_over(sched, inst)
    if family == _milp.TAG_E_INITIAL:
        return _mutate_shift_start(sched, inst)
    if family == _milp.TAG_E_FINAL:
        return _mutate_drop_charge(sched, inst)
    if family == _milp.TAG_V_NONNEG:
        return _mutate_negative_grid(sched)
    raise ValueError(f"unknown constraint family {family!r}")


def _first_activity(sched: Schedule, kind: str) -> tuple[int, int] | None:
    for k in range(sched.num_buses):
        for t in range(sched.num_steps):
            if sched.activities[k][t].kind == kind:
                return k, t
    return None


def _with_activity(sched: Schedule, k: int, t: int, act: Activity) -> Schedule:
    activities = [list(row) for row in sched.activities]
    activities[k][t] = act
    return replace(sched, activities=tuple(tuple(row) for row in activities))


def _mutate_unassign(sched: Schedule) -> Schedule | None:
    spot = _first_activity(sched, SERVING)
    if spot is None:
        return None
    k, t = spot
    return _with_activity(sched, k, t, Activity.idle())


def _mutate_switch_bus(sched: Schedule, inst: FleetInstance) -> Schedule | None:
    if sched.num_buses < 2:
        return None
    for trip in inst.trips:
        if trip.num_steps < 2:
            continue
        t = trip.end_step
        server = next(
            (
                k
                for k in range(sched.num_buses)
                if sched.activities[k][t] == Activity.serving(trip.trip_id)
            ),
            None,
        )
        if server is None:
            continue
        others = [k for k in range(sched.num_buses) if k != server]
        idle_others = [
            k for k in others if sched.activities[k][t].kind == IDLE
        ]
        k2 = idle_others[0] if idle_others else others[0]
        out = _with_activity(sched, server, t, Activity.idle())
        return _with_activity(out, k2, t, Activity.serving(trip.trip_id))
    return None


def _mutate_double_book(sched: Schedule, inst: FleetInstance) -> Schedule | None:
    if sched.num_buses < 2:
        return None
    spot = _first_activity(sched, CHARGING)
    if spot is None:
        return None
    k, t = spot
    charger_id = sched.activities[k][t].detail
    others = [k2 for k2 in range(sched.num_buses) if k2 != k]
    idle_others = [k2 for k2 in others if sched.activities[k2][t].kind == IDLE]
    k2 = idle_others[0] if idle_others else others[0]
    return _with_activity(sched, k2, t, Activity.charging(charger_id))


def _mutate_energy_kink(sched: Schedule) -> Schedule | None:
    if sched.num_steps < 2:
        return None
    energy = [list(levels) for levels in sched.energy]
    mid = sched.num_steps // 2
    energy[0][mid] += 1.0
    return replace(sched, energy=tuple(tuple(levels) for levels in energy))


def _mutate_power_balance(sched: Schedule) -> Schedule | None:
    grid = list(sched.grid_energy)
    grid[0] += 1.0
    return replace(sched, grid_energy=tuple(grid))


def _mutate_overfill(sched: Schedule, inst: FleetInstance) -> Schedule | None:
    # Shift one bus's whole trajectory above e_max; the per-step deltas stay
    # intact so the dynamics family remains clean (start/end families trip).
    k = 0
    bus = inst.buses[k]
    peak = max(sched.energy[k])
    shift = (bus.e_max - peak) + 1.0
    energy = [list(levels) for levels in sched.energy]
    energy[k] = [level + shift for level in energy[k]]
    return replace(sched, energy=tuple(tuple(levels) for levels in energy))


def _mutate_solar_over(sched: Schedule, inst: FleetInstance) -> Schedule | None:
    t = 0
    solar = list(sched.solar_energy)
    grid = list(sched.grid_energy)
    extra = inst.solar[t] + 1.0 - solar[t]
    solar[t] = inst.solar[t] + 1.0
    grid[t] -= extra
    return replace(
        sched, solar_energy=tuple(solar), grid_energy=tuple(grid)
    )


def _mutate_shift_start(sched: Schedule, inst: FleetInstance) -> Schedule | None:
    energy = [list(levels) for levels in sched.energy]
    energy[0] = [level + 1.0 for level in energy[0]]
    return replace(sched, energy=tuple(tuple(levels) for levels in energy))


def _mutate_drop_charge(sched: Schedule, inst: FleetInstance) -> Schedule | None:
    # Remove the last charging step and recompute flows exactly: the day
    # then ends below the initial level.
    last: tuple[int, int] | None = None
    for k in range(sched.num_buses):
        for t in range(sched.num_steps):
            if sched.activities[k][t].kind == CHARGING:
                last = (k, t)
    if last is None:
        return None
    k, t = last
    activities = [list(row) for row in sched.activities]
    activities[k][t] = Activity.idle()
    acts = tuple(tuple(row) for row in activities)
    energy, grid, solar, cost = derive_flows(inst, acts)
    return Schedule(
        activities=acts,
        energy=energy,
        grid_energy=grid,
        solar_energy=solar,
        total_cost=cost,
    )


def _mutate_negative_grid(sched: Schedule) -> Schedule | None:
    grid = list(sched.grid_energy)
    solar = list(sched.solar_energy)
    t = 0
    delta = grid[t] + 1.0
    grid[t] = -1.0
    solar[t] += delta
    return replace(sched, grid_energy=tuple(grid), solar_energy=tuple(solar))
