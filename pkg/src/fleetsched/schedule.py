"""Operational schedules: decoding, independent validation, costing, CSV IO.

The validator re-derives every constraint family directly from a Schedule
plus the instance data — it never looks at the assembled problem rows — so
it serves as an independent oracle for solver output as well as for
hand-written or mutated schedules.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import milp as _milp
from .milp import MilpProblem, VariableIndex
from .model import FleetInstance, RateSchedule, TimeGrid, price_at, price_vector

SERVING = "serving"
CHARGING = "charging"
IDLE = "idle"

VALIDATE_TOL = 1e-9
DECODE_THRESHOLD = 0.5


class DecodeError(RuntimeError):
    """Solver output could not be decoded into a single-activity schedule."""


@dataclass(frozen=True)
class Activity:
    kind: str  # serving | charging | idle
    detail: str | None = None  # trip id or charger id

    @classmethod
    def serving(cls, trip_id: str) -> "Activity":
        return cls(SERVING, trip_id)

    @classmethod
    def charging(cls, charger_id: str) -> "Activity":
        return cls(CHARGING, charger_id)

    @classmethod
    def idle(cls) -> "Activity":
        return cls(IDLE, None)


@dataclass(frozen=True)
class Schedule:
    """Per-bus activities plus energy trajectories and per-step sourcing.

    energy[k] has T+1 entries (fenceposts); grid_energy / solar_energy are
    kWh drawn in each step.
    """

    activities: tuple[tuple[Activity, ...], ...]
    energy: tuple[tuple[float, ...], ...]
    grid_energy: tuple[float, ...]
    solar_energy: tuple[float, ...]
    total_cost: float

    @property
    def num_buses(self) -> int:
        return len(self.activities)

    @property
    def num_steps(self) -> int:
        return len(self.grid_energy)


@dataclass(frozen=True)
class Violation:
    family: str
    where: str
    lhs: float
    rhs: float
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def feasible(self) -> bool:
        return not self.violations

    def families(self) -> set[str]:
        return {v.family for v in self.violations}

    def describe(self) -> str:
        if self.feasible:
            return "feasible: all constraint families satisfied\n"
        lines = [
            f"({v.family}) {v.where}: {v.message} [lhs={v.lhs:.9g}, rhs={v.rhs:.9g}]"
            for v in self.violations
        ]
        return "\n".join(lines) + "\n"


def charge_energy(inst: FleetInstance, activity: Activity) -> float:
    if activity.kind != CHARGING:
        return 0.0
    for charger in inst.chargers:
        if charger.charger_id == activity.detail:
            return charger.energy_per_step
    raise KeyError(f"unknown charger id {activity.detail!r}")


def consume_energy(inst: FleetInstance, activity: Activity) -> float:
    if activity.kind != SERVING:
        return 0.0
    for trip in inst.trips:
        if trip.trip_id == activity.detail:
            return trip.energy_per_step
    raise KeyError(f"unknown trip id {activity.detail!r}")


def derive_flows(
    inst: FleetInstance, activities: tuple[tuple[Activity, ...], ...]
) -> tuple[tuple, tuple, tuple, float]:
    """Exact energy trajectories and cheapest sourcing for given activities.

    Solar is used before grid in every step, which is cost-optimal because
    solar is free and prices are nonnegative. Returns (energy, grid, solar,
    cost).
    """
    T = inst.num_steps
    prices = price_vector(inst)
    energy = []
    for k, bus in enumerate(inst.buses):
        levels = [bus.e_init]
        for t in range(T):
            act = activities[k][t]
            levels.append(
                levels[-1] + charge_energy(inst, act) - consume_energy(inst, act)
            )
        energy.append(tuple(levels))

    grid, solar = [], []
    cost = 0.0
    for t in range(T):
        total = sum(
            charge_energy(inst, activities[k][t]) for k in range(len(inst.buses))
        )
        s = min(inst.solar[t], total)
        v = total - s
        solar.append(s)
        grid.append(v)
        cost += prices[t] * v
    return tuple(energy), tuple(grid), tuple(solar), cost


def decode(result, inst: FleetInstance, idx: VariableIndex) -> Schedule:
    """Turn a solver incumbent into a Schedule.

    Binary variables are read at a 0.5 threshold. The continuous energy and
    sourcing values are recomputed exactly from the decoded activities so
    the schedule carries no LP round-off.
    """
    values = result.values if hasattr(result, "values") else result
    if values is None:
        raise DecodeError("result has no incumbent to decode")
    values = np.asarray(values, dtype=float)

    T = idx.num_steps
    activities: list[tuple[Activity, ...]] = []
    for k in range(idx.num_buses):
        row: list[Activity] = []
        for t in range(T):
            chosen: Activity | None = None
            for i, trip in enumerate(inst.trips):
                if values[idx.x(i, k, t)] > DECODE_THRESHOLD:
                    if chosen is not None:
                        raise DecodeError(
                            f"bus {k} has overlapping activities at step {t}"
                        )
                    chosen = Activity.serving(trip.trip_id)
            charging_at: str | None = None
            for n, charger in enumerate(inst.chargers):
                if values[idx.y(n, k, t)] > DECODE_THRESHOLD:
                    if charging_at is not None or chosen is not None:
                        raise DecodeError(
                            f"bus {k} has overlapping activities at step {t}"
                        )
                    charging_at = charger.charger_id
            if charging_at is not None:
                chosen = Activity.charging(charging_at)
            row.append(chosen if chosen is not None else Activity.idle())
        activities.append(tuple(row))

    energy, grid, solar, cost = derive_flows(inst, tuple(activities))
    return Schedule(
        activities=tuple(activities),
        energy=energy,
        grid_energy=grid,
        solar_energy=solar,
        total_cost=cost,
    )


def cost_of(sched: Schedule, rates: RateSchedule, grid: TimeGrid) -> float:
    """Daily cost: per-step price applied to the grid energy drawn."""
    return sum(
        price_at(rates, t, grid) * sched.grid_energy[t]
        for t in range(sched.num_steps)
    )


def validate(
    sched: Schedule, inst: FleetInstance, tol: float = VALIDATE_TOL
) -> ValidationReport:
    """Check every constraint family directly from the schedule.

    Families 1b (one activity per bus-step) and 1f (a charging bus occupies
    exactly one charger) cannot be violated by a well-formed Schedule value
    and are therefore structural here; everything else is recomputed.
    """
    violations: list[Violation] = []
    T = inst.num_steps
    K = len(inst.buses)

    # Coverage (each window step served exactly once) and service outside
    # the trip window.
    for trip in inst.trips:
        for t in range(T):
            servers = [
                k
                for k in range(K)
                if sched.activities[k][t] == Activity.serving(trip.trip_id)
            ]
            if trip.covers(t):
                if len(servers) != 1:
                    violations.append(
                        Violation(
                            family=_milp.TAG_COVERAGE,
                            where=f"trip={trip.trip_id},t={t}",
                            lhs=float(len(servers)),
                            rhs=1.0,
                            message="window step not served by exactly one bus",
                        )
                    )
            elif servers:
                violations.append(
                    Violation(
                        family=_milp.TAG_COVERAGE,
                        where=f"trip={trip.trip_id},t={t}",
                        lhs=float(len(servers)),
                        rhs=0.0,
                        message="bus serving outside the trip window",
                    )
                )

    # Continuity: a single bus serves the whole window.
    for trip in inst.trips:
        serving_buses = []
        for t in range(trip.start_step, trip.end_step + 1):
            for k in range(K):
                if sched.activities[k][t] == Activity.serving(trip.trip_id):
                    serving_buses.append((t, k))
        distinct = {k for _, k in serving_buses}
        if len(distinct) > 1:
            first_t = min(t for t, _ in serving_buses)
            violations.append(
                Violation(
                    family=_milp.TAG_CONTINUITY,
                    where=f"trip={trip.trip_id},t={first_t}",
                    lhs=float(len(distinct)),
                    rhs=1.0,
                    message="trip handed between buses mid-window",
                )
            )

    # Charger capacity.
    for charger in inst.chargers:
        for t in range(T):
            occupants = [
                k
                for k in range(K)
                if sched.activities[k][t] == Activity.charging(charger.charger_id)
            ]
            if len(occupants) > 1:
                violations.append(
                    Violation(
                        family=_milp.TAG_CHARGER_CAP,
                        where=f"charger={charger.charger_id},t={t}",
                        lhs=float(len(occupants)),
                        rhs=1.0,
                        message="charger double-booked",
                    )
                )

    # Energy dynamics: the stored trajectory must match exact recomputation.
    for k in range(K):
        if len(sched.energy[k]) != T + 1:
            violations.append(
                Violation(
                    family=_milp.TAG_ENERGY_DYNAMICS,
                    where=f"bus={inst.buses[k].bus_id}",
                    lhs=float(len(sched.energy[k])),
                    rhs=float(T + 1),
                    message="energy trajectory has wrong length",
                )
            )
            continue
        for t in range(T):
            act = sched.activities[k][t]
            try:
                expected = (
                    sched.energy[k][t]
                    + charge_energy(inst, act)
                    - consume_energy(inst, act)
                )
            except KeyError as exc:
                violations.append(
                    Violation(
                        family=_milp.TAG_ENERGY_DYNAMICS,
                        where=f"bus={inst.buses[k].bus_id},t={t}",
                        lhs=0.0,
                        rhs=0.0,
                        message=str(exc),
                    )
                )
                continue
            if abs(sched.energy[k][t + 1] - expected) > tol:
                violations.append(
                    Violation(
                        family=_milp.TAG_ENERGY_DYNAMICS,
                        where=f"bus={inst.buses[k].bus_id},t={t}",
                        lhs=sched.energy[k][t + 1],
                        rhs=expected,
                        message="energy level inconsistent with activity",
                    )
                )

    # Power balance.
    for t in range(T):
        total = 0.0
        for k in range(K):
            act = sched.activities[k][t]
            if act.kind == CHARGING:
                try:
                    total += charge_energy(inst, act)
                except KeyError:
                    continue
        supplied = sched.grid_energy[t] + sched.solar_energy[t]
        if abs(total - supplied) > tol:
            violations.append(
                Violation(
                    family=_milp.TAG_POWER_BALANCE,
                    where=f"t={t}",
                    lhs=supplied,
                    rhs=total,
                    message="grid + solar does not match charging energy",
                )
            )

    # Battery bounds over every fencepost.
    for k, bus in enumerate(inst.buses):
        for p, level in enumerate(sched.energy[k]):
            if level < bus.e_min - tol or level > bus.e_max + tol:
                violations.append(
                    Violation(
                        family=_milp.TAG_ENERGY_BOUNDS,
                        where=f"bus={bus.bus_id},p={p}",
                        lhs=level,
                        rhs=bus.e_min if level < bus.e_min else bus.e_max,
                        message="energy outside [e_min, e_max]",
                    )
                )

    # Solar cap and grid nonnegativity.
    for t in range(T):
        s = sched.solar_energy[t]
        if s < -tol or s > inst.solar[t] + tol:
            violations.append(
                Violation(
                    family=_milp.TAG_SOLAR_CAP,
                    where=f"t={t}",
                    lhs=s,
                    rhs=inst.solar[t],
                    message="solar draw outside [0, forecast]",
                )
            )
        if sched.grid_energy[t] < -tol:
            violations.append(
                Violation(
                    family=_milp.TAG_V_NONNEG,
                    where=f"t={t}",
                    lhs=sched.grid_energy[t],
                    rhs=0.0,
                    message="negative grid purchase",
                )
            )

    # Boundary conditions.
    for k, bus in enumerate(inst.buses):
        if abs(sched.energy[k][0] - bus.e_init) > tol:
            violations.append(
                Violation(
                    family=_milp.TAG_E_INITIAL,
                    where=f"bus={bus.bus_id}",
                    lhs=sched.energy[k][0],
                    rhs=bus.e_init,
                    message="day does not start at the initial energy",
                )
            )
        if abs(sched.energy[k][T] - bus.e_init) > tol:
            violations.append(
                Violation(
                    family=_milp.TAG_E_FINAL,
                    where=f"bus={bus.bus_id}",
                    lhs=sched.energy[k][T],
                    rhs=bus.e_init,
                    message="day does not end at the initial energy",
                )
            )

    return ValidationReport(violations=tuple(violations))


def encode_schedule(
    sched: Schedule, inst: FleetInstance, idx: VariableIndex
) -> np.ndarray:
    """Full variable vector for a schedule (warm starts, cross-checks)."""
    values = np.zeros(idx.num_columns)
    trip_pos = {trip.trip_id: i for i, trip in enumerate(inst.trips)}
    charger_pos = {ch.charger_id: n for n, ch in enumerate(inst.chargers)}
    for k in range(idx.num_buses):
        for t in range(idx.num_steps):
            act = sched.activities[k][t]
            if act.kind == SERVING:
                values[idx.x(trip_pos[act.detail], k, t)] = 1.0
            elif act.kind == CHARGING:
                values[idx.y(charger_pos[act.detail], k, t)] = 1.0
                values[idx.z(k, t)] = 1.0
        for p in range(idx.num_steps + 1):
            values[idx.e(k, p)] = sched.energy[k][p]
    for t in range(idx.num_steps):
        values[idx.v(t)] = sched.grid_energy[t]
        values[idx.s(t)] = sched.solar_energy[t]
    return values


def make_polisher(inst: FleetInstance, idx: VariableIndex):
    """Polisher for branch-and-bound incumbents.

    Re-derives the continuous columns exactly from the snapped binaries;
    returns None when the exact recomputation is not feasible (which means
    the LP accepted the assignment only within its tolerance).
    """

    def polish(values: np.ndarray) -> np.ndarray | None:
        try:
            sched = decode(values, inst, idx)
        except DecodeError:
            return None
        for k, bus in enumerate(inst.buses):
            for level in sched.energy[k]:
                if level < bus.e_min - VALIDATE_TOL or level > bus.e_max + VALIDATE_TOL:
                    return None
            if abs(sched.energy[k][-1] - bus.e_init) > VALIDATE_TOL:
                return None
        return encode_schedule(sched, inst, idx)

    return polish


# ---------------------------------------------------------------------------
# CSV surfaces


def schedule_to_csv(sched: Schedule, inst: FleetInstance) -> str:
    """One row per (bus, step) with the start-of-step energy, plus a final
    step-T row per bus carrying the end-of-day level."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["bus_id", "step", "wall_clock", "activity", "detail_id", "energy_kwh"]
    )
    T = inst.num_steps
    for k, bus in enumerate(inst.buses):
        for t in range(T):
            act = sched.activities[k][t]
            writer.writerow(
                [
                    bus.bus_id,
                    t,
                    inst.grid.wall_clock(t),
                    act.kind,
                    act.detail or "",
                    repr(float(sched.energy[k][t])),
                ]
            )
        writer.writerow(
            [bus.bus_id, T, "24:00", "end", "", repr(float(sched.energy[k][T]))]
        )
    return buf.getvalue()


def schedule_from_csv(
    text: str,
    inst: FleetInstance,
    grid_energy: tuple[float, ...] | None = None,
    solar_energy: tuple[float, ...] | None = None,
) -> Schedule:
    """Rebuild a Schedule from its CSV form.

    When the fleet time-series (grid/solar split) is not supplied, the
    cheapest solar-first split is derived from the activities.
    """
    T = inst.num_steps
    bus_pos = {bus.bus_id: k for k, bus in enumerate(inst.buses)}
    activities: list[list[Activity | None]] = [
        [None] * T for _ in range(len(inst.buses))
    ]
    energy: list[list[float | None]] = [
        [None] * (T + 1) for _ in range(len(inst.buses))
    ]

    reader = csv.DictReader(io.StringIO(text))
    for row in reader:
        bus_id = row["bus_id"]
        if bus_id not in bus_pos:
            raise ValueError(f"schedule references unknown bus id {bus_id!r}")
        k = bus_pos[bus_id]
        t = int(row["step"])
        level = float(row["energy_kwh"])
        if t == T:
            energy[k][T] = level
            continue
        if not (0 <= t < T):
            raise ValueError(f"schedule step {t} outside the grid")
        kind = row["activity"]
        detail = row["detail_id"] or None
        if kind == SERVING:
            activities[k][t] = Activity.serving(detail)
        elif kind == CHARGING:
            activities[k][t] = Activity.charging(detail)
        elif kind == IDLE:
            activities[k][t] = Activity.idle()
        else:
            raise ValueError(f"unknown activity {kind!r} at bus {bus_id} step {t}")
        energy[k][t] = level

    for k, bus in enumerate(inst.buses):
        for t in range(T):
            if activities[k][t] is None:
                raise ValueError(
                    f"schedule is missing bus {bus.bus_id} step {t}"
                )
        if energy[k][T] is None:
            raise ValueError(f"schedule is missing the final row for {bus.bus_id}")

    acts = tuple(tuple(row) for row in activities)
    if grid_energy is None or solar_energy is None:
        _, grid, solar, _ = derive_flows(inst, acts)
    else:
        grid, solar = tuple(grid_energy), tuple(solar_energy)

    prices = price_vector(inst)
    cost = sum(prices[t] * grid[t] for t in range(T))
    return Schedule(
        activities=acts,
        energy=tuple(tuple(levels) for levels in energy),
        grid_energy=grid,
        solar_energy=solar,
        total_cost=cost,
    )


def timeseries_to_csv(sched: Schedule, inst: FleetInstance) -> str:
    """Fleet-level series: charging power, grid/solar split, price per step."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["step", "wall_clock", "total_charge_kw", "grid_kw", "solar_kw",
         "price_per_kwh"]
    )
    per_hour = 60.0 / inst.grid.step_minutes
    prices = price_vector(inst)
    for t in range(inst.num_steps):
        total = sched.grid_energy[t] + sched.solar_energy[t]
        writer.writerow(
            [
                t,
                inst.grid.wall_clock(t),
                repr(float(total * per_hour)),
                repr(float(sched.grid_energy[t] * per_hour)),
                repr(float(sched.solar_energy[t] * per_hour)),
                repr(float(prices[t])),
            ]
        )
    return buf.getvalue()


def timeseries_from_csv(text: str, inst: FleetInstance) -> tuple[tuple, tuple]:
    """Grid and solar kWh-per-step vectors from a time-series CSV."""
    per_hour = 60.0 / inst.grid.step_minutes
    grid = [0.0] * inst.num_steps
    solar = [0.0] * inst.num_steps
    reader = csv.DictReader(io.StringIO(text))
    for row in reader:
        t = int(row["step"])
        grid[t] = float(row["grid_kw"]) / per_hour
        solar[t] = float(row["solar_kw"]) / per_hour
    return tuple(grid), tuple(solar)
