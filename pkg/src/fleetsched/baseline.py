"""Charge-on-return dispatch: a stand-in for unoptimized fleet operation.

Trips are handed to the fullest available bus; buses plug into the lowest
numbered free charger whenever they are not out on a trip and keep
charging until full. No price or solar awareness — exactly the behaviour
the optimizing solver is measured against.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import FleetInstance
from .schedule import Activity, Schedule, derive_flows

_TOL = 1e-9


@dataclass(frozen=True)
class BaselineResult:
    feasible: bool
    schedule: Schedule | None
    reason: str | None = None


def baseline_charge_on_return(inst: FleetInstance) -> BaselineResult:
    """Simulate the greedy policy and repair the end-of-day energy.

    The policy overshoots the initial energy level (it charges toward
    full); surplus is repaired by dropping charging steps after each bus's
    last trip, latest first. If a trip cannot be covered or the surplus
    cannot be trimmed exactly, the baseline reports infeasibility — the
    optimizing solver may still find a feasible schedule.
    """
    T = inst.num_steps
    K = len(inst.buses)
    trips = sorted(inst.trips, key=lambda tr: (tr.start_step, tr.trip_id))

    energy = [bus.e_init for bus in inst.buses]
    serving_until = [-1] * K  # end step of the active trip, inclusive
    returned = [False] * K  # has completed at least one trip
    activities: list[list[Activity]] = [
        [Activity.idle() for _ in range(T)] for _ in range(K)
    ]
    trip_queue = list(trips)

    for t in range(T):
        for k in range(K):
            if serving_until[k] == t - 1 and serving_until[k] >= 0:
                returned[k] = True

        # Hand out trips that leave now.
        while trip_queue and trip_queue[0].start_step == t:
            trip = trip_queue.pop(0)
            candidates = []
            for k, bus in enumerate(inst.buses):
                if serving_until[k] >= t:
                    continue
                if energy[k] - trip.total_energy < bus.e_min - _TOL:
                    continue
                candidates.append((-energy[k], bus.bus_id, k))
            if not candidates:
                return BaselineResult(
                    feasible=False,
                    schedule=None,
                    reason=(
                        f"no bus can cover trip '{trip.trip_id}' at step "
                        f"{t} without dropping below its minimum energy"
                    ),
                )
            candidates.sort()
            k = candidates[0][2]
            serving_until[k] = trip.end_step
            for step in range(trip.start_step, trip.end_step + 1):
                activities[k][step] = Activity.serving(trip.trip_id)

        # Returned buses plug in if a whole charging step still fits.
        free = list(range(len(inst.chargers)))
        for k, bus in enumerate(inst.buses):
            if serving_until[k] >= t or not returned[k] or not free:
                continue
            n = free[0]
            quantum = inst.chargers[n].energy_per_step
            if energy[k] + quantum > bus.e_max + _TOL:
                continue
            free.pop(0)
            activities[k][t] = Activity.charging(inst.chargers[n].charger_id)
            energy[k] += quantum

        for k in range(K):
            act = activities[k][t]
            if act.kind == "serving":
                for trip in inst.trips:
                    if trip.trip_id == act.detail:
                        energy[k] -= trip.energy_per_step
                        break

    # Repair the end-of-day level by trimming surplus charging, latest step
    # first. Dropping a step lowers every later level, so a drop is kept
    # only when the remaining trajectory stays above the bus minimum.
    quantum_of = {ch.charger_id: ch.energy_per_step for ch in inst.chargers}
    for k, bus in enumerate(inst.buses):
        surplus = energy[k] - bus.e_init
        if surplus < -_TOL:
            return BaselineResult(
                feasible=False,
                schedule=None,
                reason=(
                    f"bus '{bus.bus_id}' ends the day {-surplus:.6f} kWh below "
                    f"its initial level and cannot recover"
                ),
            )
        levels = [bus.e_init]
        for t in range(T):
            act = activities[k][t]
            delta = 0.0
            if act.kind == "charging":
                delta = quantum_of[act.detail]
            elif act.kind == "serving":
                delta = -next(
                    tr.energy_per_step for tr in inst.trips if tr.trip_id == act.detail
                )
            levels.append(levels[-1] + delta)
        for t in range(T - 1, -1, -1):
            if surplus <= _TOL:
                break
            act = activities[k][t]
            if act.kind != "charging":
                continue
            quantum = quantum_of[act.detail]
            if quantum > surplus + _TOL:
                continue
            if min(levels[t + 1 :]) - quantum < bus.e_min - _TOL:
                continue
            activities[k][t] = Activity.idle()
            for p in range(t + 1, T + 1):
                levels[p] -= quantum
            surplus -= quantum
        if surplus > _TOL:
            return BaselineResult(
                feasible=False,
                schedule=None,
                reason=(
                    f"bus '{bus.bus_id}' ends {surplus:.6f} kWh above its "
                    f"initial level and trimming cannot remove the surplus"
                ),
            )

    acts = tuple(tuple(row) for row in activities)
    levels, grid, solar, cost = derive_flows(inst, acts)
    return BaselineResult(
        feasible=True,
        schedule=Schedule(
            activities=acts,
            energy=levels,
            grid_energy=grid,
            solar_energy=solar,
            total_cost=cost,
        ),
    )
