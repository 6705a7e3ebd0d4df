"""Exhaustive optimum for tiny instances: the solver's ground-truth oracle.

Enumerates every trip-to-bus assignment, then finds the cheapest feasible
charging pattern for each assignment with a forward dynamic program over
per-bus cumulative charged energy. No LP machinery is involved anywhere,
which keeps this oracle independent of the branch-and-bound path it is
used to check.

Guarded to at most 2 buses, 4 trips, 2 chargers and 16 steps.
"""

from __future__ import annotations

from itertools import product

from .model import FleetInstance
from .schedule import Activity, Schedule, derive_flows

MAX_BUSES = 2
MAX_TRIPS = 4
MAX_CHARGERS = 2
MAX_STEPS = 16

_TOL = 1e-9


class BruteForceSizeError(ValueError):
    """Instance exceeds the exhaustive-search guard."""


def brute_force_optimum(inst: FleetInstance) -> Schedule | None:
    """Globally cheapest schedule, or None when the instance is infeasible."""
    K, S, N, T = (
        len(inst.buses),
        len(inst.trips),
        len(inst.chargers),
        inst.num_steps,
    )
    if K > MAX_BUSES or S > MAX_TRIPS or N > MAX_CHARGERS or T > MAX_STEPS:
        raise BruteForceSizeError(
            f"instance ({K} buses, {S} trips, {N} chargers, {T} steps) exceeds "
            f"the guard ({MAX_BUSES}, {MAX_TRIPS}, {MAX_CHARGERS}, {MAX_STEPS})"
        )

    prices = [
        inst.rates.price_at_minute(inst.grid.step_start_minute(t)) for t in range(T)
    ]
    quanta = [ch.energy_per_step for ch in inst.chargers]
    max_quantum = max(quanta, default=0.0)

    best_cost: float | None = None
    best_plan = None

    for assignment in product(range(K), repeat=S):
        serving = _serving_table(inst, assignment, K, T)
        if serving is None:
            continue  # two trips overlap on the same bus
        plan = _cheapest_charging(inst, serving, prices, quanta, max_quantum)
        if plan is None:
            continue
        cost, matchings = plan
        if best_cost is None or cost < best_cost - _TOL:
            best_cost = cost
            best_plan = (assignment, serving, matchings)

    if best_plan is None:
        return None

    assignment, serving, matchings = best_plan
    activities: list[list[Activity]] = [
        [Activity.idle() for _ in range(T)] for _ in range(K)
    ]
    for k in range(K):
        for t in range(T):
            i = serving[k][t]
            if i is not None:
                activities[k][t] = Activity.serving(inst.trips[i].trip_id)
    for t, matching in enumerate(matchings):
        for k, n in matching:
            activities[k][t] = Activity.charging(inst.chargers[n].charger_id)

    acts = tuple(tuple(row) for row in activities)
    energy, grid, solar, cost = derive_flows(inst, acts)
    return Schedule(
        activities=acts,
        energy=energy,
        grid_energy=grid,
        solar_energy=solar,
        total_cost=cost,
    )


def _serving_table(inst, assignment, K, T):
    """serving[k][t] = trip index bus k serves at t, or None; None table if
    the assignment double-books a bus."""
    serving: list[list[int | None]] = [[None] * T for _ in range(K)]
    for i, trip in enumerate(inst.trips):
        k = assignment[i]
        for t in range(trip.start_step, trip.end_step + 1):
            if serving[k][t] is not None:
                return None
            serving[k][t] = i
    return serving


def _matchings(idle_buses: tuple[int, ...], num_chargers: int):
    """Every assignment of a subset of idle buses to distinct chargers,
    in a deterministic order. Yields tuples of (bus, charger)."""
    if not idle_buses or num_chargers == 0:
        yield ()
        return
    first, rest = idle_buses[0], idle_buses[1:]
    for sub in _matchings(rest, num_chargers):
        yield sub  # first bus does not charge
        used = {n for _, n in sub}
        for n in range(num_chargers):
            if n not in used:
                yield ((first, n),) + sub


def _cheapest_charging(inst, serving, prices, quanta, max_quantum):
    """DP over per-bus, per-charger charging-step counts.

    The state key is a tuple of integer count tuples, so cumulative charged
    energy is always recomputed exactly as count * quantum with no float
    drift. Returns (cost, matchings per step) for the cheapest pattern that
    keeps every bus inside its battery bounds and restores the initial
    level at the end of the day, or None when no pattern does.
    """
    K = len(inst.buses)
    N = len(quanta)
    T = inst.num_steps

    consumed_prefix = [[0.0] * (T + 1) for _ in range(K)]
    for k in range(K):
        for t in range(T):
            i = serving[k][t]
            draw = inst.trips[i].energy_per_step if i is not None else 0.0
            consumed_prefix[k][t + 1] = consumed_prefix[k][t] + draw
    consumed_total = [consumed_prefix[k][T] for k in range(K)]

    # Idle steps of bus k strictly after step t, for the recovery prune.
    idle_after = [[0] * T for _ in range(K)]
    for k in range(K):
        for t in range(T - 2, -1, -1):
            idle_after[k][t] = idle_after[k][t + 1] + (
                1 if serving[k][t + 1] is None else 0
            )

    per_step_matchings: list[list[tuple]] = []
    for t in range(T):
        idle = tuple(k for k in range(K) if serving[k][t] is None)
        per_step_matchings.append(list(_matchings(idle, N)))

    def charged(counts: tuple[int, ...]) -> float:
        return sum(counts[n] * quanta[n] for n in range(N))

    start_key = ((0,) * N,) * K
    states: dict[tuple, float] = {start_key: 0.0}
    parents: list[dict[tuple, tuple]] = []

    for t in range(T):
        new_states: dict[tuple, float] = {}
        back: dict[tuple, tuple] = {}
        solar_t = inst.solar[t]
        price_t = prices[t]
        for key, cost in sorted(states.items()):
            for matching in per_step_matchings[t]:
                counts = [list(bus_counts) for bus_counts in key]
                total_charge = 0.0
                for k, n in matching:
                    counts[k][n] += 1
                    total_charge += quanta[n]
                feasible = True
                for k in range(K):
                    cum = charged(tuple(counts[k]))
                    # Overcharge can never be burned off: the day must end
                    # exactly at the initial level.
                    if cum > consumed_total[k] + _TOL:
                        feasible = False
                        break
                    level = inst.buses[k].e_init + cum - consumed_prefix[k][t + 1]
                    if (
                        level < inst.buses[k].e_min - _TOL
                        or level > inst.buses[k].e_max + _TOL
                    ):
                        feasible = False
                        break
                    deficit = consumed_total[k] - cum
                    if deficit > idle_after[k][t] * max_quantum + _TOL:
                        feasible = False  # cannot recover by end of day
                        break
                if not feasible:
                    continue
                used_solar = min(solar_t, total_charge)
                step_cost = price_t * (total_charge - used_solar)
                candidate = cost + step_cost
                tkey = tuple(tuple(bus_counts) for bus_counts in counts)
                if tkey not in new_states or candidate < new_states[tkey] - _TOL:
                    new_states[tkey] = candidate
                    back[tkey] = (key, matching)
        states = new_states
        parents.append(back)
        if not states:
            return None

    terminal = [
        key
        for key in states
        if all(
            abs(charged(key[k]) - consumed_total[k]) <= _TOL for k in range(K)
        )
    ]
    if not terminal:
        return None
    final_key = min(terminal, key=lambda key: (states[key], key))

    matchings: list[tuple] = []
    key = final_key
    for t in range(T - 1, -1, -1):
        prev, matching = parents[t][key]
        matchings.append(matching)
        key = prev
    matchings.reverse()
    return states[final_key], matchings
