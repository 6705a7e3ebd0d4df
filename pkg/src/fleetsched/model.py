"""Domain types and instance ingestion for electric bus fleet scheduling.

A fleet instance describes one operating day: the discretized time grid,
the trips that must be served, the buses and depot chargers available, the
time-of-use electricity rates, and an optional on-site solar forecast.
All quantities are normalized to kWh per time step at load time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path


class InstanceError(ValueError):
    """Base class for instance ingestion failures."""


class InstanceParseError(InstanceError):
    """The input does not match the documented instance schema."""


class TripWindowError(InstanceError):
    """A trip window does not fit inside the 24-hour grid."""


class RateScheduleError(InstanceError):
    """Rate intervals do not partition the 24-hour day."""


MINUTES_PER_DAY = 1440


def parse_hhmm(text: str, *, field_name: str = "time") -> int:
    """Parse an 'HH:MM' wall-clock string into minutes after midnight.

    '24:00' is accepted and maps to 1440 (end of day).
    """
    if not isinstance(text, str) or ":" not in text:
        raise InstanceParseError(f"{field_name}: expected 'HH:MM' string, got {text!r}")
    hh, _, mm = text.partition(":")
    try:
        hours, minutes = int(hh), int(mm)
    except ValueError:
        raise InstanceParseError(f"{field_name}: expected 'HH:MM' string, got {text!r}") from None
    if hours == 24 and minutes == 0:
        return MINUTES_PER_DAY
    if not (0 <= hours < 24 and 0 <= minutes < 60):
        raise InstanceParseError(f"{field_name}: {text!r} is not a valid wall-clock time")
    return hours * 60 + minutes


def format_hhmm(minute: int) -> str:
    if minute == MINUTES_PER_DAY:
        return "24:00"
    return f"{minute // 60:02d}:{minute % 60:02d}"


@dataclass(frozen=True)
class TimeGrid:
    """Uniform discretization of one 24-hour operating day.

    step_minutes * num_steps must equal exactly 1440; step indices run
    0 .. num_steps-1 and step t covers [t*step_minutes, (t+1)*step_minutes).
    """

    step_minutes: int
    num_steps: int
    day_start_minute: int = 0

    def __post_init__(self) -> None:
        if self.step_minutes <= 0:
            raise InstanceParseError("step_minutes must be a positive integer")
        if MINUTES_PER_DAY % self.step_minutes != 0:
            raise InstanceParseError(
                f"step_minutes={self.step_minutes} does not divide 1440"
            )
        if self.step_minutes * self.num_steps != MINUTES_PER_DAY:
            raise InstanceParseError(
                f"num_steps={self.num_steps} does not cover 24 h at "
                f"{self.step_minutes} min per step"
            )

    @classmethod
    def from_step_minutes(cls, step_minutes: int) -> "TimeGrid":
        if step_minutes <= 0 or MINUTES_PER_DAY % step_minutes != 0:
            raise InstanceParseError(
                f"step_minutes={step_minutes} does not divide 1440"
            )
        return cls(step_minutes=step_minutes, num_steps=MINUTES_PER_DAY // step_minutes)

    @property
    def hours_per_step(self) -> float:
        return self.step_minutes / 60.0

    def step_start_minute(self, t: int) -> int:
        return (self.day_start_minute + t * self.step_minutes) % MINUTES_PER_DAY

    def wall_clock(self, t: int) -> str:
        """Wall-clock label of the start of step t ('24:00' for t == num_steps)."""
        if t == self.num_steps:
            return "24:00"
        return format_hhmm(self.step_start_minute(t))


@dataclass(frozen=True)
class Trip:
    """One scheduled trip: depot departure to depot return, deadhead included.

    energy_per_step is the constant kWh drawn in each occupied step; the
    occupied window is [start_step, end_step] inclusive.
    """

    trip_id: str
    route_name: str
    start_step: int
    end_step: int
    energy_per_step: float
    miles: float = 0.0

    @property
    def num_steps(self) -> int:
        return self.end_step - self.start_step + 1

    @property
    def total_energy(self) -> float:
        return self.energy_per_step * self.num_steps

    def covers(self, t: int) -> bool:
        return self.start_step <= t <= self.end_step


@dataclass(frozen=True)
class Bus:
    """An electric bus with its battery limits, all in kWh."""

    bus_id: str
    model: str
    e_min: float
    e_max: float
    e_init: float


@dataclass(frozen=True)
class Charger:
    """A single depot charging port with fixed delivery rate."""

    charger_id: str
    power_kw: float
    energy_per_step: float  # kWh delivered in one occupied step


@dataclass(frozen=True)
class RateInterval:
    start_minute: int
    end_minute: int
    price_per_kwh: float


@dataclass(frozen=True)
class RateSchedule:
    """Ordered electricity price intervals partitioning the 24-hour day."""

    intervals: tuple[RateInterval, ...]

    def __post_init__(self) -> None:
        if not self.intervals:
            raise RateScheduleError("rate schedule has no intervals")
        cursor = 0
        for iv in self.intervals:
            if iv.start_minute != cursor:
                raise RateScheduleError(
                    f"rate interval starting {format_hhmm(iv.start_minute)} leaves a "
                    f"gap or overlap at {format_hhmm(cursor)}"
                )
            if iv.end_minute <= iv.start_minute:
                raise RateScheduleError(
                    f"rate interval {format_hhmm(iv.start_minute)}-"
                    f"{format_hhmm(iv.end_minute)} is empty or reversed"
                )
            if iv.price_per_kwh < 0:
                raise RateScheduleError(
                    f"negative price {iv.price_per_kwh} at {format_hhmm(iv.start_minute)}"
                )
            cursor = iv.end_minute
        if cursor != MINUTES_PER_DAY:
            raise RateScheduleError(
                f"rate intervals end at {format_hhmm(cursor)}, not 24:00"
            )

    def price_at_minute(self, minute: int) -> float:
        """Price of the interval containing `minute`; boundaries open intervals."""
        for iv in self.intervals:
            if iv.start_minute <= minute < iv.end_minute:
                return iv.price_per_kwh
        raise ValueError(f"minute {minute} outside the 24-hour day")


@dataclass(frozen=True)
class SolarForecast:
    """Per-step available on-site solar energy, kWh per step."""

    energy_per_step: tuple[float, ...]

    def __getitem__(self, t: int) -> float:
        return self.energy_per_step[t]

    def __len__(self) -> int:
        return len(self.energy_per_step)

    @property
    def total_kwh(self) -> float:
        return sum(self.energy_per_step)

    @classmethod
    def zeros(cls, num_steps: int) -> "SolarForecast":
        return cls(energy_per_step=(0.0,) * num_steps)


@dataclass(frozen=True)
class FleetInstance:
    """The complete daily scheduling problem input."""

    grid: TimeGrid
    trips: tuple[Trip, ...]
    buses: tuple[Bus, ...]
    chargers: tuple[Charger, ...]
    rates: RateSchedule
    solar: SolarForecast
    efficiency_kwh_per_mile: float = 1.25

    @property
    def num_steps(self) -> int:
        return self.grid.num_steps

    def without_solar(self) -> "FleetInstance":
        """The same instance with the solar forecast forced to zero."""
        return replace(self, solar=SolarForecast.zeros(self.grid.num_steps))


def price_at(rates: RateSchedule, t: int, grid: TimeGrid) -> float:
    """$/kWh applying to step t, read at the step's start instant."""
    if not (0 <= t < grid.num_steps):
        raise ValueError(f"step {t} outside grid of {grid.num_steps} steps")
    return rates.price_at_minute(grid.step_start_minute(t))


def price_vector(inst: FleetInstance) -> list[float]:
    return [price_at(inst.rates, t, inst.grid) for t in range(inst.num_steps)]


def _require(data: dict, key: str, context: str):
    if key not in data:
        raise InstanceParseError(f"{context}: missing required field '{key}'")
    return data[key]


def _number(value, context: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceParseError(f"{context}: expected a number, got {value!r}")
    return float(value)


def instance_from_dict(data: dict) -> FleetInstance:
    """Build a normalized FleetInstance from the documented JSON schema.

    Trip wall-clock windows are rounded onto the grid (start floored, end
    ceiled) so the discretized window never under-covers the real one, and
    trip miles become a constant per-step kWh draw.
    """
    if not isinstance(data, dict):
        raise InstanceParseError("instance: expected a JSON object at top level")

    step_minutes = _require(data, "step_minutes", "instance")
    if isinstance(step_minutes, bool) or not isinstance(step_minutes, int):
        raise InstanceParseError("step_minutes: expected an integer")
    grid = TimeGrid.from_step_minutes(step_minutes)
    T = grid.num_steps

    efficiency = data.get("efficiency_kwh_per_mile", 1.25)
    efficiency = _number(efficiency, "efficiency_kwh_per_mile")
    if efficiency <= 0:
        raise InstanceParseError("efficiency_kwh_per_mile must be positive")

    trips = []
    for pos, raw in enumerate(_require(data, "trips", "instance")):
        ctx = f"trips[{pos}]"
        trip_id = str(_require(raw, "id", ctx))
        route = str(_require(raw, "route", ctx))
        start_min = parse_hhmm(_require(raw, "start", ctx), field_name=f"{ctx}.start")
        end_min = parse_hhmm(_require(raw, "end", ctx), field_name=f"{ctx}.end")
        miles = _number(_require(raw, "miles", ctx), f"{ctx}.miles")
        if miles < 0:
            raise InstanceParseError(f"{ctx}.miles: negative mileage {miles}")
        if end_min <= start_min:
            raise TripWindowError(
                f"trip '{trip_id}' window {format_hhmm(start_min)}-"
                f"{format_hhmm(end_min)} crosses the day boundary or is empty"
            )
        start_step = start_min // step_minutes
        end_step = -(-end_min // step_minutes) - 1  # ceil(end/step) - 1
        if end_step >= T:
            raise TripWindowError(
                f"trip '{trip_id}' ends beyond the 24-hour grid"
            )
        n_steps = end_step - start_step + 1
        trips.append(
            Trip(
                trip_id=trip_id,
                route_name=route,
                start_step=start_step,
                end_step=end_step,
                energy_per_step=miles * efficiency / n_steps,
                miles=miles,
            )
        )

    buses = []
    for pos, raw in enumerate(_require(data, "buses", "instance")):
        ctx = f"buses[{pos}]"
        buses.append(
            Bus(
                bus_id=str(_require(raw, "id", ctx)),
                model=str(_require(raw, "model", ctx)),
                e_min=_number(_require(raw, "e_min_kwh", ctx), f"{ctx}.e_min_kwh"),
                e_max=_number(_require(raw, "e_max_kwh", ctx), f"{ctx}.e_max_kwh"),
                e_init=_number(_require(raw, "e_init_kwh", ctx), f"{ctx}.e_init_kwh"),
            )
        )

    chargers = []
    for pos, raw in enumerate(_require(data, "chargers", "instance")):
        ctx = f"chargers[{pos}]"
        power = _number(_require(raw, "power_kw", ctx), f"{ctx}.power_kw")
        if power <= 0:
            raise InstanceParseError(f"{ctx}.power_kw must be positive, got {power}")
        chargers.append(
            Charger(
                charger_id=str(_require(raw, "id", ctx)),
                power_kw=power,
                energy_per_step=power * step_minutes / 60.0,
            )
        )

    intervals = []
    for pos, raw in enumerate(_require(data, "rates", "instance")):
        ctx = f"rates[{pos}]"
        start_min = parse_hhmm(_require(raw, "start", ctx), field_name=f"{ctx}.start")
        end_min = parse_hhmm(_require(raw, "end", ctx), field_name=f"{ctx}.end")
        if end_min == 0:
            end_min = MINUTES_PER_DAY
        price = _number(
            _require(raw, "price_per_kwh", ctx), f"{ctx}.price_per_kwh"
        )
        intervals.append(RateInterval(start_min, end_min, price))
    intervals.sort(key=lambda iv: iv.start_minute)
    rates = RateSchedule(intervals=tuple(intervals))

    solar_kw = data.get("solar_kw")
    if solar_kw is None:
        solar = SolarForecast.zeros(T)
    else:
        if len(solar_kw) != T:
            raise InstanceParseError(
                f"solar_kw: expected {T} entries (one per step), got {len(solar_kw)}"
            )
        per_step = []
        for pos, kw in enumerate(solar_kw):
            kw = _number(kw, f"solar_kw[{pos}]")
            if kw < 0:
                raise InstanceParseError(f"solar_kw[{pos}]: negative generation {kw}")
            per_step.append(kw * step_minutes / 60.0)
        solar = SolarForecast(energy_per_step=tuple(per_step))

    return FleetInstance(
        grid=grid,
        trips=tuple(trips),
        buses=tuple(buses),
        chargers=tuple(chargers),
        rates=rates,
        solar=solar,
        efficiency_kwh_per_mile=efficiency,
    )


def instance_to_dict(inst: FleetInstance) -> dict:
    """Serialize back to the documented schema; load_instance round-trips it."""
    step = inst.grid.step_minutes
    return {
        "step_minutes": step,
        "efficiency_kwh_per_mile": inst.efficiency_kwh_per_mile,
        "trips": [
            {
                "id": trip.trip_id,
                "route": trip.route_name,
                "start": format_hhmm(trip.start_step * step),
                "end": format_hhmm((trip.end_step + 1) * step),
                "miles": trip.miles,
            }
            for trip in inst.trips
        ],
        "buses": [
            {
                "id": bus.bus_id,
                "model": bus.model,
                "e_min_kwh": bus.e_min,
                "e_max_kwh": bus.e_max,
                "e_init_kwh": bus.e_init,
            }
            for bus in inst.buses
        ],
        "chargers": [
            {"id": ch.charger_id, "power_kw": ch.power_kw} for ch in inst.chargers
        ],
        "rates": [
            {
                "start": format_hhmm(iv.start_minute),
                "end": format_hhmm(iv.end_minute),
                "price_per_kwh": iv.price_per_kwh,
            }
            for iv in inst.rates.intervals
        ],
        "solar_kw": [
            kwh * 60.0 / step for kwh in inst.solar.energy_per_step
        ],
    }


def load_instance(path: str | Path) -> FleetInstance:
    """Load and normalize a fleet instance from a JSON file."""
    raw = Path(path).read_text()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(f"{path}: invalid JSON ({exc})") from exc
    return instance_from_dict(data)


def save_instance(inst: FleetInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2) + "\n")


def validate_instance(inst: FleetInstance) -> list[str]:
    """Check type invariants plus a quick coverage necessary condition.

    Returns a list of human-readable defects; empty means the instance is
    structurally sound. Never raises.
    """
    defects: list[str] = []
    T = inst.grid.num_steps

    seen_trip_ids: set[str] = set()
    for trip in inst.trips:
        if trip.trip_id in seen_trip_ids:
            defects.append(f"duplicate trip id '{trip.trip_id}'")
        seen_trip_ids.add(trip.trip_id)
        if not (0 <= trip.start_step <= trip.end_step < T):
            defects.append(
                f"trip '{trip.trip_id}' window [{trip.start_step}, {trip.end_step}] "
                f"outside grid of {T} steps"
            )
        if trip.energy_per_step < 0:
            defects.append(
                f"trip '{trip.trip_id}' has negative energy per step "
                f"{trip.energy_per_step}"
            )

    seen_bus_ids: set[str] = set()
    for bus in inst.buses:
        if bus.bus_id in seen_bus_ids:
            defects.append(f"duplicate bus id '{bus.bus_id}'")
        seen_bus_ids.add(bus.bus_id)
        if not (0 <= bus.e_min <= bus.e_init <= bus.e_max):
            defects.append(
                f"bus '{bus.bus_id}' violates 0 <= e_min <= e_init <= e_max "
                f"({bus.e_min}, {bus.e_init}, {bus.e_max})"
            )

    seen_charger_ids: set[str] = set()
    for ch in inst.chargers:
        if ch.charger_id in seen_charger_ids:
            defects.append(f"duplicate charger id '{ch.charger_id}'")
        seen_charger_ids.add(ch.charger_id)
        if ch.power_kw <= 0:
            defects.append(f"charger '{ch.charger_id}' has non-positive power")

    if len(inst.solar) != T:
        defects.append(
            f"solar forecast has {len(inst.solar)} entries, grid has {T} steps"
        )
    else:
        for t, g in enumerate(inst.solar.energy_per_step):
            if g < 0:
                defects.append(f"solar forecast negative at step {t}")
                break

    # Coverage necessary condition: concurrent trips can never exceed the
    # fleet size, otherwise the one-bus-per-trip requirement is unsatisfiable.
    num_buses = len(inst.buses)
    concurrency = [0] * T
    for trip in inst.trips:
        if 0 <= trip.start_step <= trip.end_step < T:
            for t in range(trip.start_step, trip.end_step + 1):
                concurrency[t] += 1
    for t, count in enumerate(concurrency):
        if count > num_buses:
            defects.append(
                f"coverage impossible at step {t}: {count} concurrent trips, "
                f"{num_buses} buses"
            )
            break

    return defects
