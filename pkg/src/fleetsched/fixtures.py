"""Bundled data fixtures and the desk-scale experiment instance.

The rate table is PG&E's E-20 time-of-use structure; the routes table is
the Marguerite shuttle's weekday electric-route summary (15 routes, 352
trips, 1431.50 miles per day). The solar fixture is a synthetic 1 MW
bell-shaped day, not utility telemetry.
"""

from __future__ import annotations

import json
import math
from importlib import resources

from .model import FleetInstance, instance_from_dict, parse_hhmm

E20_RATES = [
    {"start": "00:00", "end": "08:30", "price_per_kwh": 0.08422},
    {"start": "08:30", "end": "12:00", "price_per_kwh": 0.11356},
    {"start": "12:00", "end": "18:00", "price_per_kwh": 0.16127},
    {"start": "18:00", "end": "21:30", "price_per_kwh": 0.11356},
    {"start": "21:30", "end": "24:00", "price_per_kwh": 0.08422},
]

MARGUERITE_ROUTES = [
    {"route": "C Line", "daily_trips": 33, "trip_miles": 7.00},
    {"route": "C Limited", "daily_trips": 11, "trip_miles": 4.60},
    {"route": "MC Line (AM/PM)", "daily_trips": 46, "trip_miles": 3.00},
    {"route": "MC Line (Mid Day)", "daily_trips": 11, "trip_miles": 5.10},
    {"route": "P Line (AM/PM)", "daily_trips": 56, "trip_miles": 2.50},
    {"route": "P Line (Mid Day)", "daily_trips": 11, "trip_miles": 4.00},
    {"route": "Research Park (AM/PM)", "daily_trips": 24, "trip_miles": 10.40},
    {"route": "X Express (AM)", "daily_trips": 12, "trip_miles": 1.20},
    {"route": "X Line", "daily_trips": 44, "trip_miles": 4.60},
    {"route": "X Limited (AM)", "daily_trips": 10, "trip_miles": 2.00},
    {"route": "X Limited (PM)", "daily_trips": 10, "trip_miles": 1.50},
    {"route": "Y Express (PM)", "daily_trips": 20, "trip_miles": 1.20},
    {"route": "Y Line", "daily_trips": 44, "trip_miles": 4.60},
    {"route": "Y Limited (AM)", "daily_trips": 10, "trip_miles": 2.40},
    {"route": "Y Limited (PM)", "daily_trips": 10, "trip_miles": 2.00},
]

CHARGER_PORT_KW = 40.0  # one port of a dual-port depot charger


def fixture_path(name: str):
    return resources.files("fleetsched").joinpath("fixtures").joinpath(name)


def load_fixture(name: str) -> dict:
    with fixture_path(name).open() as handle:
        return json.load(handle)


def bell_solar_kw(
    step_minutes: int,
    peak_kw: float = 1000.0,
    ramp_up: str = "07:00",
    peak_at: str = "12:00",
    ramp_down: str = "19:00",
) -> list[float]:
    """Piecewise-linear solar day: zero, ramp to peak, ramp back to zero."""
    up = parse_hhmm(ramp_up)
    top = parse_hhmm(peak_at)
    down = parse_hhmm(ramp_down)
    out = []
    for t in range(1440 // step_minutes):
        minute = t * step_minutes
        if minute <= up or minute >= down:
            out.append(0.0)
        elif minute <= top:
            out.append(peak_kw * (minute - up) / (top - up))
        else:
            out.append(peak_kw * (down - minute) / (down - top))
    return out


def quantize_trip_kwh(miles: float, efficiency: float, quantum_kwh: float) -> float:
    """Nearest positive whole number of charge quanta for a trip's energy.

    The day-repeatability constraint makes a trip schedulable only when its
    energy is an exact multiple of the per-step charge quantum, so synthetic
    instances fold the residual into deadhead mileage.
    """
    raw = miles * efficiency
    m = max(1, round(raw / quantum_kwh))
    return m * quantum_kwh


def marguerite_desk_instance(
    num_buses: int = 6,
    num_chargers: int = 12,
    num_trips: int = 60,
    solar_peak_kw: float = 1000.0,
    step_minutes: int = 5,
    efficiency: float = 1.25,
) -> FleetInstance:
    """Synthetic desk-scale fleet day built from the bundled fixtures.

    Buses alternate the two battery sizes of the real fleet (197 / 324
    kWh), chargers are 40 kW ports, and trips cycle round-robin through
    the route table with 12 mph service speed and staggered departures.
    Trip mileage is padded (deadhead) so each trip's energy is a whole
    number of charge quanta.
    """
    quantum = CHARGER_PORT_KW * step_minutes / 60.0
    routes = MARGUERITE_ROUTES

    trips = []
    stagger = max(step_minutes, (16 * 60) // max(num_trips, 1))
    for j in range(num_trips):
        route = routes[j % len(routes)]
        kwh = quantize_trip_kwh(route["trip_miles"], efficiency, quantum)
        miles = kwh / efficiency
        duration = max(step_minutes, math.ceil(route["trip_miles"] * 5))  # 12 mph
        start_minute = 300 + j * stagger  # departures from 05:00
        end_minute = start_minute + duration
        if end_minute >= 1440 - step_minutes:
            raise ValueError("too many trips to stagger inside one day")
        trips.append(
            {
                "id": f"T{j:03d}",
                "route": route["route"],
                "start": f"{start_minute // 60:02d}:{start_minute % 60:02d}",
                "end": f"{end_minute // 60:02d}:{end_minute % 60:02d}",
                "miles": miles,
            }
        )

    buses = []
    for k in range(num_buses):
        cap = 197.0 if k % 2 == 0 else 324.0
        model = "K7" if k % 2 == 0 else "K9"
        buses.append(
            {
                "id": f"B{k:02d}",
                "model": model,
                "e_min_kwh": round(0.2 * cap, 1),
                "e_max_kwh": cap,
                # Overnight the fleet sits at partial charge; headroom below
                # full lets the dispatcher pre-charge in the off-peak hours.
                "e_init_kwh": round(0.6 * cap, 1),
            }
        )

    chargers = [
        {"id": f"P{n:02d}", "power_kw": CHARGER_PORT_KW} for n in range(num_chargers)
    ]

    data = {
        "step_minutes": step_minutes,
        "efficiency_kwh_per_mile": efficiency,
        "trips": trips,
        "buses": buses,
        "chargers": chargers,
        "rates": E20_RATES,
        "solar_kw": bell_solar_kw(step_minutes, solar_peak_kw),
    }
    return instance_from_dict(data)


def write_fixture_files(directory) -> None:
    """Regenerate the bundled fixture JSON files (used at build time)."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "marguerite_rates.json").write_text(
        json.dumps({"rates": E20_RATES}, indent=2) + "\n"
    )
    (directory / "marguerite_routes.json").write_text(
        json.dumps({"routes": MARGUERITE_ROUTES}, indent=2) + "\n"
    )
    (directory / "solar_1mw.json").write_text(
        json.dumps(
            {
                "step_minutes": 5,
                "peak_kw": 1000.0,
                "solar_kw": bell_solar_kw(5, 1000.0),
            },
            indent=2,
        )
        + "\n"
    )
