"""Pydantic request/response models for the scheduling service."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class TripIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    route: str
    start: str  # "HH:MM" depot departure
    end: str  # "HH:MM" depot return, deadhead included
    miles: float


class BusIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    model: str
    e_min_kwh: float
    e_max_kwh: float
    e_init_kwh: float


class ChargerIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    power_kw: float


class RateIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    start: str
    end: str
    price_per_kwh: float


class InstanceIn(BaseModel):
    """The documented fleet-instance schema."""

    model_config = ConfigDict(extra="forbid")

    step_minutes: int
    efficiency_kwh_per_mile: float = 1.25
    trips: list[TripIn]
    buses: list[BusIn]
    chargers: list[ChargerIn]
    rates: list[RateIn]
    solar_kw: list[float] | None = None


class SolveOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    no_solar: bool = False
    abs_gap: float = Field(default=1e-6, ge=0.0)
    rel_gap: float = Field(default=0.0, ge=0.0)
    time_limit: float | None = None
    node_limit: int | None = None
    branch_rule: str = "most-fractional"
    node_order: str = "best-bound"


class SolveRequest(BaseModel):
    instance: InstanceIn
    options: SolveOptions = SolveOptions()


class SolveSummary(BaseModel):
    status: str
    cost: float | None
    bound: float | None
    gap: float | None
    nodes: int
    seconds: float


class SolveResponse(BaseModel):
    summary: SolveSummary
    schedule_csv: str | None
    timeseries_csv: str | None


class CompareRow(BaseModel):
    label: str
    feasible: bool
    cost: float | None
    note: str | None = None


class ScenarioArtifacts(BaseModel):
    schedule_csv: str
    timeseries_csv: str


class CompareResponse(BaseModel):
    rows: list[CompareRow]
    savings_pct: dict[str, float | None]
    artifacts: dict[str, ScenarioArtifacts]
    stats: dict[str, dict]


class ValidateRequest(BaseModel):
    instance: InstanceIn
    schedule_csv: str
    timeseries_csv: str | None = None


class ViolationOut(BaseModel):
    family: str
    where: str
    lhs: float
    rhs: float
    message: str


class ValidateResponse(BaseModel):
    feasible: bool
    violations: list[ViolationOut]


class BaselineRequest(BaseModel):
    instance: InstanceIn


class BaselineResponse(BaseModel):
    feasible: bool
    cost: float | None
    reason: str | None
    schedule_csv: str | None
    timeseries_csv: str | None


class ExportMpsRequest(BaseModel):
    instance: InstanceIn
    no_solar: bool = False


class ExportMpsResponse(BaseModel):
    mps: str
    name_map: dict[str, str] | None


class HealthResponse(BaseModel):
    status: str
    version: str
