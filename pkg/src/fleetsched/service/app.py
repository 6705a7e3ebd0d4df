"""FastAPI application exposing solve, compare, validate, baseline and MPS
export over HTTP. The CLI is a thin client of these endpoints."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..baseline import baseline_charge_on_return
from ..bnb import SolveConfig
from ..milp import assemble
from ..model import FleetInstance, InstanceError, instance_from_dict, validate_instance
from ..mps import export_mps
from ..pipeline import compare_scenarios, savings_vs_baseline, solve_instance
from ..schedule import (
    schedule_from_csv,
    schedule_to_csv,
    timeseries_from_csv,
    timeseries_to_csv,
    validate,
)
from . import schemas


def _ingest(instance: schemas.InstanceIn, require_sound: bool = True) -> FleetInstance:
    """Instance payload -> validated FleetInstance, or HTTP 422."""
    try:
        inst = instance_from_dict(instance.model_dump(exclude_none=True))
    except InstanceError as exc:
        raise HTTPException(status_code=422, detail={"errors": [str(exc)]})
    if require_sound:
        defects = validate_instance(inst)
        if defects:
            raise HTTPException(status_code=422, detail={"defects": defects})
    return inst


def _solve_config(options: schemas.SolveOptions) -> SolveConfig:
    try:
        return SolveConfig(
            abs_gap_tol=options.abs_gap,
            rel_gap_tol=options.rel_gap,
            node_limit=options.node_limit,
            time_limit=options.time_limit,
            branch_rule=options.branch_rule,
            node_order=options.node_order,
        )
    except ValueError as exc:
        raise HTTPException(status_code=422, detail={"errors": [str(exc)]})


def create_app() -> FastAPI:
    app = FastAPI(
        title="fleetsched",
        description=(
            "Minimal-cost daily route assignment and charge scheduling for "
            "electric bus fleets"
        ),
        version=__version__,
    )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/api/solve", response_model=schemas.SolveResponse)
    def solve(request: schemas.SolveRequest) -> schemas.SolveResponse:
        inst = _ingest(request.instance)
        config = _solve_config(request.options)
        outcome = solve_instance(
            inst, config=config, no_solar=request.options.no_solar
        )
        result = outcome.result
        target = inst.without_solar() if request.options.no_solar else inst
        schedule_csv = timeseries_csv = None
        if outcome.schedule is not None:
            schedule_csv = schedule_to_csv(outcome.schedule, target)
            timeseries_csv = timeseries_to_csv(outcome.schedule, target)
        return schemas.SolveResponse(
            summary=schemas.SolveSummary(
                status=result.status,
                cost=result.objective,
                bound=None if result.bound in (float("inf"), float("-inf"))
                else result.bound,
                gap=result.gap,
                nodes=result.nodes,
                seconds=result.seconds,
            ),
            schedule_csv=schedule_csv,
            timeseries_csv=timeseries_csv,
        )

    @app.post("/api/compare", response_model=schemas.CompareResponse)
    def compare(request: schemas.SolveRequest) -> schemas.CompareResponse:
        inst = _ingest(request.instance)
        config = _solve_config(request.options)
        scenarios = compare_scenarios(inst, config=config)

        rows, artifacts, stats = [], {}, {}
        for s in scenarios:
            rows.append(
                schemas.CompareRow(
                    label=s.label,
                    feasible=s.feasible,
                    cost=s.cost,
                    note=s.stats.get("reason") or s.stats.get("status"),
                )
            )
            stats[s.label] = {
                k: v for k, v in s.stats.items() if k not in ("reason",)
            }
            if s.schedule is not None:
                target = inst if s.label == "with-solar" else inst.without_solar()
                artifacts[s.label] = schemas.ScenarioArtifacts(
                    schedule_csv=schedule_to_csv(s.schedule, target),
                    timeseries_csv=timeseries_to_csv(s.schedule, target),
                )
        return schemas.CompareResponse(
            rows=rows,
            savings_pct=savings_vs_baseline(scenarios),
            artifacts=artifacts,
            stats=stats,
        )

    @app.post("/api/validate", response_model=schemas.ValidateResponse)
    def validate_schedule(
        request: schemas.ValidateRequest,
    ) -> schemas.ValidateResponse:
        inst = _ingest(request.instance, require_sound=False)
        try:
            grid = solar = None
            if request.timeseries_csv:
                grid, solar = timeseries_from_csv(request.timeseries_csv, inst)
            sched = schedule_from_csv(
                request.schedule_csv, inst, grid_energy=grid, solar_energy=solar
            )
        except (ValueError, KeyError) as exc:
            raise HTTPException(status_code=422, detail={"errors": [str(exc)]})
        report = validate(sched, inst)
        return schemas.ValidateResponse(
            feasible=report.feasible,
            violations=[
                schemas.ViolationOut(
                    family=v.family,
                    where=v.where,
                    lhs=v.lhs,
                    rhs=v.rhs,
                    message=v.message,
                )
                for v in report.violations
            ],
        )

    @app.post("/api/baseline", response_model=schemas.BaselineResponse)
    def baseline(request: schemas.BaselineRequest) -> schemas.BaselineResponse:
        inst = _ingest(request.instance)
        result = baseline_charge_on_return(inst)
        if not result.feasible:
            return schemas.BaselineResponse(
                feasible=False,
                cost=None,
                reason=result.reason,
                schedule_csv=None,
                timeseries_csv=None,
            )
        return schemas.BaselineResponse(
            feasible=True,
            cost=result.schedule.total_cost,
            reason=None,
            schedule_csv=schedule_to_csv(result.schedule, inst),
            timeseries_csv=timeseries_to_csv(result.schedule, inst),
        )

    @app.post("/api/export-mps", response_model=schemas.ExportMpsResponse)
    def export(request: schemas.ExportMpsRequest) -> schemas.ExportMpsResponse:
        inst = _ingest(request.instance)
        if request.no_solar:
            inst = inst.without_solar()
        doc = export_mps(assemble(inst))
        return schemas.ExportMpsResponse(mps=doc.text, name_map=doc.name_map)

    return app


app = create_app()
