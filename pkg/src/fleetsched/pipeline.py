"""End-to-end runs: solve an instance, or compare dispatch regimes.

One scenario run assembles the problem, seeds branch-and-bound with the
charge-on-return schedule when that policy succeeds, solves, decodes, and
checks the decoded schedule against the independent validator before
reporting it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .baseline import baseline_charge_on_return
from .bnb import (
    STATUS_FEASIBLE_GAP,
    STATUS_INFEASIBLE,
    STATUS_LIMIT,
    STATUS_OPTIMAL,
    MipResult,
    SolveConfig,
    branch_and_bound,
)
from .milp import VariableIndex, assemble
from .model import FleetInstance, validate_instance
from .schedule import Schedule, decode, encode_schedule, make_polisher, validate

LABEL_BASELINE = "baseline"
LABEL_NO_SOLAR = "no-solar"
LABEL_WITH_SOLAR = "with-solar"


@dataclass
class SolveOutcome:
    result: MipResult
    schedule: Schedule | None
    index: VariableIndex


@dataclass
class ScenarioResult:
    label: str
    feasible: bool
    cost: float | None
    schedule: Schedule | None
    stats: dict


def solve_instance(
    inst: FleetInstance,
    config: SolveConfig | None = None,
    no_solar: bool = False,
    warm_start_from_baseline: bool = True,
) -> SolveOutcome:
    """Solve one instance to the configured gap and decode the result."""
    target = inst.without_solar() if no_solar else inst
    prob = assemble(target)
    idx = prob.index

    warm = None
    if warm_start_from_baseline:
        base = baseline_charge_on_return(target)
        if base.feasible:
            warm = encode_schedule(base.schedule, target, idx)

    result = branch_and_bound(
        prob,
        config=config,
        warm_start=warm,
        polisher=make_polisher(target, idx),
    )

    schedule = None
    if result.values is not None:
        schedule = decode(result, target, idx)
        report = validate(schedule, target)
        if not report.feasible:
            raise RuntimeError(
                "solver produced a schedule the validator rejects:\n"
                + report.describe()
            )
    return SolveOutcome(result=result, schedule=schedule, index=idx)


def compare_scenarios(
    inst: FleetInstance, config: SolveConfig | None = None
) -> list[ScenarioResult]:
    """Baseline, no-solar optimum and with-solar optimum, in that order.

    The baseline is costed without solar — the status quo it stands in for
    does not exploit on-site generation — which also makes the three costs
    a monotone chain whenever all three succeed.
    """
    scenarios: list[ScenarioResult] = []

    base = baseline_charge_on_return(inst.without_solar())
    if base.feasible:
        scenarios.append(
            ScenarioResult(
                label=LABEL_BASELINE,
                feasible=True,
                cost=base.schedule.total_cost,
                schedule=base.schedule,
                stats={"policy": "charge-on-return"},
            )
        )
    else:
        scenarios.append(
            ScenarioResult(
                label=LABEL_BASELINE,
                feasible=False,
                cost=None,
                schedule=None,
                stats={"policy": "charge-on-return", "reason": base.reason},
            )
        )

    for label, no_solar in ((LABEL_NO_SOLAR, True), (LABEL_WITH_SOLAR, False)):
        outcome = solve_instance(inst, config=config, no_solar=no_solar)
        result = outcome.result
        ok = result.status in (STATUS_OPTIMAL, STATUS_FEASIBLE_GAP) or (
            result.status == STATUS_LIMIT and outcome.schedule is not None
        )
        scenarios.append(
            ScenarioResult(
                label=label,
                feasible=ok and result.status != STATUS_INFEASIBLE,
                cost=result.objective if ok else None,
                schedule=outcome.schedule,
                stats={
                    "status": result.status,
                    "bound": result.bound,
                    "gap": result.gap,
                    "nodes": result.nodes,
                    "seconds": result.seconds,
                },
            )
        )
    return scenarios


def savings_vs_baseline(scenarios: list[ScenarioResult]) -> dict[str, float | None]:
    """Percent cost reduction of each solved case against the baseline."""
    baseline = next(s for s in scenarios if s.label == LABEL_BASELINE)
    out: dict[str, float | None] = {}
    for s in scenarios:
        if s.label == LABEL_BASELINE:
            continue
        if (
            baseline.cost is None
            or s.cost is None
            or baseline.cost <= 0
        ):
            out[s.label] = None
        else:
            out[s.label] = 100.0 * (baseline.cost - s.cost) / baseline.cost
    return out


def ensure_valid(inst: FleetInstance) -> list[str]:
    return validate_instance(inst)
