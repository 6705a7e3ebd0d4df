"""Command-line client for the scheduling service.

Every command talks to the HTTP API. By default the service runs
in-process (no network, fully offline); pass --server to point the same
commands at a remote deployment. `fleetsched serve` starts such a
deployment with uvicorn.

Exit codes: 0 success (including a solve stopped at its gap or limit with
an incumbent), 1 validation found violations, 2 infeasible, 3 limit hit
with no incumbent, 64 usage error, 65 instance defects.
"""

from __future__ import annotations

import asyncio
import json
import os
import sys
from pathlib import Path

import click
import httpx

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INFEASIBLE = 2
EXIT_NO_INCUMBENT = 3
EXIT_USAGE = 64
EXIT_DEFECTS = 65


class InProcessClient:
    """Synchronous facade over the ASGI app: the offline default transport.

    Each command issues one request, so a fresh event loop per call is
    cheap and keeps the CLI free of a running server dependency.
    """

    def __init__(self):
        from .service.app import app

        self._app = app

    def post(self, url: str, json=None) -> httpx.Response:
        return asyncio.run(self._request("POST", url, json))

    def get(self, url: str) -> httpx.Response:
        return asyncio.run(self._request("GET", url, None))

    async def _request(self, method: str, url: str, payload) -> httpx.Response:
        transport = httpx.ASGITransport(app=self._app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://fleetsched.local", timeout=None
        ) as client:
            return await client.request(method, url, json=payload)

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        return False


def make_client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=None)
    return InProcessClient()


def _read_instance(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise click.UsageError(f"instance file not found: {path}")
    except json.JSONDecodeError as exc:
        click.echo(f"instance is not valid JSON: {exc}", err=True)
        sys.exit(EXIT_DEFECTS)


def _write_atomic(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(content)
    os.replace(tmp, path)


def _fail_defects(response: httpx.Response) -> None:
    """Print a 422 payload and exit with the defects code."""
    detail = response.json().get("detail")
    if isinstance(detail, dict):
        for message in detail.get("defects", []) + detail.get("errors", []):
            click.echo(f"defect: {message}", err=True)
    else:
        click.echo(f"request rejected: {detail}", err=True)
    sys.exit(EXIT_DEFECTS)


def _options_payload(gap, abs_gap, time_limit, node_limit, no_solar=False) -> dict:
    options: dict = {"no_solar": no_solar}
    if gap is not None:
        options["rel_gap"] = gap
    if abs_gap is not None:
        options["abs_gap"] = abs_gap
    if time_limit is not None:
        options["time_limit"] = time_limit
    if node_limit is not None:
        options["node_limit"] = node_limit
    return options


@click.group()
@click.option("--server", default=None, help="Base URL of a running service; "
              "default runs the service in-process.")
@click.option("--quiet", is_flag=True, help="Suppress informational output.")
@click.option("--seed", type=int, default=None,
              help="Seed for randomized test tooling; unused by the "
              "commands themselves.")
@click.pass_context
def cli(ctx: click.Context, server: str | None, quiet: bool, seed: int | None):
    """Route assignment and charge scheduling for electric bus fleets."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server
    ctx.obj["quiet"] = quiet
    ctx.obj["seed"] = seed


def _echo(ctx: click.Context, message: str) -> None:
    if not ctx.obj.get("quiet"):
        click.echo(message)


@cli.command()
@click.option("--instance", required=True, help="Path to the instance JSON.")
@click.option("--no-solar", is_flag=True, help="Force the solar forecast to zero.")
@click.option("--gap", type=float, default=None, help="Relative gap tolerance.")
@click.option("--abs-gap", type=float, default=None, help="Absolute gap tolerance ($).")
@click.option("--time-limit", type=float, default=None, help="Solve time limit (s).")
@click.option("--node-limit", type=int, default=None, help="Node limit.")
@click.option("--out", default=None, help="Directory for schedule.csv, "
              "timeseries.csv and summary.json.")
@click.pass_context
def solve(ctx, instance, no_solar, gap, abs_gap, time_limit, node_limit, out):
    """Solve one instance to optimality (or the configured gap)."""
    payload = {
        "instance": _read_instance(instance),
        "options": _options_payload(gap, abs_gap, time_limit, node_limit, no_solar),
    }
    with make_client(ctx.obj["server"]) as client:
        response = client.post("/api/solve", json=payload)
    if response.status_code == 422:
        _fail_defects(response)
    response.raise_for_status()
    body = response.json()
    summary = body["summary"]

    _echo(ctx, f"status:  {summary['status']}")
    if summary["cost"] is not None:
        _echo(ctx, f"cost:    ${summary['cost']:.5f}")
        _echo(ctx, f"bound:   ${summary['bound']:.5f}")
    _echo(ctx, f"nodes:   {summary['nodes']}")
    _echo(ctx, f"seconds: {summary['seconds']:.3f}")

    if out:
        out_dir = Path(out)
        _write_atomic(
            out_dir / "summary.json",
            json.dumps(summary, indent=2, sort_keys=True) + "\n",
        )
        if body["schedule_csv"]:
            _write_atomic(out_dir / "schedule.csv", body["schedule_csv"])
            _write_atomic(out_dir / "timeseries.csv", body["timeseries_csv"])

    if summary["status"] == "infeasible":
        sys.exit(EXIT_INFEASIBLE)
    if summary["status"] == "limit-hit" and summary["cost"] is None:
        sys.exit(EXIT_NO_INCUMBENT)
    if summary["status"] == "unbounded":
        sys.exit(EXIT_INFEASIBLE)
    sys.exit(EXIT_OK)


@cli.command()
@click.option("--instance", required=True, help="Path to the instance JSON.")
@click.option("--gap", type=float, default=None, help="Relative gap tolerance.")
@click.option("--abs-gap", type=float, default=None, help="Absolute gap tolerance ($).")
@click.option("--time-limit", type=float, default=None,
              help="Time limit per optimized scenario (s).")
@click.option("--out", default=None, help="Directory for compare.json and "
              "per-scenario CSV artifacts.")
@click.pass_context
def compare(ctx, instance, gap, abs_gap, time_limit, out):
    """Compare baseline, no-solar and with-solar daily costs."""
    payload = {
        "instance": _read_instance(instance),
        "options": _options_payload(gap, abs_gap, time_limit, None),
    }
    with make_client(ctx.obj["server"]) as client:
        response = client.post("/api/compare", json=payload)
    if response.status_code == 422:
        _fail_defects(response)
    response.raise_for_status()
    body = response.json()

    width = max(len(r["label"]) for r in body["rows"])
    _echo(ctx, f"{'case'.ljust(width)}  {'daily cost':>12}  savings vs baseline")
    for row in body["rows"]:
        label = row["label"].ljust(width)
        if row["cost"] is None:
            _echo(ctx, f"{label}  {'n/a':>12}  ({row.get('note') or 'failed'})")
            continue
        savings = body["savings_pct"].get(row["label"])
        tail = "" if savings is None else f"{savings:.1f}%"
        _echo(ctx, f"{label}  ${row['cost']:>11.5f}  {tail}")

    if out:
        out_dir = Path(out)
        report = {
            "rows": body["rows"],
            "savings_pct": body["savings_pct"],
            "stats": body["stats"],
        }
        _write_atomic(
            out_dir / "compare.json", json.dumps(report, indent=2, sort_keys=True) + "\n"
        )
        for label, artifacts in body["artifacts"].items():
            slug = label.replace("-", "_")
            _write_atomic(out_dir / f"{slug}_schedule.csv", artifacts["schedule_csv"])
            _write_atomic(
                out_dir / f"{slug}_timeseries.csv", artifacts["timeseries_csv"]
            )

    solved = [r for r in body["rows"] if r["label"] != "baseline"]
    if any(not r["feasible"] for r in solved):
        sys.exit(EXIT_INFEASIBLE)
    sys.exit(EXIT_OK)


@cli.command()
@click.option("--instance", required=True, help="Path to the instance JSON.")
@click.option("--schedule", "schedule_path", required=True,
              help="Schedule CSV to check.")
@click.option("--timeseries", "timeseries_path", default=None,
              help="Optional fleet time-series CSV (grid/solar split).")
@click.pass_context
def validate(ctx, instance, schedule_path, timeseries_path):
    """Check a schedule CSV against every constraint family."""
    try:
        schedule_csv = Path(schedule_path).read_text()
    except FileNotFoundError:
        raise click.UsageError(f"schedule file not found: {schedule_path}")
    payload = {
        "instance": _read_instance(instance),
        "schedule_csv": schedule_csv,
    }
    if timeseries_path:
        payload["timeseries_csv"] = Path(timeseries_path).read_text()
    with make_client(ctx.obj["server"]) as client:
        response = client.post("/api/validate", json=payload)
    if response.status_code == 422:
        _fail_defects(response)
    response.raise_for_status()
    body = response.json()
    if body["feasible"]:
        _echo(ctx, "feasible: all constraint families satisfied")
        sys.exit(EXIT_OK)
    for v in body["violations"]:
        click.echo(
            f"({v['family']}) {v['where']}: {v['message']} "
            f"[lhs={v['lhs']:.9g}, rhs={v['rhs']:.9g}]",
            err=True,
        )
    sys.exit(EXIT_VIOLATIONS)


@cli.command()
@click.option("--instance", required=True, help="Path to the instance JSON.")
@click.option("--out", default=None, help="Directory for baseline artifacts.")
@click.pass_context
def baseline(ctx, instance, out):
    """Run the charge-on-return dispatch policy."""
    payload = {"instance": _read_instance(instance)}
    with make_client(ctx.obj["server"]) as client:
        response = client.post("/api/baseline", json=payload)
    if response.status_code == 422:
        _fail_defects(response)
    response.raise_for_status()
    body = response.json()
    if not body["feasible"]:
        click.echo(f"baseline infeasible: {body['reason']}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    _echo(ctx, f"cost: ${body['cost']:.5f}")
    if out:
        out_dir = Path(out)
        _write_atomic(out_dir / "schedule.csv", body["schedule_csv"])
        _write_atomic(out_dir / "timeseries.csv", body["timeseries_csv"])
    sys.exit(EXIT_OK)


@cli.command("export-mps")
@click.option("--instance", required=True, help="Path to the instance JSON.")
@click.option("--no-solar", is_flag=True, help="Force the solar forecast to zero.")
@click.option("--out", default=None, help="Directory for problem.mps (and "
              "problem.names.json when short names were needed).")
@click.pass_context
def export_mps_cmd(ctx, instance, no_solar, out):
    """Export the assembled problem in MPS format."""
    payload = {"instance": _read_instance(instance), "no_solar": no_solar}
    with make_client(ctx.obj["server"]) as client:
        response = client.post("/api/export-mps", json=payload)
    if response.status_code == 422:
        _fail_defects(response)
    response.raise_for_status()
    body = response.json()
    if out:
        out_dir = Path(out)
        _write_atomic(out_dir / "problem.mps", body["mps"])
        if body["name_map"]:
            _write_atomic(
                out_dir / "problem.names.json",
                json.dumps(body["name_map"], indent=2, sort_keys=True) + "\n",
            )
    else:
        click.echo(body["mps"], nl=False)
    sys.exit(EXIT_OK)


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8337, show_default=True)
def serve(host, port):
    """Run the scheduling service with uvicorn."""
    import uvicorn

    uvicorn.run("fleetsched.service.app:app", host=host, port=port)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False, obj={})
        return EXIT_OK
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        click.echo("run with --help for usage", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        return 130


if __name__ == "__main__":
    sys.exit(main())
