"""Command-line interface.

``validate`` and ``replay`` run the engine in-process (they are batch
operations); ``serve`` starts the HTTP service; the ``session`` group is
a thin client over a running service, so interactive state lives in one
place. Exit code 2 signals a validation failure.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import httpx

from .errors import SentinelError
from .replay import run_replay
from .scenario import load_scenario_file

DEFAULT_SERVER = "http://127.0.0.1:8000"


@click.group()
@click.option("--seed", type=int, default=None, help="Reserved for Monte Carlo oracles.")
@click.pass_context
def main(ctx, seed):
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed


@main.command()
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
def validate(scenario):
    """Load and validate a scenario file."""
    try:
        spec = load_scenario_file(scenario)
    except (SentinelError, json.JSONDecodeError) as err:
        payload = err.to_payload() if isinstance(err, SentinelError) else {
            "code": "invalid_json", "message": str(err)
        }
        click.echo(json.dumps(payload, indent=2))
        sys.exit(2)
    click.echo(f"ok: {spec.name} ({spec.scenario_id})")
    click.echo(f"  rasters: {spec.graph.size}, realizations: {len(spec.realizations)}, "
               f"alert types: {len(spec.cost_model.alert_costs)}")
    for warning in spec.warnings:
        click.echo(f"  warning: {warning}")


@main.command()
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
def replay(scenario, out):
    """Replay a scenario's scripted observations into a report bundle."""
    try:
        spec = load_scenario_file(scenario)
        summary = run_replay(spec, out)
    except (SentinelError, json.JSONDecodeError) as err:
        payload = err.to_payload() if isinstance(err, SentinelError) else {
            "code": "invalid_json", "message": str(err)
        }
        click.echo(json.dumps(payload, indent=2))
        sys.exit(2)
    click.echo(json.dumps(summary, indent=2, sort_keys=True))


@main.command()
@click.option("--port", default=8000, type=int)
@click.option("--host", default="127.0.0.1")
@click.option("--data", default=None, type=click.Path(file_okay=False),
              help="Data directory (default: $SENTINEL_DATA_DIR or ./sentinel-data).")
def serve(port, host, data):
    """Run the HTTP session service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(data), host=host, port=port, log_level="info")


@main.group()
@click.option("--server", default=None, help=f"Service URL (default {DEFAULT_SERVER}).")
@click.pass_context
def session(ctx, server):
    """Interact with sessions on a running service."""
    import os

    ctx.obj["server"] = server or os.environ.get("SENTINEL_SERVER", DEFAULT_SERVER)


def _client(ctx) -> httpx.Client:
    return httpx.Client(base_url=ctx.obj["server"], timeout=120.0)


def _show(resp: httpx.Response):
    try:
        body = resp.json()
    except ValueError:
        body = resp.text
    if resp.status_code >= 400:
        click.echo(json.dumps(body, indent=2) if isinstance(body, dict) else body)
        sys.exit(1)
    click.echo(json.dumps(body, indent=2))
    return body


@session.command("new")
@click.argument("scenario_id")
@click.pass_context
def session_new(ctx, scenario_id):
    with _client(ctx) as client:
        _show(client.post("/sessions", json={"scenario_id": scenario_id}))


@session.command("observe")
@click.argument("session_id")
@click.option("--period", required=True, type=int)
@click.option("--signal", "signal_type", required=True)
@click.option("--value", required=True)
@click.option("--source", "sources", multiple=True)
@click.pass_context
def session_observe(ctx, session_id, period, signal_type, value, sources):
    body = {
        "period": period,
        "signal_type": signal_type,
        "value": value,
        "sources": list(sources),
    }
    with _client(ctx) as client:
        _show(client.post(f"/sessions/{session_id}/observations", json=body))


@session.command("recommend")
@click.argument("session_id")
@click.pass_context
def session_recommend(ctx, session_id):
    with _client(ctx) as client:
        _show(client.get(f"/sessions/{session_id}/recommendation"))


@session.command("branch")
@click.argument("session_id")
@click.option("--overrides", default="{}", help="JSON override document.")
@click.pass_context
def session_branch(ctx, session_id, overrides):
    with _client(ctx) as client:
        _show(client.post(f"/sessions/{session_id}/branches", json=json.loads(overrides)))


@session.command("export")
@click.argument("session_id")
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.pass_context
def session_export(ctx, session_id, out):
    """Export belief snapshot and history CSVs for a session."""
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with _client(ctx) as client:
        belief = client.get(f"/sessions/{session_id}/belief")
        history = client.get(f"/sessions/{session_id}/history")
        if belief.status_code >= 400 or history.status_code >= 400:
            _show(belief if belief.status_code >= 400 else history)
        belief, history = belief.json(), history.json()

    with open(out_dir / "state_posterior.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["period", "raster", "probability"])
        for raster, p in sorted(belief["state"].items(), key=lambda kv: int(kv[0])):
            writer.writerow([belief["period"], raster, repr(p)])

    with open(out_dir / "realization_posterior.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["period", "realization", "target", "immediacy", "probability"])
        for row in belief["realizations"]:
            writer.writerow([
                belief["period"], row["index"], row["target"], row["immediacy"],
                repr(row["probability"]),
            ])

    with open(out_dir / "observations.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["period", "signal_type", "value", "sources"])
        for obs in history["observations"]:
            writer.writerow([
                obs["period"], obs["signal_type"], obs["value"], "|".join(obs["sources"]),
            ])
    click.echo(f"exported session {session_id} to {out_dir}")


if __name__ == "__main__":
    main()
