"""Scripted replay: regenerate the analysis artifacts for a scenario.

Runs the scenario's observation script through the full pipeline and
writes the plot-source CSVs (conditional first-passage curves, joint
attack distribution, realization-posterior trajectories, days-ahead
projections, per-period disutility scan surfaces) plus a summary of the
first issue-now event. Output is deterministic: identical scenario and
script give byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .alerting import AlertRecommendation
from .errors import ValidationError
from .filtering import advance_belief
from .projection import passage_table_csv
from .scenario import ScenarioSpec
from .session import compute_passages, compute_projection, compute_recommendation

PROJECTION_DAYS = (2, 4, 7)


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8", newline="")


def run_replay(scenario: ScenarioSpec, out_dir: str | Path) -> dict:
    """Replay the scripted observations; returns the summary dict."""
    if not scenario.observation_script:
        raise ValidationError(
            "scenario has no observation_script to replay", field="observation_script"
        )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    belief = scenario.initial_belief()
    realization_info = {r.index: (r.target, r.immediacy) for r in scenario.realizations}
    horizon = scenario.projection_horizon

    # Initialization-time artifacts (conditional on each realization).
    passages0 = compute_passages(belief, scenario, horizon)
    _write(out / "first_passage_conditional.csv",
           passage_table_csv(passages0, realization_info))
    _, attack0 = compute_projection(belief, scenario, horizon)
    _write(out / "attack_distribution_initial.csv", attack0.to_csv())

    traj_rows = []
    proj_rows = []
    scan_parts = []
    alert_rows = []
    first_issue: dict | None = None
    ppd = scenario.cost_model.periods_per_day

    def record(rec: AlertRecommendation, period: int):
        nonlocal first_issue
        scan_parts.append(rec.to_csv() if period == 0 else _strip_header(rec.to_csv()))
        alert_rows.append(
            [period, rec.alert_type, rec.time, str(rec.issue_now).lower()]
        )
        if rec.issue_now and first_issue is None:
            first_issue = {
                "period": period,
                "alert_type": rec.alert_type,
                "surface_minimum": rec.optimum[rec.alert_type][1],
            }

    def snapshot(period: int):
        post = belief.realization_posterior()
        for j in sorted(post):
            target, immediacy = realization_info[j]
            traj_rows.append([period, target, immediacy, repr(post[j])])
        _, attack = compute_projection(belief, scenario, horizon=max(
            horizon, belief.period + PROJECTION_DAYS[-1] * ppd + 1))
        for days in PROJECTION_DAYS:
            end = period + days * ppd
            for target in attack.targets:
                proj_rows.append(
                    [period, target, days, repr(attack.window_mass(target, period + 1, end))]
                )
        rec = compute_recommendation(belief, scenario, scenario.cost_model)
        record(rec, period)

    snapshot(0)
    for obs in scenario.observation_script:
        belief = advance_belief(
            belief, scenario.transition_models, scenario.signal_models, obs
        )
        snapshot(obs.period)

    _write(out / "realization_trajectories.csv",
           _rows_to_csv(["period", "target", "immediacy", "probability"], traj_rows))
    _write(out / "projections_days_ahead.csv",
           _rows_to_csv(["period", "target", "days_ahead", "probability"], proj_rows))
    _write(out / "disutility_scan.csv", "".join(scan_parts))
    _write(out / "alerts.csv",
           _rows_to_csv(["period", "alert_type", "optimal_time", "issue_now"], alert_rows))

    summary = {
        "scenario": scenario.scenario_id,
        "name": scenario.name,
        "periods_replayed": len(scenario.observation_script),
        "first_issue_now": first_issue,
        "warnings": list(scenario.warnings),
    }
    _write(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def _rows_to_csv(header: list[str], rows: list[list]) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _strip_header(text: str) -> str:
    return text.split("\n", 1)[1]
