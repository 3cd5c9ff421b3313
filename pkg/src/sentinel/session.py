"""Analyst sessions: stepping, what-if branching, persistence.

A session owns a belief state over one scenario and accumulates the
observation and recommendation history. Branches deep-copy their parent
and never write back. Persistence is an append-only event log (scenario
hash, observations, overrides) plus a belief snapshot in flat files; JSON
float round-tripping is exact, so a reloaded session reproduces its
belief and recommendations bit for bit.
"""

from __future__ import annotations

import copy
import json
import threading
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .alerting import AlertRecommendation, CostModel, recommend_alert
from .errors import InvalidOverride, SessionNotFound
from .filtering import BeliefState, Observation, advance_belief
from .projection import (
    AttackDistribution,
    FirstPassageDistribution,
    first_passage,
    marginal_attack_distribution,
)
from .scenario import ScenarioSpec


def compute_passages(
    belief: BeliefState, scenario: ScenarioSpec, horizon: int
) -> dict[int, FirstPassageDistribution]:
    """Per-realization first-passage distributions from the current belief."""
    passages = {}
    for i, real in enumerate(belief.realizations):
        start = type(scenario.p0)(
            period=belief.period, vector=belief.conditional_state(i)
        )
        passages[real.index] = first_passage(
            start,
            scenario.transition_models[real.index],
            horizon,
            conditioning=real.key,
        )
    return passages


def compute_projection(
    belief: BeliefState, scenario: ScenarioSpec, horizon: int | None = None
) -> tuple[dict[int, FirstPassageDistribution], AttackDistribution]:
    horizon = horizon if horizon is not None else max(
        scenario.projection_horizon, belief.period + 1
    )
    passages = compute_passages(belief, scenario, horizon)
    attack = marginal_attack_distribution(
        belief.realization_posterior(), passages, scenario.realization_targets()
    )
    return passages, attack


def compute_recommendation(
    belief: BeliefState, scenario: ScenarioSpec, cost_model: CostModel
) -> AlertRecommendation:
    horizon = max(cost_model.horizon, belief.period + 1)
    passages = compute_passages(belief, scenario, horizon)
    if cost_model.horizon <= belief.period:
        cost_model = replace(cost_model, horizon=horizon)
    return recommend_alert(
        belief.realization_posterior(),
        passages,
        scenario.realization_targets(),
        cost_model,
    )


@dataclass
class Session:
    """One analyst timeline over a scenario."""

    session_id: str
    scenario: ScenarioSpec
    belief: BeliefState
    cost_model: CostModel
    observations: list[Observation] = field(default_factory=list)
    recommendations: list[dict] = field(default_factory=list)
    parent_id: str | None = None
    override_note: str | None = None
    created_at: str = ""
    updated_at: str = ""

    @property
    def period(self) -> int:
        return self.belief.period

    def latest_recommendation(self) -> dict | None:
        return self.recommendations[-1] if self.recommendations else None

    def belief_weight_rows(self) -> list[tuple]:
        """(period, realization, credibility, weight) rows for CSV export."""
        rows = []
        w = self.belief.weights
        for di, real in enumerate(self.belief.realizations):
            for ri, key in enumerate(self.belief.r_keys):
                rows.append((self.period, real.index, "|".join(key), float(w[di, ri])))
        return rows

    def state_rows(self) -> list[tuple]:
        pi = self.belief.state_posterior().vector
        return [
            (self.period, nid, float(pi[i]))
            for i, nid in enumerate(self.belief.node_ids)
        ]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class SessionStore:
    """In-memory session registry with optional flat-file persistence.

    Mutations on one session are serialized by a per-session lock; the
    engine beneath is pure, so concurrent reads see consistent snapshots.
    """

    def __init__(self, data_dir: str | Path | None = None):
        self.data_dir = Path(data_dir) if data_dir else None
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    # --- registry -------------------------------------------------------

    def create(self, scenario: ScenarioSpec, session_id: str | None = None) -> Session:
        session_id = session_id or uuid.uuid4().hex[:12]
        session = Session(
            session_id=session_id,
            scenario=scenario,
            belief=scenario.initial_belief(),
            cost_model=scenario.cost_model,
            created_at=_now(),
            updated_at=_now(),
        )
        rec = compute_recommendation(session.belief, scenario, session.cost_model)
        session.recommendations.append(rec.to_dict())
        with self._registry_lock:
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
        self._persist_event(session, {"event": "created", "scenario": scenario.scenario_id})
        self._persist_snapshot(session)
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise SessionNotFound(f"no session {session_id!r}") from None

    def lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    def ids(self) -> list[str]:
        return sorted(self._sessions)

    # --- operations -----------------------------------------------------

    def step(self, session_id: str, observation: Observation):
        """Advance one period: filter, project, recommend, append history."""
        with self.lock(session_id):
            session = self.get(session_id)
            belief = advance_belief(
                session.belief,
                session.scenario.transition_models,
                session.scenario.signal_models,
                observation,
            )
            session.belief = belief
            session.observations.append(observation)
            passages, attack = compute_projection(belief, session.scenario)
            rec = compute_recommendation(belief, session.scenario, session.cost_model)
            session.recommendations.append(rec.to_dict())
            session.updated_at = _now()
            self._persist_event(
                session, {"event": "observation", **observation.to_dict()}
            )
            self._persist_snapshot(session)
            pi, p_d, _ = (
                belief.state_posterior(),
                belief.realization_posterior(),
                belief.credibility_posterior(),
            )
            return session, pi, p_d, attack, rec

    def branch(self, session_id: str, overrides: dict) -> Session:
        """What-if branch: deep copy, then apply overrides; parent untouched."""
        parent = self.get(session_id)
        unknown = set(overrides) - {"observations", "cost_model", "note"}
        if unknown:
            raise InvalidOverride(f"unknown override keys {sorted(unknown)}")

        child = Session(
            session_id=uuid.uuid4().hex[:12],
            scenario=parent.scenario,
            belief=copy.deepcopy(parent.belief),
            cost_model=parent.cost_model,
            observations=list(parent.observations),
            recommendations=copy.deepcopy(parent.recommendations),
            parent_id=parent.session_id,
            override_note=overrides.get("note"),
            created_at=_now(),
            updated_at=_now(),
        )
        if "cost_model" in overrides:
            child.cost_model = _override_cost_model(parent.cost_model, overrides["cost_model"])
            rec = compute_recommendation(child.belief, child.scenario, child.cost_model)
            child.recommendations.append(rec.to_dict())
        with self._registry_lock:
            self._sessions[child.session_id] = child
            self._locks[child.session_id] = threading.Lock()
        self._persist_event(
            child,
            {"event": "branched", "parent": parent.session_id, "overrides": overrides},
        )
        for obs in overrides.get("observations", []):
            self.step(child.session_id, Observation.from_dict(obs))
        self._persist_snapshot(child)
        return child

    # --- persistence ----------------------------------------------------

    def _session_dir(self, session: Session) -> Path | None:
        if self.data_dir is None:
            return None
        d = self.data_dir / "sessions" / session.session_id
        d.mkdir(parents=True, exist_ok=True)
        return d

    def _persist_event(self, session: Session, event: dict):
        d = self._session_dir(session)
        if d is None:
            return
        with open(d / "events.jsonl", "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def _persist_snapshot(self, session: Session):
        d = self._session_dir(session)
        if d is None:
            return
        snapshot = {
            "session_id": session.session_id,
            "scenario_id": session.scenario.scenario_id,
            "parent_id": session.parent_id,
            "override_note": session.override_note,
            "created_at": session.created_at,
            "updated_at": session.updated_at,
            "belief": session.belief.to_dict(),
            "observations": [o.to_dict() for o in session.observations],
            "recommendations": session.recommendations,
            "cost_model": _cost_model_to_dict(session.cost_model),
        }
        tmp = d / "snapshot.json.tmp"
        tmp.write_text(json.dumps(snapshot, sort_keys=True), encoding="utf-8")
        tmp.replace(d / "snapshot.json")

    def load_persisted(self, scenarios: dict[str, ScenarioSpec]):
        """Restore sessions from the data directory (exact round trip)."""
        if self.data_dir is None:
            return
        root = self.data_dir / "sessions"
        if not root.is_dir():
            return
        for snap_path in sorted(root.glob("*/snapshot.json")):
            snapshot = json.loads(snap_path.read_text(encoding="utf-8"))
            scenario = scenarios.get(snapshot["scenario_id"])
            if scenario is None:
                continue
            session = Session(
                session_id=snapshot["session_id"],
                scenario=scenario,
                belief=BeliefState.from_dict(snapshot["belief"], scenario.realizations),
                cost_model=_cost_model_from_dict(snapshot["cost_model"]),
                observations=[Observation.from_dict(o) for o in snapshot["observations"]],
                recommendations=snapshot["recommendations"],
                parent_id=snapshot.get("parent_id"),
                override_note=snapshot.get("override_note"),
                created_at=snapshot.get("created_at", ""),
                updated_at=snapshot.get("updated_at", ""),
            )
            with self._registry_lock:
                self._sessions[session.session_id] = session
                self._locks[session.session_id] = threading.Lock()


def _override_cost_model(base: CostModel, section: dict) -> CostModel:
    unknown = set(section) - {
        "failure_cost_multiplier",
        "alert_cost_multiplier",
        "failure_costs",
        "alert_costs",
        "daily_discount_rate",
        "disutility",
        "risk_coefficient",
        "horizon",
    }
    if unknown:
        raise InvalidOverride(f"unknown cost_model override keys {sorted(unknown)}")
    failure = dict(base.failure_costs)
    alert = dict(base.alert_costs)
    if "failure_cost_multiplier" in section:
        m = float(section["failure_cost_multiplier"])
        if m <= 0:
            raise InvalidOverride("failure_cost_multiplier must be positive")
        failure = {k: v * m for k, v in failure.items()}
    if "alert_cost_multiplier" in section:
        m = float(section["alert_cost_multiplier"])
        if m <= 0:
            raise InvalidOverride("alert_cost_multiplier must be positive")
        alert = {k: v * m for k, v in alert.items()}
    for k, v in section.get("failure_costs", {}).items():
        failure[str(k)] = float(v)
    for k, v in section.get("alert_costs", {}).items():
        alert[str(k)] = float(v)
    return CostModel(
        failure_costs=failure,
        alert_costs=alert,
        lead_times=dict(base.lead_times),
        daily_discount_rate=float(section.get("daily_discount_rate", base.daily_discount_rate)),
        periods_per_day=base.periods_per_day,
        horizon=int(section.get("horizon", base.horizon)),
        disutility=str(section.get("disutility", base.disutility)),
        risk_coefficient=float(section.get("risk_coefficient", base.risk_coefficient)),
    )


def _cost_model_to_dict(cm: CostModel) -> dict:
    return {
        "failure_costs": cm.failure_costs,
        "alert_costs": cm.alert_costs,
        "lead_times": [
            {"alert": a, "realization": j, "periods": p}
            for (a, j), p in sorted(cm.lead_times.items())
        ],
        "daily_discount_rate": cm.daily_discount_rate,
        "periods_per_day": cm.periods_per_day,
        "horizon": cm.horizon,
        "disutility": cm.disutility,
        "risk_coefficient": cm.risk_coefficient,
    }


def _cost_model_from_dict(d: dict) -> CostModel:
    return CostModel(
        failure_costs={str(k): float(v) for k, v in d["failure_costs"].items()},
        alert_costs={str(k): float(v) for k, v in d["alert_costs"].items()},
        lead_times={
            (e["alert"], int(e["realization"])): int(e["periods"])
            for e in d["lead_times"]
        },
        daily_discount_rate=float(d["daily_discount_rate"]),
        periods_per_day=int(d["periods_per_day"]),
        horizon=int(d["horizon"]),
        disutility=str(d["disutility"]),
        risk_coefficient=float(d["risk_coefficient"]),
    )
