"""HTTP session service.

FastAPI application wrapping the engine: scenario upload/validation,
session lifecycle, observation ingestion, belief/projection/
recommendation reads, and what-if branches. All numbers in responses come
straight from the engine; clients are expected to render, not recompute.
Errors carry a machine-readable code and, when known, the offending field
path.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .errors import (
    NonConsecutivePeriod,
    ScenarioNotFound,
    SentinelError,
    SessionNotFound,
    ValidationError,
)
from .filtering import Observation
from .scenario import ScenarioSpec, builtin_scenario_path, load_scenario, load_scenario_file
from .session import SessionStore, compute_projection, compute_recommendation

DATA_DIR_ENV = "SENTINEL_DATA_DIR"

_STATUS = {
    "session_not_found": 404,
    "scenario_not_found": 404,
    "non_consecutive_period": 409,
    "schema_version_mismatch": 422,
    "validation_error": 422,
}


# --- wire models ------------------------------------------------------------

class ScenarioSummary(BaseModel):
    scenario_id: str
    name: str
    targets: list[str]
    warnings: list[str]


class ScenarioDetail(ScenarioSummary):
    period_hours: float | None = None
    signal_types: dict[str, list[str]]
    sources: list[dict]
    node_ids: list[int]
    blocked: list[int]
    labels: dict[int, dict]
    trapping_sets: dict[str, list[int]]
    initial_period: int
    cost_horizon: int
    has_script: bool


class SessionCreate(BaseModel):
    scenario_id: str


class SessionOut(BaseModel):
    session_id: str
    scenario_id: str
    period: int
    parent_id: str | None = None
    override_note: str | None = None
    observation_count: int


class ObservationIn(BaseModel):
    period: int
    signal_type: str
    value: str
    sources: list[str] = Field(default_factory=list)


class RealizationWeight(BaseModel):
    index: int
    target: str
    immediacy: str
    probability: float


class BeliefOut(BaseModel):
    session_id: str
    period: int
    state: dict[int, float]
    realizations: list[RealizationWeight]
    credibility: dict[str, float]
    targets: dict[str, float]
    log_likelihood: float


class TargetSeries(BaseModel):
    target: str
    probabilities: list[float]
    cumulative: list[float]


class ProjectionOut(BaseModel):
    session_id: str
    period: int
    horizon: int
    periods: list[int]
    series: list[TargetSeries]


class TypeCurve(BaseModel):
    alert_type: str
    expected_disutility: list[float]
    optimal_time: int
    optimal_value: float


class RecommendationOut(BaseModel):
    session_id: str
    period: int
    horizon: int
    alert_type: str
    time: int
    issue_now: bool
    candidate_times: list[int]
    curves: list[TypeCurve]


class BranchRequest(BaseModel):
    observations: list[ObservationIn] = Field(default_factory=list)
    cost_model: dict = Field(default_factory=dict)
    note: str | None = None


class HistoryOut(BaseModel):
    session_id: str
    parent_id: str | None
    observations: list[ObservationIn]
    recommendations: list[dict]


class StepOut(BaseModel):
    session: SessionOut
    belief: BeliefOut
    projection: ProjectionOut
    recommendation: RecommendationOut


# --- application ------------------------------------------------------------

def create_app(data_dir: str | Path | None = None) -> FastAPI:
    data_dir = Path(data_dir or os.environ.get(DATA_DIR_ENV) or "sentinel-data")
    app = FastAPI(title="sentinel", version="0.1.0")
    scenarios: dict[str, ScenarioSpec] = {}
    store = SessionStore(data_dir)

    def register(spec: ScenarioSpec):
        scenarios[spec.scenario_id] = spec

    builtin = builtin_scenario_path()
    if builtin.is_file():
        register(load_scenario_file(builtin))
    extra = data_dir / "scenarios"
    if extra.is_dir():
        for path in sorted(extra.glob("*.json")):
            register(load_scenario_file(path))
    store.load_persisted(scenarios)

    @app.exception_handler(SentinelError)
    async def engine_error(request: Request, exc: SentinelError):
        status = _STATUS.get(exc.code, 400)
        return JSONResponse(status_code=status, content=exc.to_payload())

    def scenario_or_404(scenario_id: str) -> ScenarioSpec:
        if scenario_id not in scenarios:
            raise ScenarioNotFound(f"no scenario {scenario_id!r}")
        return scenarios[scenario_id]

    def session_summary(session) -> SessionOut:
        return SessionOut(
            session_id=session.session_id,
            scenario_id=session.scenario.scenario_id,
            period=session.period,
            parent_id=session.parent_id,
            override_note=session.override_note,
            observation_count=len(session.observations),
        )

    def belief_out(session) -> BeliefOut:
        belief = session.belief
        pi = belief.state_posterior().vector
        post = belief.realization_posterior()
        return BeliefOut(
            session_id=session.session_id,
            period=belief.period,
            state={int(nid): float(pi[i]) for i, nid in enumerate(belief.node_ids)},
            realizations=[
                RealizationWeight(
                    index=r.index,
                    target=r.target,
                    immediacy=r.immediacy,
                    probability=post[r.index],
                )
                for r in belief.realizations
            ],
            credibility={
                "|".join(k): v for k, v in belief.credibility_posterior().items()
            },
            targets=belief.target_posterior(),
            log_likelihood=belief.log_likelihood,
        )

    def projection_out(session, horizon: int | None) -> ProjectionOut:
        _, attack = compute_projection(session.belief, session.scenario, horizon)
        return ProjectionOut(
            session_id=session.session_id,
            period=session.period,
            horizon=attack.horizon,
            periods=list(range(attack.origin_period + 1, attack.horizon + 1)),
            series=[
                TargetSeries(
                    target=t,
                    probabilities=[float(x) for x in attack.probs[t]],
                    cumulative=[float(x) for x in attack.cumulative(t)],
                )
                for t in attack.targets
            ],
        )

    def recommendation_out(session) -> RecommendationOut:
        rec = compute_recommendation(session.belief, session.scenario, session.cost_model)
        return RecommendationOut(
            session_id=session.session_id,
            period=rec.evaluated_period,
            horizon=rec.horizon,
            alert_type=rec.alert_type,
            time=rec.time,
            issue_now=rec.issue_now,
            candidate_times=[int(t) for t in rec.candidate_times()],
            curves=[
                TypeCurve(
                    alert_type=a,
                    expected_disutility=[float(x) for x in rec.surface[a]],
                    optimal_time=rec.optimum[a][0],
                    optimal_value=rec.optimum[a][1],
                )
                for a in sorted(rec.surface)
            ],
        )

    # --- scenario endpoints ---------------------------------------------

    @app.get("/scenarios", response_model=list[ScenarioSummary])
    def list_scenarios():
        return [
            ScenarioSummary(
                scenario_id=s.scenario_id,
                name=s.name,
                targets=list(s.targets()),
                warnings=list(s.warnings),
            )
            for s in scenarios.values()
        ]

    @app.post("/scenarios", response_model=ScenarioSummary, status_code=201)
    def upload_scenario(document: dict):
        spec = load_scenario(document)
        register(spec)
        return ScenarioSummary(
            scenario_id=spec.scenario_id,
            name=spec.name,
            targets=list(spec.targets()),
            warnings=list(spec.warnings),
        )

    @app.get("/scenarios/{scenario_id}", response_model=ScenarioDetail)
    def scenario_detail(scenario_id: str):
        s = scenario_or_404(scenario_id)
        return ScenarioDetail(
            scenario_id=s.scenario_id,
            name=s.name,
            targets=list(s.targets()),
            warnings=list(s.warnings),
            period_hours=s.metadata.get("period_hours"),
            signal_types={t: list(m.values) for t, m in s.signal_models.items()},
            sources=[
                {"id": src.source_id, "outcomes": list(src.outcomes), "priors": list(src.priors)}
                for src in s.sources
            ],
            node_ids=list(s.graph.node_ids),
            blocked=sorted(s.graph.blocked),
            labels={int(k): v for k, v in s.graph.labels.items()},
            trapping_sets={k: sorted(v) for k, v in s.trapping_sets.items()},
            initial_period=s.p0.period,
            cost_horizon=s.cost_model.horizon,
            has_script=bool(s.observation_script),
        )

    # --- session endpoints -----------------------------------------------

    @app.post("/sessions", response_model=SessionOut, status_code=201)
    def create_session(body: SessionCreate):
        spec = scenario_or_404(body.scenario_id)
        session = store.create(spec)
        return session_summary(session)

    @app.get("/sessions", response_model=list[SessionOut])
    def list_sessions():
        return [session_summary(store.get(sid)) for sid in store.ids()]

    @app.post("/sessions/{session_id}/observations", response_model=StepOut)
    def post_observation(session_id: str, body: ObservationIn):
        session = store.get(session_id)
        obs = Observation(
            period=body.period,
            signal_type=body.signal_type,
            value=body.value,
            sources=tuple(body.sources),
        )
        session, _, _, _, _ = store.step(session_id, obs)
        return StepOut(
            session=session_summary(session),
            belief=belief_out(session),
            projection=projection_out(session, None),
            recommendation=recommendation_out(session),
        )

    @app.get("/sessions/{session_id}/belief", response_model=BeliefOut)
    def get_belief(session_id: str):
        return belief_out(store.get(session_id))

    @app.get("/sessions/{session_id}/projection", response_model=ProjectionOut)
    def get_projection(session_id: str, horizon: int | None = None):
        return projection_out(store.get(session_id), horizon)

    @app.get("/sessions/{session_id}/recommendation", response_model=RecommendationOut)
    def get_recommendation(session_id: str):
        return recommendation_out(store.get(session_id))

    @app.post("/sessions/{session_id}/branches", response_model=SessionOut, status_code=201)
    def branch_session(session_id: str, body: BranchRequest):
        overrides: dict = {}
        if body.observations:
            overrides["observations"] = [o.model_dump() for o in body.observations]
        if body.cost_model:
            overrides["cost_model"] = body.cost_model
        if body.note is not None:
            overrides["note"] = body.note
        child = store.branch(session_id, overrides)
        return session_summary(child)

    @app.get("/sessions/{session_id}/history", response_model=HistoryOut)
    def session_history(session_id: str):
        session = store.get(session_id)
        return HistoryOut(
            session_id=session.session_id,
            parent_id=session.parent_id,
            observations=[ObservationIn(**o.to_dict()) for o in session.observations],
            recommendations=session.recommendations,
        )

    app.state.scenarios = scenarios
    app.state.store = store
    return app
