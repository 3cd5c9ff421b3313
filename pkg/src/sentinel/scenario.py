"""Scenario documents: loading, validation, and compiled engine objects.

A scenario is a single JSON document binding every model ingredient:
static crisis network (or a direct canonical target distribution), raster
graph with trapping sets, realizations of the static joint variable,
source and signal models, the initial state, the cost model, and an
optional scripted observation log. Loading validates every cross
reference, builds the derived artifacts (transition matrices, shortest
hop tables), and reports soft problems (an unreachable target) as
warnings rather than failures so partial scenarios stay usable while
authoring.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bayesnet
from .alerting import CostModel
from .errors import (
    SchemaVersionMismatch,
    SentinelError,
    Unreachable,
    ValidationError,
)
from .filtering import Observation, SignalModel, SourceModel, init_belief
from .projection import StateDistribution
from .statespace import RasterGraph, hop_distances, load_raster_graph
from .transitions import DRealization, TransitionModel, build_transition_models

SCHEMA_MAJOR = 1
CANONICAL_TOL = 1e-6


@dataclass
class ScenarioSpec:
    """A fully validated, compiled scenario."""

    scenario_id: str
    metadata: dict
    graph: RasterGraph
    trapping_sets: dict[str, set[int]]
    realizations: tuple[DRealization, ...]
    transition_models: dict[int, TransitionModel]
    sources: tuple[SourceModel, ...]
    signal_models: dict[str, SignalModel]
    p0: StateDistribution
    prior_d: dict[int, float]
    cost_model: CostModel
    projection_horizon: int
    network: bayesnet.CrisisNetwork | None = None
    network_evidence: bayesnet.Evidence | None = None
    network_query: str | None = None
    canonical_targets: dict[str, float] | None = None
    observation_script: tuple[Observation, ...] = ()
    warnings: tuple[str, ...] = ()
    document: dict = field(default_factory=dict, repr=False)

    @property
    def name(self) -> str:
        return self.metadata.get("name", self.scenario_id)

    def targets(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(r.target for r in self.realizations))

    def realization_targets(self) -> dict[int, str]:
        return {r.index: r.target for r in self.realizations}

    def initial_belief(self):
        return init_belief(
            self.p0, self.prior_d, self.sources, self.realizations, self.graph.node_ids
        )

    def target_distribution(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for r in self.realizations:
            out[r.target] = out.get(r.target, 0.0) + self.prior_d[r.index]
        return out


def _fail(path: str, message: str) -> ValidationError:
    return ValidationError(message, field=path)


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        raise _fail(f"{path}.{key}" if path else key, f"missing required field {key!r}")
    return doc[key]


def _build_network(section: dict):
    variables = [
        bayesnet.DiscreteVariable(
            name=v["name"], outcomes=tuple(v["outcomes"]), kind=v.get("kind", "chance")
        )
        for v in _require(section, "variables", "crisis_network")
    ]
    edges = [tuple(e) for e in section.get("edges", [])]
    tables = []
    for t in _require(section, "tables", "crisis_network"):
        rows = {tuple(r.get("given", ())): r["probs"] for r in t["rows"]}
        tables.append(
            bayesnet.ConditionalTable(
                child=t["child"], parents=tuple(t.get("parents", ())), rows=rows
            )
        )
    net = bayesnet.build_network(variables, edges, tables)
    evidence = bayesnet.Evidence(dict(section.get("evidence", {})))
    evidence.validate(net)
    query = _require(section, "query", "crisis_network")
    if isinstance(query, list):
        if len(query) != 1:
            raise _fail("crisis_network.query", "exactly one query variable is supported")
        query = query[0]
    if query not in net.variables:
        raise _fail("crisis_network.query", f"unknown query variable {query!r}")
    return net, evidence, query


def _compile_signal(section: dict, graph: RasterGraph, sources) -> SignalModel:
    type_id = _require(section, "type", "signals[]")
    values = tuple(_require(section, "values", f"signals.{type_id}"))
    classes: dict[str, set[int]] = {}
    class_of: dict[int, str] = {}
    for cls, nodes in section.get("classes", {}).items():
        classes[cls] = set()
        for nid in nodes:
            nid = int(nid)
            graph.index_of(nid)
            if nid in class_of:
                raise _fail(
                    f"signals.{type_id}.classes.{cls}",
                    f"node {nid} assigned to both {class_of[nid]!r} and {cls!r}",
                )
            class_of[nid] = cls
            classes[cls].add(nid)
    default = section.get("default_class")
    for nid in graph.node_ids:
        if nid not in class_of:
            if default is None:
                raise _fail(
                    f"signals.{type_id}",
                    f"node {nid} has no class and no default_class is given",
                )
            class_of[nid] = default
    all_classes = set(class_of.values())

    source_ids = [s.source_id for s in sources]
    from .filtering import r_realizations

    keys = r_realizations(sources)
    table: dict[tuple[str, tuple[str, ...]], list[float]] = {}
    for entry in section.get("likelihoods", []):
        cls = entry.get("class")
        targets = [cls] if cls is not None else sorted(all_classes)
        for c in targets:
            if c not in all_classes:
                raise _fail(
                    f"signals.{type_id}.likelihoods", f"unknown class {c!r}"
                )
            matcher = entry.get("credibility", {})
            for bad in set(matcher) - set(source_ids):
                raise _fail(
                    f"signals.{type_id}.likelihoods",
                    f"credibility matcher names unknown source {bad!r}",
                )
            for key in keys:
                assignment = dict(zip(source_ids, key))
                if all(assignment.get(s) == o for s, o in matcher.items()):
                    table[(c, key)] = entry["probs"]
    missing = [
        (c, key) for c in sorted(all_classes) for key in keys if (c, key) not in table
    ]
    if missing:
        raise _fail(
            f"signals.{type_id}.likelihoods",
            f"no likelihood row for {missing[:3]}{'...' if len(missing) > 3 else ''}",
        )
    return SignalModel(
        type_id=type_id,
        values=values,
        class_of_node=class_of,
        table=table,
        sources=tuple(section.get("sources", source_ids)),
    )


def load_scenario(document: dict) -> ScenarioSpec:
    """Validate a scenario document and compile every derived artifact."""
    version = str(_require(document, "schema_version", ""))
    major = version.split(".")[0]
    if not major.isdigit() or int(major) != SCHEMA_MAJOR:
        raise SchemaVersionMismatch(
            f"schema version {version!r} not supported (major {SCHEMA_MAJOR} required)"
        )

    metadata = dict(document.get("metadata", {}))
    warnings: list[str] = []

    try:
        graph = load_raster_graph(_require(document, "graph", ""))
    except SentinelError as err:
        if isinstance(err, ValidationError):
            raise
        raise ValidationError(f"graph: {err}", field="graph") from err

    trapping_sets: dict[str, set[int]] = {}
    for label, nodes in _require(document, "trapping_sets", "").items():
        ids = set()
        for nid in nodes:
            nid = int(nid)
            graph.index_of(nid)
            ids.add(nid)
        if not ids:
            raise _fail(f"trapping_sets.{label}", "trapping set is empty")
        trapping_sets[label] = ids

    realizations = []
    for entry in _require(document, "realizations", ""):
        real = DRealization(
            index=int(entry["index"]),
            target=str(entry["target"]),
            immediacy=str(entry["immediacy"]),
            holding_probability=float(entry["holding_probability"]),
        )
        if real.target not in trapping_sets:
            raise _fail(
                "realizations",
                f"realization {real.index} names target {real.target!r} with no trapping set",
            )
        realizations.append(real)
    realizations.sort(key=lambda r: r.index)
    if [r.index for r in realizations] != list(range(len(realizations))):
        raise _fail("realizations", "realization indices must be 0..n-1 and unique")
    if not realizations:
        raise _fail("realizations", "at least one realization is required")

    sources = tuple(
        SourceModel(
            source_id=s["id"], outcomes=tuple(s["outcomes"]), priors=tuple(s["priors"])
        )
        for s in _require(document, "sources", "")
    )

    signal_models: dict[str, SignalModel] = {}
    for section in _require(document, "signals", ""):
        sm = _compile_signal(section, graph, sources)
        if sm.type_id in signal_models:
            raise _fail("signals", f"duplicate signal type {sm.type_id!r}")
        signal_models[sm.type_id] = sm

    init = _require(document, "initial_state", "")
    vec = np.zeros(graph.size)
    if "point_mass" in init:
        vec[graph.index_of(int(init["point_mass"]))] = 1.0
    elif "vector" in init:
        for nid, p in init["vector"].items():
            vec[graph.index_of(int(nid))] = float(p)
    else:
        raise _fail("initial_state", "needs point_mass or vector")
    p0 = StateDistribution(period=int(init.get("period", 0)), vector=vec)
    p0.validate(graph.size)

    # --- static distribution: network posterior or canonical vector -----
    network = evidence = None
    query_var = None
    canonical = document.get("canonical_target_distribution")
    if canonical is not None:
        canonical = {str(k): float(v) for k, v in canonical.items()}
    if "crisis_network" in document:
        try:
            network, evidence, query_var = _build_network(document["crisis_network"])
        except SentinelError as err:
            if isinstance(err, (ValidationError, SchemaVersionMismatch)):
                raise
            raise ValidationError(
                f"crisis_network: {err}", field="crisis_network"
            ) from err
        posterior = bayesnet.posterior_query(network, [query_var], evidence).single()
        target_dist = posterior
        if canonical is not None:
            for label, value in canonical.items():
                got = posterior.get(label, 0.0)
                if abs(got - value) > CANONICAL_TOL:
                    raise _fail(
                        "canonical_target_distribution",
                        f"network posterior for {label!r} is {got:.8f}, canonical "
                        f"says {value:.8f}",
                    )
    elif canonical is not None:
        total = sum(canonical.values())
        if abs(total - 1.0) > 1e-9:
            raise _fail("canonical_target_distribution", f"sums to {total}, not 1")
        target_dist = canonical
    else:
        raise _fail(
            "", "scenario needs a crisis_network or a canonical_target_distribution"
        )

    split = {
        str(k): float(v) for k, v in document.get(
            "immediacy_split", {"IMMEDIATE": 0.5, "DELAYED": 0.5}
        ).items()
    }
    prior_d: dict[int, float] = {}
    for real in realizations:
        if real.target not in target_dist:
            raise _fail(
                "realizations",
                f"target {real.target!r} missing from the target distribution",
            )
        if real.immediacy not in split:
            raise _fail(
                "immediacy_split", f"no share for immediacy {real.immediacy!r}"
            )
        prior_d[real.index] = target_dist[real.target] * split[real.immediacy]
    norm = sum(prior_d.values())
    if abs(norm - 1.0) > 1e-9:
        raise _fail(
            "realizations",
            f"realization prior sums to {norm:.10f}; check immediacy_split and targets",
        )

    # --- cost model ------------------------------------------------------
    cm = _require(document, "cost_model", "")
    failure_costs = {str(k): float(v) for k, v in _require(cm, "failure_costs", "cost_model").items()}
    alert_costs = {str(k): float(v) for k, v in _require(cm, "alert_costs", "cost_model").items()}
    targets = tuple(dict.fromkeys(r.target for r in realizations))
    for t in targets:
        if t not in failure_costs:
            raise _fail("cost_model.failure_costs", f"no failure cost for target {t!r}")
    lead_times: dict[tuple[str, int], int] = {}
    for entry in _require(cm, "lead_times", "cost_model"):
        alert = str(entry["alert"])
        target = str(entry["target"])
        if alert not in alert_costs:
            raise _fail("cost_model.lead_times", f"unknown alert type {alert!r}")
        if target not in trapping_sets:
            raise _fail("cost_model.lead_times", f"unknown target label {target!r}")
        for real in realizations:
            if real.target == target:
                lead_times[(alert, real.index)] = int(entry["periods"])
    try:
        cost_model = CostModel(
            failure_costs=failure_costs,
            alert_costs=alert_costs,
            lead_times=lead_times,
            daily_discount_rate=float(_require(cm, "daily_discount_rate", "cost_model")),
            periods_per_day=int(cm.get("periods_per_day", 2)),
            horizon=int(_require(cm, "horizon", "cost_model")),
            disutility=str(cm.get("disutility", "LINEAR")),
            risk_coefficient=float(cm.get("risk_coefficient", 0.0)),
        )
    except SentinelError as err:
        raise ValidationError(f"cost_model: {err}", field="cost_model") from err

    # --- derived artifacts ----------------------------------------------
    transition_models = build_transition_models(graph, realizations, trapping_sets)
    for model in {id(m): m for m in transition_models.values()}.values():
        warnings.extend(model.warnings)

    support = [graph.node_ids[i] for i in np.nonzero(p0.vector)[0]]
    for label, ids in sorted(trapping_sets.items()):
        dist = hop_distances(graph, frozenset(ids))
        if all(dist[graph.index_of(s)] < 0 for s in support):
            warnings.append(
                f"target {label!r} unreachable from the initial state support"
            )

    script = tuple(
        Observation.from_dict(o) for o in document.get("observation_script", [])
    )
    for obs in script:
        if obs.signal_type not in signal_models:
            raise _fail(
                "observation_script",
                f"period {obs.period}: unregistered signal type {obs.signal_type!r}",
            )
    if script and [o.period for o in script] != list(
        range(script[0].period, script[0].period + len(script))
    ):
        raise _fail("observation_script", "scripted periods must be consecutive")

    digest = hashlib.sha256(
        json.dumps(document, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()[:12]

    return ScenarioSpec(
        scenario_id=digest,
        metadata=metadata,
        graph=graph,
        trapping_sets=trapping_sets,
        realizations=tuple(realizations),
        transition_models=transition_models,
        sources=sources,
        signal_models=signal_models,
        p0=p0,
        prior_d=prior_d,
        cost_model=cost_model,
        projection_horizon=int(document.get("projection_horizon", cost_model.horizon)),
        network=network,
        network_evidence=evidence,
        network_query=query_var,
        canonical_targets=canonical,
        observation_script=script,
        warnings=tuple(warnings),
        document=document,
    )


def load_scenario_file(path: str | Path) -> ScenarioSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return load_scenario(json.load(fh))


def builtin_scenario_path(name: str = "pearl_harbor") -> Path:
    return Path(__file__).parent / "data" / f"{name}.json"
