"""Exact Bayesian filtering of the hidden crisis state.

The filter maintains the full joint posterior over (static realization j,
source-credibility realization r, position X_t). Each (j, r) pair carries
its own conditional position vector; the pair weights are updated by the
per-pair evidence likelihood of each observed signal. Keeping the joint
is mathematically equivalent to re-running a classic forward pass with
re-updated credibility probabilities after every signal, but needs a
single pass. Weights live in log space; conditional vectors are
renormalized every period and their normalizers accumulate into a running
log-likelihood of the whole signal sequence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    ImpossibleObservation,
    NonConsecutivePeriod,
    UnregisteredSignalType,
)
from .projection import StateDistribution
from .transitions import DRealization, TransitionModel

LIK_ROW_TOL = 1e-12
WEIGHT_TOL = 1e-10


@dataclass(frozen=True)
class SourceModel:
    """An intelligence source with discrete credibility outcomes."""

    source_id: str
    outcomes: tuple[str, ...]
    priors: tuple[float, ...]

    def __post_init__(self):
        if len(self.outcomes) < 2:
            raise DimensionMismatch(
                f"source {self.source_id!r} needs >= 2 credibility outcomes"
            )
        if len(self.priors) != len(self.outcomes):
            raise DimensionMismatch(f"source {self.source_id!r}: outcome/prior length mismatch")
        if abs(sum(self.priors) - 1.0) > LIK_ROW_TOL:
            raise DimensionMismatch(f"source {self.source_id!r}: priors do not sum to 1")


def r_realizations(sources: Sequence[SourceModel]) -> tuple[tuple[str, ...], ...]:
    """Joint credibility realizations, cartesian product in source order."""
    return tuple(itertools.product(*(s.outcomes for s in sources)))


def r_prior(sources: Sequence[SourceModel]) -> np.ndarray:
    probs = []
    for combo in itertools.product(*(range(len(s.outcomes)) for s in sources)):
        p = 1.0
        for s, i in zip(sources, combo):
            p *= s.priors[i]
        probs.append(p)
    return np.asarray(probs)


class SignalModel:
    """Likelihood of one signal type given position class and credibility.

    Positions are mapped to classes (region labels) and likelihood rows
    are assessed per (class, credibility realization) in bulk; per-raster
    granularity is achieved by making a class per raster if an author
    needs it.
    """

    def __init__(
        self,
        type_id: str,
        values: Sequence[str],
        class_of_node: dict[int, str],
        table: dict[tuple[str, tuple[str, ...]], Sequence[float]],
        sources: Sequence[str] = (),
    ):
        self.type_id = type_id
        self.values = tuple(values)
        self.class_of_node = dict(class_of_node)
        self.sources = tuple(sources)
        self.table: dict[tuple[str, tuple[str, ...]], np.ndarray] = {}
        for key, row in table.items():
            cls, r_key = key[0], tuple(key[1])
            vec = np.asarray(row, dtype=float)
            if vec.shape != (len(self.values),):
                raise DimensionMismatch(
                    f"signal {type_id!r}: row {key} has {vec.size} entries for "
                    f"{len(self.values)} values"
                )
            if abs(float(vec.sum()) - 1.0) > LIK_ROW_TOL or np.any(vec < 0):
                raise DimensionMismatch(
                    f"signal {type_id!r}: likelihood row {key} is not a distribution"
                )
            self.table[(cls, r_key)] = vec
        self._node_cache: dict[tuple[tuple[str, ...], str], np.ndarray] = {}

    def value_index(self, value: str) -> int:
        try:
            return self.values.index(value)
        except ValueError:
            raise UnregisteredSignalType(
                f"value {value!r} not in alphabet of signal {self.type_id!r}"
            ) from None

    def node_likelihood(
        self, node_ids: Sequence[int], r_key: tuple[str, ...], value: str
    ) -> np.ndarray:
        """Likelihood of the observed value at every node under r_key."""
        cache_key = (r_key, value)
        if cache_key in self._node_cache:
            return self._node_cache[cache_key]
        vi = self.value_index(value)
        out = np.empty(len(node_ids))
        for i, nid in enumerate(node_ids):
            cls = self.class_of_node.get(nid)
            if cls is None:
                raise DimensionMismatch(
                    f"signal {self.type_id!r}: node {nid} has no state class"
                )
            row = self.table.get((cls, r_key))
            if row is None:
                raise DimensionMismatch(
                    f"signal {self.type_id!r}: no likelihood row for class {cls!r}, "
                    f"credibility {r_key}"
                )
            out[i] = row[vi]
        self._node_cache[cache_key] = out
        return out


@dataclass(frozen=True)
class Observation:
    """One observed signal value at a period."""

    period: int
    signal_type: str
    value: str
    sources: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "signal_type": self.signal_type,
            "value": self.value,
            "sources": list(self.sources),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Observation":
        return cls(
            period=int(d["period"]),
            signal_type=str(d["signal_type"]),
            value=str(d["value"]),
            sources=tuple(d.get("sources", ())),
        )


class BeliefState:
    """Joint posterior over (realization, credibility, position) at a period.

    Immutable by convention: advancing returns a fresh instance.
    """

    def __init__(
        self,
        period: int,
        realizations: tuple[DRealization, ...],
        r_keys: tuple[tuple[str, ...], ...],
        log_weights: np.ndarray,  # shape (|D|, |R|)
        conditionals: np.ndarray,  # shape (|D|, |R|, n)
        node_ids: tuple[int, ...],
        log_likelihood: float = 0.0,
    ):
        self.period = period
        self.realizations = realizations
        self.r_keys = r_keys
        self.log_weights = log_weights
        self.conditionals = conditionals
        self.node_ids = node_ids
        self.log_likelihood = log_likelihood

    # --- derived quantities -------------------------------------------

    @property
    def weights(self) -> np.ndarray:
        """Normalized joint weights P(D=j, R=r | signals)."""
        w = np.exp(self.log_weights - self.log_weights.max())
        return w / w.sum()

    def state_posterior(self) -> StateDistribution:
        w = self.weights
        pi = np.tensordot(w, self.conditionals, axes=([0, 1], [0, 1]))
        return StateDistribution(period=self.period, vector=pi)

    def realization_posterior(self) -> dict[int, float]:
        w = self.weights.sum(axis=1)
        return {real.index: float(w[i]) for i, real in enumerate(self.realizations)}

    def credibility_posterior(self) -> dict[tuple[str, ...], float]:
        w = self.weights.sum(axis=0)
        return {key: float(w[i]) for i, key in enumerate(self.r_keys)}

    def conditional_state(self, j_index: int) -> np.ndarray:
        """P(X_t | D = j, signals), mixing out credibility."""
        w = self.weights
        col = w[j_index]
        total = col.sum()
        if total <= 0.0:
            return np.zeros(self.conditionals.shape[2])
        return np.tensordot(col / total, self.conditionals[j_index], axes=(0, 0))

    def target_posterior(self) -> dict[str, float]:
        post = self.realization_posterior()
        out: dict[str, float] = {}
        for real in self.realizations:
            out[real.target] = out.get(real.target, 0.0) + post[real.index]
        return out

    # --- validation / serialization ------------------------------------

    def check_invariants(self, tol: float = WEIGHT_TOL):
        w = self.weights
        if abs(float(w.sum()) - 1.0) > tol:
            raise DimensionMismatch("joint weights do not sum to 1")
        sums = self.conditionals.sum(axis=2)
        live = w > 0
        if np.any(np.abs(sums[live] - 1.0) > tol):
            raise DimensionMismatch("a live conditional state vector does not sum to 1")

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "r_keys": [list(k) for k in self.r_keys],
            "realization_indices": [r.index for r in self.realizations],
            "log_weights": self.log_weights.tolist(),
            "conditionals": self.conditionals.tolist(),
            "node_ids": list(self.node_ids),
            "log_likelihood": self.log_likelihood,
        }

    @classmethod
    def from_dict(cls, d: dict, realizations: tuple[DRealization, ...]) -> "BeliefState":
        by_index = {r.index: r for r in realizations}
        ordered = tuple(by_index[i] for i in d["realization_indices"])
        return cls(
            period=int(d["period"]),
            realizations=ordered,
            r_keys=tuple(tuple(k) for k in d["r_keys"]),
            log_weights=np.asarray(d["log_weights"], dtype=float),
            conditionals=np.asarray(d["conditionals"], dtype=float),
            node_ids=tuple(d["node_ids"]),
            log_likelihood=float(d["log_likelihood"]),
        )


def init_belief(
    p0: StateDistribution,
    prior_d: dict[int, float],
    sources: Sequence[SourceModel],
    realizations: Sequence[DRealization],
    node_ids: Sequence[int],
) -> BeliefState:
    """Initial joint: realization prior x product credibility prior, every
    conditional position vector equal to p0."""
    realizations = tuple(sorted(realizations, key=lambda r: r.index))
    if set(prior_d) != {r.index for r in realizations}:
        raise DimensionMismatch("realization prior does not cover the realization set")
    d_vec = np.array([prior_d[r.index] for r in realizations])
    if abs(float(d_vec.sum()) - 1.0) > WEIGHT_TOL or np.any(d_vec < 0):
        raise DimensionMismatch("realization prior is not a distribution")
    p0.validate(len(node_ids))

    keys = r_realizations(sources)
    r_vec = r_prior(sources)
    joint = np.outer(d_vec, r_vec)
    with np.errstate(divide="ignore"):
        log_weights = np.log(joint)
    conditionals = np.broadcast_to(
        p0.vector, (len(realizations), len(keys), len(node_ids))
    ).copy()
    return BeliefState(
        period=p0.period,
        realizations=realizations,
        r_keys=keys,
        log_weights=log_weights,
        conditionals=conditionals,
        node_ids=tuple(node_ids),
        log_likelihood=0.0,
    )


def advance_belief(
    belief: BeliefState,
    models: dict[int, TransitionModel],
    signal_models: dict[str, SignalModel],
    observations: Observation | Sequence[Observation],
) -> BeliefState:
    """One filtering step: propagate every conditional vector through its
    realization's transition matrix, weight componentwise by the observed
    signal likelihood (simultaneous signals multiply in declaration
    order), and reweight the (j, r) pairs by their evidence likelihoods.
    """
    if isinstance(observations, Observation):
        observations = [observations]
    if not observations:
        raise UnregisteredSignalType("at least one observation per step")
    period = observations[0].period
    if any(o.period != period for o in observations):
        raise NonConsecutivePeriod("simultaneous observations must share a period")
    if period != belief.period + 1:
        raise NonConsecutivePeriod(
            f"observation period {period}, expected {belief.period + 1}"
        )
    for obs in observations:
        if obs.signal_type not in signal_models:
            raise UnregisteredSignalType(f"signal type {obs.signal_type!r} not registered")

    n_d, n_r, n = belief.conditionals.shape
    new_cond = np.empty_like(belief.conditionals)
    log_evidence = np.full((n_d, n_r), -np.inf)

    for di, real in enumerate(belief.realizations):
        model = models[real.index]
        propagated = belief.conditionals[di] @ model.matrix  # (|R|, n)
        for ri, r_key in enumerate(belief.r_keys):
            u = propagated[ri]
            for obs in observations:
                sm = signal_models[obs.signal_type]
                u = u * sm.node_likelihood(belief.node_ids, r_key, obs.value)
            ev = float(u.sum())
            if ev > 0.0:
                new_cond[di, ri] = u / ev
                log_evidence[di, ri] = np.log(ev)
            else:
                new_cond[di, ri] = propagated[ri]

    new_log_w = belief.log_weights + log_evidence
    finite = new_log_w[np.isfinite(new_log_w)]
    if finite.size == 0:
        raise ImpossibleObservation(
            f"observation(s) at period {period} have zero likelihood under every "
            "(realization, credibility) pair"
        )
    shift = finite.max()
    step_loglik = float(np.log(np.exp(new_log_w - shift).sum()) + shift)
    prev = belief.log_weights
    prev_finite = prev[np.isfinite(prev)]
    prev_shift = prev_finite.max()
    prev_norm = float(np.log(np.exp(prev - prev_shift).sum()) + prev_shift)

    return BeliefState(
        period=period,
        realizations=belief.realizations,
        r_keys=belief.r_keys,
        log_weights=new_log_w - step_loglik,
        conditionals=new_cond,
        node_ids=belief.node_ids,
        log_likelihood=belief.log_likelihood + (step_loglik - prev_norm),
    )


def belief_marginals(belief: BeliefState):
    """(pi_t, P(D | signals), P(R | signals)) from the joint weights."""
    return (
        belief.state_posterior(),
        belief.realization_posterior(),
        belief.credibility_posterior(),
    )
