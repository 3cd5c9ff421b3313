"""First-passage-time projection.

Given the current state distribution and a transition matrix whose
trapping rows are absorbing, the chance the process first enters the
trapping set at each future period is obtained by propagating only the
transient mass and recording the per-step inflow into the set:

    v_t      = current distribution with trapping components zeroed
    arrive(s+1) = sum over trapping of (v_s P)
    v_{s+1}  = (v_s P) with trapping components zeroed

Mass already absorbed at the origin period never counts again, so the
per-period values form a sub-distribution; whatever has not arrived by
the horizon is reported as residual mass, never renormalized away.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InconsistentHorizons
from .transitions import TransitionModel

CLAMP = 1e-15


@dataclass
class StateDistribution:
    """Probability vector over the graph's node order at a given period."""

    period: int
    vector: np.ndarray

    def validate(self, size: int, tol: float = 1e-10):
        if self.vector.shape != (size,):
            raise DimensionMismatch(
                f"state vector has {self.vector.shape[0]} entries, graph has {size}"
            )
        if np.any(self.vector < -tol):
            raise DimensionMismatch("state vector has negative entries")
        if abs(float(self.vector.sum()) - 1.0) > tol:
            raise DimensionMismatch(
                f"state vector sums to {self.vector.sum():.12g}, not 1"
            )


@dataclass
class FirstPassageDistribution:
    """P(first entry at period tau) for tau in (origin, horizon]."""

    origin_period: int
    horizon: int
    probs: np.ndarray  # index 0 -> tau = origin_period + 1
    residual: float
    conditioning: str = "marginal"

    def periods(self) -> np.ndarray:
        return np.arange(self.origin_period + 1, self.horizon + 1)

    def prob_at(self, tau: int) -> float:
        if tau <= self.origin_period or tau > self.horizon:
            return 0.0
        return float(self.probs[tau - self.origin_period - 1])

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def cumulative_at(self, tau: int) -> float:
        """P(first entry <= tau)."""
        if tau <= self.origin_period:
            return 0.0
        tau = min(tau, self.horizon)
        return float(self.probs[: tau - self.origin_period].sum())

    def window_mass(self, start: int, end: int) -> float:
        """P(first entry in [start, end]), clipped to the distribution's span."""
        if end < start:
            return 0.0
        return self.cumulative_at(end) - self.cumulative_at(start - 1)

    def total(self) -> float:
        return float(self.probs.sum())


def first_passage(
    start: StateDistribution,
    model: TransitionModel,
    horizon: int,
    conditioning: str = "marginal",
) -> FirstPassageDistribution:
    """First-passage distribution from ``start`` through ``model`` up to the
    absolute period ``horizon``."""
    if horizon <= start.period:
        raise InconsistentHorizons(
            f"horizon {horizon} not beyond origin period {start.period}"
        )
    start.validate(model.size)

    trap = model.trapping_indices()
    steps = horizon - start.period
    v = start.vector.astype(float).copy()
    v[trap] = 0.0
    probs = np.zeros(steps)
    for s in range(steps):
        w = v @ model.matrix
        arrived = float(w[trap].sum())
        probs[s] = 0.0 if arrived < CLAMP else arrived
        w[trap] = 0.0
        v = w
    residual = float(v.sum())
    return FirstPassageDistribution(
        origin_period=start.period,
        horizon=horizon,
        probs=probs,
        residual=residual,
        conditioning=conditioning,
    )


def first_passage_matrix_power(
    start: StateDistribution, model: TransitionModel, horizon: int
) -> FirstPassageDistribution:
    """Literal matrix-power evaluation of the same quantity (cross-check
    implementation; quadratic in horizon)."""
    if horizon <= start.period:
        raise InconsistentHorizons(
            f"horizon {horizon} not beyond origin period {start.period}"
        )
    start.validate(model.size)
    trap = model.trapping_indices()
    steps = horizon - start.period
    probs = np.zeros(steps)
    for s in range(steps):
        propagated = start.vector.astype(float).copy()
        for _ in range(s):
            propagated = propagated @ model.matrix
        propagated[trap] = 0.0
        stepped = propagated @ model.matrix
        probs[s] = float(stepped[trap].sum())
    # Residual from the recursion definition: transient mass at the horizon.
    v = start.vector.astype(float).copy()
    v[trap] = 0.0
    for _ in range(steps):
        v = v @ model.matrix
        v[trap] = 0.0
    return FirstPassageDistribution(
        origin_period=start.period,
        horizon=horizon,
        probs=probs,
        residual=float(v.sum()),
    )


@dataclass
class AttackDistribution:
    """Joint (target, period) attack distribution under current beliefs."""

    origin_period: int
    horizon: int
    targets: tuple[str, ...]
    probs: dict[str, np.ndarray]  # target -> per-tau array

    def prob(self, target: str, tau: int) -> float:
        arr = self.probs[target]
        if tau <= self.origin_period or tau > self.horizon:
            return 0.0
        return float(arr[tau - self.origin_period - 1])

    def cumulative(self, target: str) -> np.ndarray:
        return np.cumsum(self.probs[target])

    def cumulative_at(self, target: str, tau: int) -> float:
        if tau <= self.origin_period:
            return 0.0
        tau = min(tau, self.horizon)
        return float(self.probs[target][: tau - self.origin_period].sum())

    def window_mass(self, target: str, start: int, end: int) -> float:
        if end < start:
            return 0.0
        return self.cumulative_at(target, end) - self.cumulative_at(target, start - 1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["target", "period", "probability", "cumulative"])
        for target in self.targets:
            cum = 0.0
            for i, tau in enumerate(range(self.origin_period + 1, self.horizon + 1)):
                p = float(self.probs[target][i])
                cum += p
                writer.writerow([target, tau, repr(p), repr(cum)])
        return buf.getvalue()


def marginal_attack_distribution(
    weights: dict[int, float],
    passages: dict[int, FirstPassageDistribution],
    realization_targets: dict[int, str],
    weight_tol: float = 1e-9,
) -> AttackDistribution:
    """Mix per-realization first-passage distributions into a joint
    (target, period) distribution using the current realization weights."""
    if abs(sum(weights.values()) - 1.0) > weight_tol:
        raise DimensionMismatch(
            f"realization weights sum to {sum(weights.values()):.12g}, not 1"
        )
    if set(weights) != set(passages):
        raise DimensionMismatch("weights and passage distributions disagree on realizations")

    origins = {fp.origin_period for fp in passages.values()}
    horizons = {fp.horizon for fp in passages.values()}
    if len(origins) != 1 or len(horizons) != 1:
        raise InconsistentHorizons(
            f"mixed origins {sorted(origins)} or horizons {sorted(horizons)}"
        )
    origin, horizon = origins.pop(), horizons.pop()

    targets = tuple(dict.fromkeys(realization_targets[j] for j in sorted(weights)))
    probs = {t: np.zeros(horizon - origin) for t in targets}
    for j in sorted(weights):
        probs[realization_targets[j]] += weights[j] * passages[j].probs
    return AttackDistribution(
        origin_period=origin, horizon=horizon, targets=targets, probs=probs
    )


def passage_table_csv(
    passages: dict[int, FirstPassageDistribution],
    realizations: dict[int, tuple[str, str]],
) -> str:
    """Per-realization export: (target, realization, period, probability,
    cumulative)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["target", "immediacy", "realization", "period", "probability", "cumulative"])
    for j in sorted(passages):
        fp = passages[j]
        target, immediacy = realizations[j]
        cum = 0.0
        for i, tau in enumerate(fp.periods()):
            p = float(fp.probs[i])
            cum += p
            writer.writerow([target, immediacy, j, int(tau), repr(p), repr(cum)])
    return buf.getvalue()
