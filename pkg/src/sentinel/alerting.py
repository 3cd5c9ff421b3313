"""Alert-timing optimization.

For every alert type and every candidate issue time up to the horizon,
the expected disutility combines the discounted fixed alert cost with the
certain equivalent of the failure costs of crisis arrivals that the
response could not beat (arrivals inside the lead-time window after the
alert). The scan is a direct numerical evaluation over the whole
(type, time) grid; no analytic shortcut is attempted.

Timing is resolved per alert type: each type's own curve over candidate
times has a minimum, and an alert is called for as soon as that minimum
sits at the present period. Raw disutility levels are not comparable
across types (a type with a tiny fixed cost undercuts every other type
everywhere, which would make the joint minimum permanently favor the
cheapest alert), so the recommended type is the one whose optimal time is
earliest, with ties going to the type protecting the largest failure
cost.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InconsistentHorizons
from .projection import FirstPassageDistribution

LINEAR = "LINEAR"
EXPONENTIAL = "EXPONENTIAL"


@dataclass(frozen=True)
class CostModel:
    """Costs, lead times, time preference and risk attitude.

    ``lead_times`` is keyed by (alert type, realization index); a missing
    key means the alert and the realization do not interact (the alert
    neither protects against nor is charged for that realization's
    failures). ``horizon`` is an absolute period.
    """

    failure_costs: dict[str, float]  # target -> v >= 0
    alert_costs: dict[str, float]  # alert type -> q > 0
    lead_times: dict[tuple[str, int], int]
    daily_discount_rate: float
    periods_per_day: int
    horizon: int
    disutility: str = LINEAR
    risk_coefficient: float = 0.0

    def __post_init__(self):
        for alert, q in self.alert_costs.items():
            if q <= 0.0:
                raise DimensionMismatch(f"alert cost for {alert!r} must be > 0")
        for target, v in self.failure_costs.items():
            if v < 0.0:
                raise DimensionMismatch(f"failure cost for {target!r} must be >= 0")
        for key, lead in self.lead_times.items():
            if lead < 0 or int(lead) != lead:
                raise DimensionMismatch(f"lead time for {key} must be a nonnegative integer")
        if self.periods_per_day < 1:
            raise DimensionMismatch("periods_per_day must be >= 1")
        if self.disutility not in (LINEAR, EXPONENTIAL):
            raise DimensionMismatch(f"unknown disutility kind {self.disutility!r}")
        if self.disutility == EXPONENTIAL and self.risk_coefficient <= 0.0:
            raise DimensionMismatch("exponential disutility needs risk coefficient > 0")

    @property
    def period_rate(self) -> float:
        """Per-period rate r with (1 + r)^periods_per_day = 1 + daily rate."""
        return (1.0 + self.daily_discount_rate) ** (1.0 / self.periods_per_day) - 1.0

    # Disutility of a nonnegative cost; U(0) = 0, increasing.
    def disutil(self, cost: float) -> float:
        if self.disutility == LINEAR:
            return cost
        g = self.risk_coefficient
        return math.expm1(g * cost) / g

    def disutil_inverse(self, value: float) -> float:
        if self.disutility == LINEAR:
            return value
        g = self.risk_coefficient
        return math.log1p(g * value) / g


def present_value(cost: float, period: int, model: CostModel) -> float:
    """Value at period 0 of a cost incurred ``period`` periods out."""
    if period < 0:
        raise DimensionMismatch("period must be >= 0")
    return cost * (1.0 + model.period_rate) ** (-period)


def certain_equivalent(
    alert_type: str,
    alert_time: int,
    realization_index: int,
    target: str,
    passage: FirstPassageDistribution,
    model: CostModel,
) -> tuple[float, bool]:
    """Certain equivalent of issuing ``alert_type`` at ``alert_time`` given
    one realization, plus a flag for lead windows truncated by the horizon.

    CE = PV(q at alert time) + U^-1( sum over the lead window of
    P(arrival at h) * U(PV(v at h)) ). Arrivals strictly after the window
    are met with enough lead time and cost nothing.
    """
    if not (passage.origin_period <= alert_time <= model.horizon):
        raise InconsistentHorizons(
            f"alert time {alert_time} outside [{passage.origin_period}, {model.horizon}]"
        )
    ce = present_value(model.alert_costs[alert_type], alert_time, model)
    lead = model.lead_times.get((alert_type, realization_index))
    if lead is None:
        return ce, False
    window_end = alert_time + lead
    truncated = window_end > model.horizon
    window_end = min(window_end, model.horizon)
    v = model.failure_costs[target]
    if v > 0.0:
        acc = 0.0
        for h in range(max(alert_time, passage.origin_period + 1), window_end + 1):
            p = passage.prob_at(h)
            if p > 0.0:
                acc += p * model.disutil(present_value(v, h, model))
        ce += model.disutil_inverse(acc)
    return ce, truncated


@dataclass
class AlertRecommendation:
    """Outcome of one scan: the most urgent alert type, its optimal time,
    whether that time is now, and the full surface for audit/plots.

    ``surface[alert_type]`` is the expected disutility at each candidate
    time from the evaluation period to the horizon. ``optimum`` records
    each type's own (best time, best value).
    """

    evaluated_period: int
    horizon: int
    alert_type: str
    time: int
    issue_now: bool
    surface: dict[str, np.ndarray]
    optimum: dict[str, tuple[int, float]]
    certain_equivalents: dict[tuple[str, int], float] = field(default_factory=dict)
    truncated_windows: int = 0

    def candidate_times(self) -> np.ndarray:
        return np.arange(self.evaluated_period, self.horizon + 1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["evaluation_period", "alert_type", "candidate_time", "expected_disutility"])
        for alert in sorted(self.surface):
            for tau, value in zip(self.candidate_times(), self.surface[alert]):
                writer.writerow([self.evaluated_period, alert, int(tau), repr(float(value))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "evaluated_period": self.evaluated_period,
            "horizon": self.horizon,
            "alert_type": self.alert_type,
            "time": self.time,
            "issue_now": self.issue_now,
            "surface": {k: v.tolist() for k, v in self.surface.items()},
            "optimum": {k: [t, v] for k, (t, v) in self.optimum.items()},
            "certain_equivalents": {
                f"{alert}|{j}": ce for (alert, j), ce in self.certain_equivalents.items()
            },
            "truncated_windows": self.truncated_windows,
        }


def _protected_cost(alert: str, model: CostModel, targets_by_index: dict[int, str]) -> float:
    costs = [
        model.failure_costs[targets_by_index[j]]
        for (a, j) in model.lead_times
        if a == alert and j in targets_by_index
    ]
    return max(costs, default=0.0)


def recommend_alert(
    realization_weights: dict[int, float],
    passages: dict[int, FirstPassageDistribution],
    realization_targets: dict[int, str],
    model: CostModel,
) -> AlertRecommendation:
    """Scan every (alert type, candidate time) cell and pick the most
    urgent alert.

    The surface entry is sum_j P(j | signals) * U(CE(alert, time | j)).
    Each type's optimal time is the earliest minimizer of its own curve;
    the recommendation is the type with the earliest optimal time (ties:
    larger protected failure cost, then label), and issue_now is true when
    that time is the evaluation period itself.
    """
    if set(realization_weights) != set(passages):
        raise DimensionMismatch("weights and passages disagree on realizations")
    origins = {fp.origin_period for fp in passages.values()}
    if len(origins) != 1:
        raise InconsistentHorizons("passages have mixed origin periods")
    t = origins.pop()
    if model.horizon <= t - 1:
        raise InconsistentHorizons(f"horizon {model.horizon} is before period {t}")

    times = np.arange(t, model.horizon + 1)
    rate = model.period_rate
    pv_times = (1.0 + rate) ** (-times.astype(float))
    surface: dict[str, np.ndarray] = {}
    optimum: dict[str, tuple[int, float]] = {}
    truncated = 0
    ce_audit: dict[tuple[str, int], float] = {}

    # Per-realization cumulative U(PV(v at h)) mass over h in (t, T]; the
    # window sum in the certain equivalent is then a cumsum difference.
    cum: dict[int, np.ndarray] = {}
    for j in sorted(realization_weights):
        fp = passages[j]
        h = np.arange(t + 1, model.horizon + 1)
        v = model.failure_costs[realization_targets[j]]
        pv_v = v * (1.0 + rate) ** (-h.astype(float))
        if model.disutility == LINEAR:
            terms = fp.probs[: len(h)] * pv_v
        else:
            g = model.risk_coefficient
            terms = fp.probs[: len(h)] * (np.expm1(g * pv_v) / g)
        cum[j] = np.concatenate([[0.0], np.cumsum(terms)])

    for alert in sorted(model.alert_costs):
        pv_q = model.alert_costs[alert] * pv_times
        values = np.zeros(len(times))
        for j in sorted(realization_weights):
            w = realization_weights[j]
            lead = model.lead_times.get((alert, j))
            if lead is None:
                ce = pv_q
            else:
                ends = np.minimum(times + lead, model.horizon) - t
                truncated += int(np.count_nonzero(times + lead > model.horizon))
                starts = np.maximum(times - 1 - t, 0)
                window = cum[j][ends] - cum[j][starts]
                if model.disutility == LINEAR:
                    ce = pv_q + window
                else:
                    g = model.risk_coefficient
                    ce = pv_q + np.log1p(g * window) / g
            if model.disutility == LINEAR:
                values += w * ce
            else:
                g = model.risk_coefficient
                values += w * (np.expm1(g * ce) / g)
        surface[alert] = values
        best_idx = int(np.argmin(values))  # argmin takes the earliest on ties
        optimum[alert] = (int(times[best_idx]), float(values[best_idx]))

    best_alert = min(
        optimum,
        key=lambda a: (
            optimum[a][0],
            -_protected_cost(a, model, realization_targets),
            a,
        ),
    )
    best_time = optimum[best_alert][0]
    for j in sorted(realization_weights):
        ce, _ = certain_equivalent(
            best_alert, best_time, j, realization_targets[j], passages[j], model
        )
        ce_audit[(best_alert, j)] = ce

    return AlertRecommendation(
        evaluated_period=t,
        horizon=model.horizon,
        alert_type=best_alert,
        time=best_time,
        issue_now=(best_time == t),
        surface=surface,
        optimum=optimum,
        certain_equivalents=ce_audit,
        truncated_windows=truncated,
    )
