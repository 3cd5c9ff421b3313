"""Per-realization transition matrices from the raster graph.

A realization of the static joint variable fixes a target (hence a
trapping set) and an urgency level (hence a holding probability). The
transition matrix is populated automatically: the chance of stepping to
an adjacent cell falls off exponentially with that cell's remaining
shortest-path length to the trapping set,

    weight(m) ~ exp(-(length(m) + 1)),

so closer cells are preferred but not certain. The diagonal is pinned to
the holding probability first and the off-diagonal weights are then
scaled to the remaining mass; trapping rows are exactly absorbing.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import UnknownNodeReference
from .statespace import UNREACHABLE, RasterGraph, hop_distances

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class DRealization:
    """One realization of the static joint variable."""

    index: int
    target: str
    immediacy: str  # "IMMEDIATE" | "DELAYED"
    holding_probability: float

    def __post_init__(self):
        if not (0.0 <= self.holding_probability < 1.0):
            raise UnknownNodeReference(
                f"holding probability {self.holding_probability} outside [0, 1)"
            )

    @property
    def key(self) -> str:
        return f"{self.target}|{self.immediacy}"


@dataclass
class TransitionModel:
    """Row-stochastic matrix over the graph's node order."""

    graph: RasterGraph
    matrix: np.ndarray
    trapping: frozenset[int]
    holding: float
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def trapping_indices(self) -> np.ndarray:
        return np.array(sorted(self.graph.index_of(t) for t in self.trapping), dtype=np.int64)

    def to_csv(self) -> str:
        """Audit export: one line per nonzero entry (row id, col id, probability)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["row_id", "col_id", "probability"])
        ids = self.graph.node_ids
        rows, cols = np.nonzero(self.matrix)
        for r, c in zip(rows, cols):
            writer.writerow([ids[r], ids[c], repr(float(self.matrix[r, c]))])
        return buf.getvalue()


def build_transition_matrix(
    graph: RasterGraph,
    trapping: set[int] | frozenset[int],
    holding: float,
) -> TransitionModel:
    """Populate one transition matrix for a given trapping set and holding
    probability.

    Transient rows put ``holding`` on the diagonal and split ``1 - holding``
    over adjacent non-blocked cells with weights exp(-(length(m) + 1)),
    where length(m) is m's hop distance to the trapping set (0 inside it).
    Cells that cannot reach the set at all get uniform off-diagonal
    weights and are flagged. Isolated transient cells become pure holding
    rows and are flagged.
    """
    if not (0.0 <= holding < 1.0):
        raise UnknownNodeReference(f"holding probability {holding} outside [0, 1)")
    trapping = frozenset(int(t) for t in trapping)
    for t in trapping:
        graph.index_of(t)

    n = graph.size
    dist = hop_distances(graph, trapping)
    matrix = np.zeros((n, n))
    warnings: list[str] = []

    for i, node in enumerate(graph.node_ids):
        if node in trapping:
            matrix[i, i] = 1.0
            continue
        nbrs = graph.effective_neighbors(node)
        if node in graph.blocked or not nbrs:
            matrix[i, i] = 1.0
            if node not in graph.blocked:
                warnings.append(f"node {node}: no adjacent non-blocked cell, pure holding")
            continue

        nbr_idx = np.array([graph.index_of(m) for m in nbrs], dtype=np.int64)
        lengths = dist[nbr_idx]
        if dist[i] == UNREACHABLE:
            # The heuristic's lengths are undefined here; least-commitment
            # uniform spread, reported at build time.
            weights = np.ones(len(nbrs))
            warnings.append(f"node {node}: trapping set unreachable, uniform weights")
        else:
            finite = lengths != UNREACHABLE
            weights = np.zeros(len(nbrs))
            if np.any(finite):
                shifted = lengths[finite] - lengths[finite].min()
                weights[finite] = np.exp(-shifted.astype(float))
        total = weights.sum()
        if total <= 0.0:
            matrix[i, i] = 1.0
            warnings.append(f"node {node}: no neighbor can reach the trapping set")
            continue
        matrix[i, i] = holding
        matrix[i, nbr_idx] = (1.0 - holding) * weights / total

    return TransitionModel(
        graph=graph,
        matrix=matrix,
        trapping=trapping,
        holding=holding,
        warnings=tuple(warnings),
    )


def build_transition_models(
    graph: RasterGraph,
    realizations: list[DRealization],
    trapping_sets: dict[str, set[int]],
) -> dict[int, TransitionModel]:
    """One matrix per realization; realizations sharing (target, holding)
    share the computed matrix."""
    cache: dict[tuple[str, float], TransitionModel] = {}
    out: dict[int, TransitionModel] = {}
    for real in realizations:
        if real.target not in trapping_sets:
            raise UnknownNodeReference(
                f"realization {real.index}: target {real.target!r} has no trapping set"
            )
        key = (real.target, real.holding_probability)
        if key not in cache:
            cache[key] = build_transition_matrix(
                graph, trapping_sets[real.target], real.holding_probability
            )
        out[real.index] = cache[key]
    return out
