"""Discretized geographic state space.

The crisis state is the cell ("raster") a moving entity occupies. The
graph is either curated data (the shipped historical scenario) or a
generated triangular lattice. Blocked cells model land masses: they stay
in the node set but take no part in adjacency for movement or path
length.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import AsymmetricAdjacency, UnknownNodeReference, Unreachable

UNREACHABLE = -1


@dataclass
class RasterGraph:
    """Symmetric adjacency over dense integer node ids.

    ``node_ids`` is the sorted external id list; internally nodes are
    indexed 0..n-1 in that order. ``labels`` carries optional display
    metadata (region name, centroid coordinates) and is never interpreted
    by the engine.
    """

    node_ids: tuple[int, ...]
    neighbors: dict[int, tuple[int, ...]]
    blocked: frozenset[int] = frozenset()
    labels: dict[int, dict] = field(default_factory=dict)

    def __post_init__(self):
        self._index = {nid: i for i, nid in enumerate(self.node_ids)}

    @property
    def size(self) -> int:
        return len(self.node_ids)

    def index_of(self, node_id: int) -> int:
        try:
            return self._index[node_id]
        except KeyError:
            raise UnknownNodeReference(f"unknown raster id {node_id}") from None

    def effective_neighbors(self, node_id: int) -> tuple[int, ...]:
        """Neighbors usable for movement: drops blocked cells; empty for a
        blocked origin."""
        if node_id in self.blocked:
            return ()
        return tuple(n for n in self.neighbors[node_id] if n not in self.blocked)

    def degree_stats(self) -> tuple[float, int, int]:
        degs = [len(self.effective_neighbors(n)) for n in self.node_ids
                if n not in self.blocked]
        return float(np.mean(degs)), min(degs), max(degs)


def load_raster_graph(data: dict) -> RasterGraph:
    """Validate the graph section of a scenario document.

    Expects ``{"nodes": [...], "adjacency": [[a, b], ...], "blocked": [...],
    "labels": {id: {...}}}``. Adjacency pairs must be symmetric: every
    listed pair is checked against its mirror (single listing of an
    unordered pair is accepted and mirrored).
    """
    nodes = tuple(sorted(int(n) for n in data["nodes"]))
    if len(set(nodes)) != len(nodes):
        raise UnknownNodeReference("duplicate node ids in graph")
    node_set = set(nodes)

    pair_set: set[tuple[int, int]] = set()
    for entry in data.get("adjacency", []):
        a, b = int(entry[0]), int(entry[1])
        if a not in node_set:
            raise UnknownNodeReference(f"adjacency references unknown node {a}")
        if b not in node_set:
            raise UnknownNodeReference(f"adjacency references unknown node {b}")
        if a == b:
            raise AsymmetricAdjacency(f"self-loop on node {a} (holding is not an edge)")
        pair_set.add((a, b))

    neighbors: dict[int, set[int]] = {n: set() for n in nodes}
    explicit_directed = data.get("directed_pairs", False)
    for a, b in pair_set:
        if explicit_directed and (b, a) not in pair_set:
            raise AsymmetricAdjacency(f"adjacency lists {a}->{b} but not {b}->{a}")
        neighbors[a].add(b)
        neighbors[b].add(a)

    blocked = frozenset(int(b) for b in data.get("blocked", []))
    for b in blocked:
        if b not in node_set:
            raise UnknownNodeReference(f"blocked list references unknown node {b}")

    labels = {int(k): dict(v) for k, v in data.get("labels", {}).items()}
    for k in labels:
        if k not in node_set:
            raise UnknownNodeReference(f"label references unknown node {k}")

    return RasterGraph(
        node_ids=nodes,
        neighbors={n: tuple(sorted(ns)) for n, ns in neighbors.items()},
        blocked=blocked,
        labels=labels,
    )


def hop_distances(graph: RasterGraph, targets: set[int] | frozenset[int]) -> np.ndarray:
    """Multi-source BFS distance (in hops) from every node to the target set.

    Blocked nodes never relay paths. A blocked node that is itself a
    target keeps distance 0 but does not propagate. Unreachable nodes get
    UNREACHABLE (-1).
    """
    dist = np.full(graph.size, UNREACHABLE, dtype=np.int64)
    queue: deque[int] = deque()
    for t in targets:
        idx = graph.index_of(t)
        dist[idx] = 0
        if t not in graph.blocked:
            queue.append(t)
    while queue:
        node = queue.popleft()
        d = dist[graph.index_of(node)]
        for nb in graph.neighbors[node]:
            if nb in graph.blocked:
                continue  # land: no path runs through it
            j = graph.index_of(nb)
            if dist[j] == UNREACHABLE:
                dist[j] = d + 1
                queue.append(nb)
    return dist


def shortest_hops(graph: RasterGraph, origin: int, targets: set[int]) -> int:
    """Minimum number of adjacency transitions from origin to the target set.

    Returns 0 when the origin is already inside the set. Raises
    Unreachable for disconnected scenarios (callers at scenario-load time
    report this as a warning rather than failing).
    """
    if not targets:
        raise UnknownNodeReference("target set is empty")
    if origin in targets:
        return 0
    if origin in graph.blocked:
        raise UnknownNodeReference(f"origin {origin} is blocked")
    d = hop_distances(graph, frozenset(targets))
    val = int(d[graph.index_of(origin)])
    if val == UNREACHABLE:
        raise Unreachable(f"no path from {origin} to target set")
    return val


@dataclass(frozen=True)
class LatticeSpec:
    """Parameters for a paper-faithful triangular lattice."""

    rows: int
    cols: int
    side_length_nm: float = 648.0
    period_hours: float = 12.0
    speed_knots: float = 27.0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise UnknownNodeReference("lattice needs rows >= 1 and cols >= 1")

    def travel_consistent(self) -> bool:
        return abs(self.side_length_nm - self.speed_knots * self.period_hours * 2) < 1e-9


def generate_lattice(spec: LatticeSpec, blocked_regions: set[int] | None = None) -> RasterGraph:
    """Triangular lattice of rows x cols cells, edge-sharing adjacency.

    Cell (r, c) points up when (r + c) is even. Numbering is row-major
    starting at 1 (row 0 = southernmost), so node id = r * cols + c + 1.
    Up-triangles share their base with the cell directly below; down
    triangles with the cell directly above.
    """
    blocked_regions = blocked_regions or set()
    rows, cols = spec.rows, spec.cols
    ids = tuple(range(1, rows * cols + 1))
    neighbors: dict[int, list[int]] = {i: [] for i in ids}

    def nid(r: int, c: int) -> int:
        return r * cols + c + 1

    for r in range(rows):
        for c in range(cols):
            me = nid(r, c)
            if c + 1 < cols:
                neighbors[me].append(nid(r, c + 1))
                neighbors[nid(r, c + 1)].append(me)
            if (r + c) % 2 == 0 and r > 0:  # up-triangle: base shared below
                neighbors[me].append(nid(r - 1, c))
                neighbors[nid(r - 1, c)].append(me)

    side = spec.side_length_nm
    height = side * np.sqrt(3.0) / 2.0
    labels = {}
    for r in range(rows):
        for c in range(cols):
            up = (r + c) % 2 == 0
            x = 0.5 * side * (c + 1)
            y = r * height + (height / 3.0 if up else 2.0 * height / 3.0)
            labels[nid(r, c)] = {"x_nm": x, "y_nm": y, "orientation": "up" if up else "down"}

    for b in blocked_regions:
        if b not in neighbors:
            raise UnknownNodeReference(f"blocked region id {b} outside lattice")

    return RasterGraph(
        node_ids=ids,
        neighbors={n: tuple(sorted(set(ns))) for n, ns in neighbors.items()},
        blocked=frozenset(blocked_regions),
        labels=labels,
    )
