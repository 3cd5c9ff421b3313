"""Discrete Bayesian networks with exact inference.

The crisis-definition layer is a small directed network of discrete
variables. Inference is exact variable elimination (the networks in scope
are tiny), with a min-degree elimination order and a lexicographic
tie-break so results and intermediate factor shapes are deterministic
across runs. Independence queries use the standard reachability form of
the Bayes Ball algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    CycleDetected,
    DanglingParent,
    UnknownVariable,
    UnnormalizedRow,
    ZeroProbabilityEvidence,
)

ROW_SUM_TOL = 1e-12
POSTERIOR_TOL = 1e-10


@dataclass(frozen=True)
class DiscreteVariable:
    """A named discrete variable with an ordered outcome list."""

    name: str
    outcomes: tuple[str, ...]
    kind: str = "chance"  # "chance" | "deterministic"

    def __post_init__(self):
        if len(self.outcomes) < 1:
            raise UnnormalizedRow(f"variable {self.name!r} has no outcomes")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise UnnormalizedRow(f"variable {self.name!r} has duplicate outcome labels")
        if self.kind not in ("chance", "deterministic"):
            raise UnknownVariable(f"variable {self.name!r} has unknown kind {self.kind!r}")

    @property
    def cardinality(self) -> int:
        return len(self.outcomes)

    def index_of(self, outcome: str) -> int:
        try:
            return self.outcomes.index(outcome)
        except ValueError:
            raise UnknownVariable(
                f"outcome {outcome!r} not in variable {self.name!r}"
            ) from None


@dataclass
class ConditionalTable:
    """P(child | parents) as a dense array.

    ``rows`` maps a tuple of parent outcomes (in parent order) to a
    probability vector over the child's outcomes. With no parents the single
    row is keyed by the empty tuple.
    """

    child: str
    parents: tuple[str, ...]
    rows: dict[tuple[str, ...], Sequence[float]]


class Factor:
    """Nonnegative table over a tuple of variables (internal to elimination)."""

    __slots__ = ("vars", "values")

    def __init__(self, vars: tuple[str, ...], values: np.ndarray):
        self.vars = vars
        self.values = values

    def multiply(self, other: "Factor") -> "Factor":
        merged = self.vars + tuple(v for v in other.vars if v not in self.vars)
        a = self._aligned(merged)
        b = other._aligned(merged)
        return Factor(merged, a * b)

    def _aligned(self, merged: tuple[str, ...]) -> np.ndarray:
        # Expand to the merged scope via transposition plus size-1 axes.
        present = [v for v in merged if v in self.vars]
        arr = np.transpose(self.values, [self.vars.index(v) for v in present])
        shape = [arr.shape[present.index(v)] if v in self.vars else 1 for v in merged]
        return arr.reshape(shape)

    def marginalize(self, var: str) -> "Factor":
        axis = self.vars.index(var)
        new_vars = self.vars[:axis] + self.vars[axis + 1:]
        return Factor(new_vars, self.values.sum(axis=axis))

    def reduce(self, var: str, index: int) -> "Factor":
        axis = self.vars.index(var)
        new_vars = self.vars[:axis] + self.vars[axis + 1:]
        return Factor(new_vars, np.take(self.values, index, axis=axis))


@dataclass
class CrisisNetwork:
    """A validated directed network over discrete variables."""

    variables: dict[str, DiscreteVariable]
    edges: tuple[tuple[str, str], ...]
    tables: dict[str, ConditionalTable]
    _parents: dict[str, tuple[str, ...]] = field(default_factory=dict, repr=False)
    _children: dict[str, tuple[str, ...]] = field(default_factory=dict, repr=False)
    _cpts: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def parents(self, name: str) -> tuple[str, ...]:
        self._require(name)
        return self._parents.get(name, ())

    def children(self, name: str) -> tuple[str, ...]:
        self._require(name)
        return self._children.get(name, ())

    def cpt(self, name: str) -> np.ndarray:
        """Array of shape (card(parent_1), ..., card(parent_k), card(child))."""
        return self._cpts[name]

    def _require(self, name: str):
        if name not in self.variables:
            raise UnknownVariable(f"unknown variable {name!r}")

    def topological_order(self) -> list[str]:
        order, seen = [], set()

        def visit(v: str):
            for p in self._parents.get(v, ()):
                if p not in seen:
                    visit(p)
            if v not in seen:
                seen.add(v)
                order.append(v)

        for v in sorted(self.variables):
            visit(v)
        return order


@dataclass(frozen=True)
class Evidence:
    """Observed outcomes keyed by variable name."""

    assignments: Mapping[str, str]

    def validate(self, net: CrisisNetwork):
        for name, outcome in self.assignments.items():
            net._require(name)
            net.variables[name].index_of(outcome)


class JointDistribution:
    """Exact posterior over an ordered tuple of query variables."""

    def __init__(self, variables: tuple[DiscreteVariable, ...], probs: np.ndarray):
        self.variables = variables
        self.probs = probs

    def prob(self, *outcomes: str) -> float:
        idx = tuple(v.index_of(o) for v, o in zip(self.variables, outcomes))
        return float(self.probs[idx])

    def as_dict(self) -> dict[tuple[str, ...], float]:
        out = {}
        for idx in np.ndindex(*self.probs.shape):
            key = tuple(v.outcomes[i] for v, i in zip(self.variables, idx))
            out[key] = float(self.probs[idx])
        return out

    def single(self) -> dict[str, float]:
        """Outcome -> probability map; only valid for one query variable."""
        if len(self.variables) != 1:
            raise ValueError("single() requires exactly one query variable")
        return {o: float(p) for o, p in zip(self.variables[0].outcomes, self.probs)}


def build_network(
    variables: Iterable[DiscreteVariable],
    edges: Iterable[tuple[str, str]],
    tables: Iterable[ConditionalTable],
) -> CrisisNetwork:
    """Validate and compile a network: acyclic edges, normalized rows,
    table parents matching in-edges."""
    var_map = {v.name: v for v in variables}
    edge_list = tuple(edges)
    for parent, child in edge_list:
        if parent not in var_map:
            raise DanglingParent(f"edge parent {parent!r} is not a declared variable")
        if child not in var_map:
            raise DanglingParent(f"edge child {child!r} is not a declared variable")

    parent_map: dict[str, list[str]] = {name: [] for name in var_map}
    child_map: dict[str, list[str]] = {name: [] for name in var_map}
    for parent, child in edge_list:
        parent_map[child].append(parent)
        child_map[parent].append(child)

    # Cycle check: Kahn's algorithm.
    indeg = {n: len(ps) for n, ps in parent_map.items()}
    queue = sorted(n for n, d in indeg.items() if d == 0)
    visited = 0
    while queue:
        n = queue.pop()
        visited += 1
        for c in child_map[n]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    if visited != len(var_map):
        cyclic = sorted(n for n, d in indeg.items() if d > 0)
        raise CycleDetected(f"edge set contains a cycle through {cyclic}")

    table_map = {t.child: t for t in tables}
    cpts: dict[str, np.ndarray] = {}
    for name, var in var_map.items():
        table = table_map.get(name)
        if table is None:
            raise DanglingParent(f"variable {name!r} has no conditional table")
        declared = tuple(table.parents)
        if sorted(declared) != sorted(parent_map[name]):
            raise DanglingParent(
                f"table for {name!r} lists parents {declared}, edges give "
                f"{tuple(sorted(parent_map[name]))}"
            )
        for p in declared:
            if p not in var_map:
                raise DanglingParent(f"table for {name!r} references unknown parent {p!r}")

        parent_vars = [var_map[p] for p in declared]
        shape = tuple(p.cardinality for p in parent_vars) + (var.cardinality,)
        arr = np.zeros(shape)
        expected_rows = int(np.prod([p.cardinality for p in parent_vars], initial=1))
        if len(table.rows) != expected_rows:
            raise UnnormalizedRow(
                f"table for {name!r} has {len(table.rows)} rows, expected {expected_rows}"
            )
        for key, row in table.rows.items():
            key = tuple(key)
            if len(key) != len(parent_vars):
                raise DanglingParent(
                    f"table row key {key} for {name!r} does not match parents {declared}"
                )
            idx = tuple(p.index_of(o) for p, o in zip(parent_vars, key))
            vec = np.asarray(row, dtype=float)
            if vec.shape != (var.cardinality,):
                raise UnnormalizedRow(
                    f"row {key} of {name!r} has {vec.size} entries, "
                    f"child has {var.cardinality} outcomes"
                )
            if np.any(vec < 0) or np.any(vec > 1 + ROW_SUM_TOL):
                raise UnnormalizedRow(f"row {key} of {name!r} has entries outside [0, 1]")
            if abs(float(vec.sum()) - 1.0) > ROW_SUM_TOL:
                raise UnnormalizedRow(
                    f"row {key} of {name!r} sums to {vec.sum():.15g}, not 1"
                )
            arr[idx] = vec
        if var.kind == "deterministic":
            flat = arr.reshape(-1, var.cardinality)
            if not np.all(np.isclose(flat.max(axis=1), 1.0, atol=ROW_SUM_TOL)):
                raise UnnormalizedRow(
                    f"deterministic variable {name!r} has a row without a certain outcome"
                )
        cpts[name] = arr

    net = CrisisNetwork(
        variables=var_map,
        edges=edge_list,
        tables=table_map,
        _parents={n: tuple(ps) for n, ps in parent_map.items()},
        _children={n: tuple(cs) for n, cs in child_map.items()},
        _cpts=cpts,
    )
    return net


def _network_factors(net: CrisisNetwork, evidence: Evidence) -> list[Factor]:
    factors = []
    for name in sorted(net.variables):
        table = net.tables[name]
        scope = tuple(table.parents) + (name,)
        f = Factor(scope, net.cpt(name).copy())
        for var, outcome in evidence.assignments.items():
            if var in f.vars:
                f = f.reduce(var, net.variables[var].index_of(outcome))
        factors.append(f)
    return factors


def _elimination_order(factors: list[Factor], keep: set[str]) -> list[str]:
    """Min-degree order over the interaction graph, lexicographic tie-break."""
    neighbors: dict[str, set[str]] = {}
    for f in factors:
        for v in f.vars:
            neighbors.setdefault(v, set()).update(u for u in f.vars if u != v)
    order = []
    remaining = {v for v in neighbors if v not in keep}
    while remaining:
        pick = min(remaining, key=lambda v: (len(neighbors[v] & remaining), v))
        order.append(pick)
        adj = neighbors[pick] & remaining
        for u in adj:
            neighbors[u].update(adj - {u})
            neighbors[u].discard(pick)
        remaining.discard(pick)
    return order


def posterior_query(
    net: CrisisNetwork,
    query: Sequence[str],
    evidence: Evidence | None = None,
) -> JointDistribution:
    """Exact joint posterior over the query variables given evidence.

    Raises ZeroProbabilityEvidence when the evidence has prior probability
    zero, which signals an inconsistent model or observation set rather
    than a uniform fallback.
    """
    if not query:
        raise UnknownVariable("query must name at least one variable")
    evidence = evidence or Evidence({})
    for q in query:
        net._require(q)
        if q in evidence.assignments:
            raise UnknownVariable(f"query variable {q!r} is also evidence")
    evidence.validate(net)

    factors = _network_factors(net, evidence)
    for var in _elimination_order(factors, keep=set(query)):
        bucket = [f for f in factors if var in f.vars]
        rest = [f for f in factors if var not in f.vars]
        if not bucket:
            continue
        prod = bucket[0]
        for f in bucket[1:]:
            prod = prod.multiply(f)
        factors = rest + [prod.marginalize(var)]

    result = factors[0]
    for f in factors[1:]:
        result = result.multiply(f)
    # Collapse any stray scalar axes and order axes as the query was given.
    for v in list(result.vars):
        if v not in query:
            result = result.marginalize(v)
    order = [result.vars.index(q) for q in query]
    values = np.transpose(result.values, order)

    total = float(values.sum())
    if total <= 0.0:
        raise ZeroProbabilityEvidence(
            f"evidence {dict(evidence.assignments)} has probability 0"
        )
    values = values / total
    return JointDistribution(tuple(net.variables[q] for q in query), values)


def d_separated(
    net: CrisisNetwork,
    x: str,
    y: str,
    given: Sequence[str] = (),
) -> bool:
    """True iff every path between x and y is blocked by the conditioning set.

    Reachability formulation of Bayes Ball: traverse (node, direction)
    states, letting colliders pass only when an observed descendant opens
    them.
    """
    net._require(x)
    net._require(y)
    observed = set()
    for g in given:
        net._require(g)
        observed.add(g)
    if x == y:
        return False
    if x in observed or y in observed:
        # Degenerate query: a conditioned endpoint carries no free variation.
        return True

    ancestors = set()
    stack = list(observed)
    while stack:
        n = stack.pop()
        if n in ancestors:
            continue
        ancestors.add(n)
        stack.extend(net.parents(n))

    # States: (node, "up") entered from a child; (node, "down") entered
    # from a parent. Start by leaving x as if from a phantom child.
    visited = set()
    frontier = [(x, "up")]
    while frontier:
        node, direction = frontier.pop()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node == y:
            return False
        if direction == "up" and node not in observed:
            for p in net.parents(node):
                frontier.append((p, "up"))
            for c in net.children(node):
                frontier.append((c, "down"))
        elif direction == "down":
            if node not in observed:
                for c in net.children(node):
                    frontier.append((c, "down"))
            if node in ancestors:  # collider opened by observed descendant
                for p in net.parents(node):
                    frontier.append((p, "up"))
    return True


def enumerate_joint(net: CrisisNetwork) -> tuple[list[str], np.ndarray]:
    """Full joint table in sorted-variable order (exponential; small nets only)."""
    names = sorted(net.variables)
    shape = tuple(net.variables[n].cardinality for n in names)
    joint = np.ones(shape)
    for name in names:
        table = net.tables[name]
        scope = tuple(table.parents) + (name,)
        f = Factor(scope, net.cpt(name))
        joint = joint * f._aligned(tuple(names))
    return names, joint
