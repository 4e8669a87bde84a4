"""Cost-decreasing digraphs and nested graph families.

A costed digraph assigns each node a natural cost; every edge between
distinct nodes must strictly decrease the cost, so the only cycles a
conforming graph can contain are trivial ones (self-loops).  Sinks,
nodes with no edge to a distinct node, are exactly the local minima
and are reached from every start by following edges.

A nested family stacks such graphs: each node of a positive-rank
problem may be backed by a child problem of strictly smaller rank, and
a stored table translates any solution of the child (one of its
trivial cycles) into an outgoing edge of the backing node.  Families
are the combinatorial model of the nested search and convert directly
into instances of the search core.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping

from .errors import (
    CostConditionViolated,
    InvariantViolation,
    TotalityViolated,
)
from .search_core import (
    NplsInstance,
    Polynomial,
    PredicatePls,
)


@dataclass(frozen=True)
class CostedDigraph:
    """A finite digraph with one natural cost per node."""

    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    costs: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.costs) != self.n_nodes:
            raise ValueError("one cost per node required")
        for s, t in self.edges:
            if not (0 <= s < self.n_nodes and 0 <= t < self.n_nodes):
                raise ValueError(f"edge ({s},{t}) leaves the node range")

    def successors(self, s: int) -> list[int]:
        return sorted(t for (a, t) in self.edges if a == s)


def check_cost_condition(g: CostedDigraph) -> None:
    """Raise unless every edge between distinct nodes decreases the cost."""
    for s, t in g.edges:
        if s != t and g.costs[s] <= g.costs[t]:
            raise CostConditionViolated(
                f"edge ({s},{t}) has costs {g.costs[s]} -> {g.costs[t]}"
            )


def find_sink(g: CostedDigraph, start: int) -> int:
    """Walk cost-decreasing edges from start until no distinct successor is left.

    The walk always picks the smallest-id distinct successor, so the
    result is deterministic.  Conformance of the edge costs is checked
    first; it is what makes the walk terminate.
    """
    check_cost_condition(g)
    if not 0 <= start < g.n_nodes:
        raise ValueError(f"start node {start} out of range")
    current = start
    while True:
        nxt = [t for t in g.successors(current) if t != current]
        if not nxt:
            return current
        current = nxt[0]


def sinks(g: CostedDigraph) -> list[int]:
    """All nodes with no outgoing edge to a distinct node."""
    out = []
    for s in range(g.n_nodes):
        if all(t == s for t in g.successors(s)):
            out.append(s)
    return out


def pls_from_digraph(g: CostedDigraph, start: int = 0) -> PredicatePls:
    """View a costed digraph as a relational local search instance.

    Points are node ids, the relation keeps the edges that strictly
    decrease the cost, and the cardinality bound is the largest such
    out-degree.  Self-loops never decrease the cost, so local minima of
    the instance are exactly the sinks of the graph.
    """
    check_cost_condition(g)
    if not 0 <= start < g.n_nodes:
        raise ValueError(f"start node {start} out of range")
    decreasing: dict[int, set[int]] = {s: set() for s in range(g.n_nodes)}
    for s, t in g.edges:
        if s != t and g.costs[s] > g.costs[t]:
            decreasing[s].add(t)
    degree = max((len(v) for v in decreasing.values()), default=0)
    d_bits = max((g.n_nodes - 1).bit_length(), 1)

    return PredicatePls(
        d_bound=Polynomial.constant(d_bits),
        feasible=lambda x, s: 0 <= s < g.n_nodes,
        initial=lambda x: start,
        neighbor_rel=lambda x, s, t: t in decreasing.get(s, ()),
        cost=lambda x, s: g.costs[s] if 0 <= s < g.n_nodes else 0,
        p_bound=Polynomial.constant(max(degree, 1)),
    )


@dataclass(frozen=True)
class NestedGraphFamily:
    """One problem of a nested family, with its children attached.

    ``children`` maps a node id to the backing subproblem and
    ``solution_to_edge`` maps (node, solution node of its child) to the
    successor the solution points at.  Rank-zero problems carry no
    children.
    """

    graph: CostedDigraph
    rank: int
    children: Mapping[int, "NestedGraphFamily"] = field(default_factory=dict)
    solution_to_edge: Mapping[tuple[int, int], int] = field(default_factory=dict)


def validate_family(fam: NestedGraphFamily) -> list[str]:
    """Collect every structural defect of a family, depth first."""
    issues: list[str] = []

    def visit(f: NestedGraphFamily, label: str) -> None:
        g = f.graph
        try:
            check_cost_condition(g)
        except CostConditionViolated as exc:
            issues.append(f"{label}: {exc}")
        loops = {s for (s, t) in g.edges if s == t}
        for s in range(g.n_nodes):
            if not g.successors(s):
                issues.append(f"{label}: node {s} has no outgoing edge")
        if not loops:
            issues.append(f"{label}: no trivial cycle anywhere")
        if f.rank == 0 and f.children:
            issues.append(f"{label}: rank-0 problem has children")
        for node, child in sorted(f.children.items()):
            if child.rank >= f.rank:
                issues.append(
                    f"{label}: child at node {node} has rank {child.rank}, parent {f.rank}"
                )
        if f.rank > 0:
            for s in range(g.n_nodes):
                if s not in f.children and s not in loops:
                    issues.append(
                        f"{label}: node {s} has neither a child problem nor a self-loop"
                    )
            for node, child in sorted(f.children.items()):
                child_solutions = {s for (s, t) in child.graph.edges if s == t}
                for sol in sorted(child_solutions):
                    key = (node, sol)
                    if key in f.solution_to_edge:
                        tgt = f.solution_to_edge[key]
                        if (node, tgt) not in set(g.edges):
                            issues.append(
                                f"{label}: solution table ({node},{sol}) -> {tgt} is not an edge"
                            )
                    elif (node, node) not in set(g.edges):
                        issues.append(
                            f"{label}: solution table misses ({node},{sol}) and node "
                            f"{node} has no self-loop to fall back on"
                        )
        for node, child in sorted(f.children.items()):
            visit(child, f"{label}.{node}")

    visit(fam, "top")
    return issues


def _flatten(fam: NestedGraphFamily) -> list[NestedGraphFamily]:
    """All problems of a family in preorder; the top problem comes first."""
    out: list[NestedGraphFamily] = []

    def visit(f: NestedGraphFamily) -> None:
        out.append(f)
        for node in sorted(f.children):
            visit(f.children[node])

    visit(fam)
    return out


def npls_from_family(fam: NestedGraphFamily) -> NplsInstance:
    """Compile a family into a nested search instance.

    Point ids pack a problem id and a node id into fixed bit fields; a
    source is a bare problem id and a target is a packed pair.  On
    rank-zero problems the neighbor relation is the graph of the step
    function, which follows the cheapest-by-id decreasing successor and
    rests on self-loops.  On positive ranks the relation is the edge
    relation itself.

    The only structural prerequisite enforced here is that every node
    has some outgoing edge, which keeps the step functions total.  Cost
    conformance and rank relationships are not enforced, so a
    deliberately broken family still compiles and its defects surface
    as failed conditions in the checker.
    """
    problems = _flatten(fam)
    pid_of = {id(p): i for i, p in enumerate(problems)}
    n_problems = len(problems)
    max_nodes = max(p.graph.n_nodes for p in problems)
    node_bits = max((max_nodes - 1).bit_length(), 1)
    pid_bits = max((n_problems - 1).bit_length(), 1)
    node_mask = (1 << node_bits) - 1

    ranks: list[int] = []
    sizes: list[int] = []
    costs: list[tuple[int, ...]] = []
    edge_sets: list[frozenset[tuple[int, int]]] = []
    step_fn: list[dict[int, int]] = []
    child_pid: dict[tuple[int, int], int] = {}
    sol_edge: dict[tuple[int, int, int], int] = {}

    for i, p in enumerate(problems):
        ranks.append(p.rank)
        sizes.append(p.graph.n_nodes)
        costs.append(p.graph.costs)
        edges = frozenset(p.graph.edges)
        edge_sets.append(edges)
        steps: dict[int, int] = {}
        for s in range(p.graph.n_nodes):
            succ = p.graph.successors(s)
            if not succ:
                raise TotalityViolated(f"problem {i}: node {s} has no outgoing edge")
            cheaper = [t for t in succ if t != s and p.graph.costs[t] < p.graph.costs[s]]
            steps[s] = cheaper[0] if cheaper else s
        step_fn.append(steps)
        for node, child in p.children.items():
            child_pid[(i, node)] = pid_of[id(child)]
        for (node, sol), tgt in p.solution_to_edge.items():
            sol_edge[(i, node, sol)] = tgt

    def pack(pid: int, node: int) -> int:
        return (pid << node_bits) | node

    def unpack(t: int) -> tuple[int, int]:
        return t >> node_bits, t & node_mask

    def src(x: int, s: int) -> bool:
        return 0 <= s < n_problems

    def tgt(x: int, s: int, t: int) -> bool:
        if not src(x, s) or t < 0:
            return False
        pid, node = unpack(t)
        return pid == s and node < sizes[s]

    def rel(x: int, s: int, y: int, z: int) -> bool:
        if not (tgt(x, s, y) and tgt(x, s, z)) or s >= n_problems:
            return False
        a, b = y & node_mask, z & node_mask
        if ranks[s] == 0:
            return step_fn[s][a] == b
        return (a, b) in edge_sets[s]

    def nbr0(x: int, s: int, y: int) -> int:
        if not src(x, s) or ranks[s] != 0:
            raise InvariantViolation(f"step function called on a rank>0 row {s}")
        return pack(s, step_fn[s][y & node_mask])

    def gen_source(x: int, s: int, y: int) -> int:
        node = y & node_mask
        return child_pid.get((s, node), s)

    def extract(x: int, s: int, y: int, z: int) -> int:
        node = y & node_mask
        _, sol = unpack(z)
        key = (s, node, sol)
        if key in sol_edge:
            return pack(s, sol_edge[key])
        if (node, node) in edge_sets[s]:
            return y
        raise InvariantViolation(f"no translation for solution {sol} at node {node} of {s}")

    return NplsInstance(
        d_bound=Polynomial.constant(pid_bits + node_bits),
        sources=src,
        targets=tgt,
        nbr_rel=rel,
        nbr0=nbr0,
        initial_source=lambda x: 0,
        initial_target=lambda x, s: pack(s, 0),
        cost=lambda x, t: costs[t >> node_bits][t & node_mask],
        gen_source=gen_source,
        extract=extract,
        rank=lambda x, s: ranks[s] if 0 <= s < n_problems else 0,
    )


def unpack_point(inst_family: NestedGraphFamily, point: int) -> tuple[int, int]:
    """Split a packed target id of a family instance into (problem, node)."""
    problems = _flatten(inst_family)
    max_nodes = max(p.graph.n_nodes for p in problems)
    node_bits = max((max_nodes - 1).bit_length(), 1)
    return point >> node_bits, point & ((1 << node_bits) - 1)


def generate_family(seed: int, max_rank: int, max_width: int) -> NestedGraphFamily:
    """Draw a random conforming family, deterministically from the seed.

    The top problem has exactly ``max_width`` nodes and rank
    ``max_rank``; every node of a positive-rank problem is backed by a
    child one rank lower.  Costs within a problem are a shuffled range,
    hence distinct.  Edges only ever point at cheaper nodes, each local
    minimum gets its trivial cycle, and rank-zero problems keep at most
    one outgoing edge per node so their descent is a chain.
    """
    if not 0 <= max_rank <= 4:
        raise ValueError("max_rank must lie in 0..4")
    if not 1 <= max_width <= 16:
        raise ValueError("max_width must lie in 1..16")
    rng = random.Random(seed)

    def build(rank: int, width: int) -> NestedGraphFamily:
        n = width
        cost_list = list(range(n))
        rng.shuffle(cost_list)
        costs = tuple(cost_list)
        edges: set[tuple[int, int]] = set()
        for s in range(n):
            cheaper = [t for t in range(n) if costs[t] < costs[s]]
            if rank == 0:
                if cheaper and rng.random() < 0.8:
                    edges.add((s, rng.choice(cheaper)))
                else:
                    edges.add((s, s))
            else:
                picked = [t for t in cheaper if rng.random() < 0.6]
                if picked:
                    edges.update((s, t) for t in picked)
                else:
                    edges.add((s, s))
        graph = CostedDigraph(n, tuple(sorted(edges)), costs)
        if rank == 0:
            return NestedGraphFamily(graph, 0)
        children: dict[int, NestedGraphFamily] = {}
        table: dict[tuple[int, int], int] = {}
        for s in range(n):
            child_width = max_width if max_width == 1 else rng.randint(2, max_width)
            child = build(rank - 1, child_width)
            children[s] = child
            solutions = sorted({a for (a, b) in child.graph.edges if a == b})
            out = sorted(t for (a, t) in edges if a == s and t != s)
            for sol in solutions:
                table[(s, sol)] = rng.choice(out) if out else s
        return NestedGraphFamily(graph, rank, children, table)

    return build(max_rank, max_width)
