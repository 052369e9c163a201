"""Instance solving: exact brute force and a min-cut route for ordered labels.

The min-cut path applies when every term is unary or binary and every
binary table is submodular under a given total order on the labels.  Labels
are re-expressed through per-variable threshold indicators; second
differences of each binary table (non-positive by submodularity) become arc
capacities, infinite arcs keep the indicators monotone, and an exact
rational max-flow yields the optimum.  Both solvers agree bit-for-bit on
cost by construction, which the test suite exercises against random
submodular corpora.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .model import (
    INF,
    BudgetExceeded,
    CostFunction,
    InputError,
    VcspInstance,
    evaluate,
)
from . import dichotomy

DEFAULT_BRUTE_BUDGET = 1 << 24


class IntractableAtScale(RuntimeError):
    """No polynomial route applies and the instance exceeds the exact budget."""


@dataclass(frozen=True)
class SolveResult:
    assignment: tuple
    cost: object
    method: str  # "brute_force" | "min_cut"
    stats: dict = field(default_factory=dict)


def brute_force(instance: VcspInstance, budget: int = DEFAULT_BRUTE_BUDGET) -> SolveResult:
    """Global minimum by enumeration; ties go to the lexicographically
    smallest assignment."""
    n = instance.node_count
    if n == 0:
        return SolveResult((), 0, "brute_force", {"evaluations": 1})
    d = instance.domain_size()
    total = d ** n
    if total > budget:
        raise BudgetExceeded(
            f"{total} assignments exceed the exact-enumeration budget {budget}"
        )
    plans = [(f.table, scope) for f, scope in instance.all_terms()]
    best_cost = INF
    best = None
    for assignment in itertools.product(range(d), repeat=n):
        cost = 0
        for table, scope in plans:
            idx = 0
            for s in scope:
                idx = idx * d + assignment[s]
            v = table[idx]
            if v is INF:
                cost = INF
                break
            cost = cost + v
        if best is None or cost < best_cost:
            best_cost = cost
            best = assignment
    stats = {"evaluations": total}
    if best_cost is INF:
        stats["infeasible"] = True
    return SolveResult(best, best_cost, "brute_force", stats)


class FlowNetwork:
    """Directed network with exact rational capacities; INF arcs allowed.

    Arcs are stored in forward/backward pairs (the backward arc has zero
    capacity), so arc index i and i^1 are residual partners.
    """

    def __init__(self, node_count: int):
        self.node_count = node_count
        self.tails: list = []
        self.heads: list = []
        self.caps: list = []
        self.adjacency: list = [[] for _ in range(node_count)]

    def add_node(self) -> int:
        self.adjacency.append([])
        self.node_count += 1
        return self.node_count - 1

    def add_arc(self, tail: int, head: int, capacity) -> int:
        if capacity is not INF and capacity < 0:
            raise InputError("arc capacities must be non-negative")
        i = len(self.caps)
        self.tails.extend((tail, head))
        self.heads.extend((head, tail))
        self.caps.extend((capacity, 0))
        self.adjacency[tail].append(i)
        self.adjacency[head].append(i + 1)
        return i


def max_flow(network: FlowNetwork, source: int, sink: int):
    """Exact max flow via shortest augmenting paths, deterministic arc order.

    Returns (value, source_side, cut_value); source_side is the set of nodes
    residual-reachable from the source, and cut_value always equals the flow
    value (checked).  A fully infinite augmenting path yields (INF, None,
    INF).
    """
    caps = network.caps
    heads = network.heads
    adjacency = network.adjacency
    flow = [0] * len(caps)

    def residual(i):
        c = caps[i]
        return INF if c is INF else c - flow[i]

    value = 0
    while True:
        parent_arc = {source: None}
        queue = [source]
        head_pos = 0
        while head_pos < len(queue) and sink not in parent_arc:
            u = queue[head_pos]
            head_pos += 1
            for i in adjacency[u]:
                v = heads[i]
                if v not in parent_arc and residual(i) > 0:
                    parent_arc[v] = i
                    queue.append(v)
        if sink not in parent_arc:
            break
        path = []
        node = sink
        while parent_arc[node] is not None:
            arc = parent_arc[node]
            path.append(arc)
            node = heads[arc ^ 1]
        bottleneck = INF
        for i in path:
            r = residual(i)
            if r < bottleneck:
                bottleneck = r
        if bottleneck is INF:
            return INF, None, INF
        for i in path:
            if caps[i] is not INF:
                flow[i] += bottleneck
            flow[i ^ 1] -= bottleneck
        value = value + bottleneck

    reach = {source}
    queue = [source]
    while queue:
        u = queue.pop()
        for i in adjacency[u]:
            v = heads[i]
            if v not in reach and residual(i) > 0:
                reach.add(v)
                queue.append(v)
    cut_value = 0
    for i in range(0, len(caps), 2):
        if network.tails[i] in reach and heads[i] not in reach:
            cut_value = cut_value + caps[i]
    assert cut_value == value, "max-flow / min-cut duality violated"
    return value, frozenset(reach), cut_value


def submodularity_violation(f: CostFunction, order: tuple):
    """First quadruple where min/max under the order fails, or None."""
    if f.arity != 2:
        raise InputError(f"{f.name}: submodularity check is for binary tables")
    d = f.domain_size
    rank = {label: i for i, label in enumerate(order)}
    t = f.table
    for x1 in range(d):
        for x2 in range(d):
            for y1 in range(d):
                for y2 in range(d):
                    lo1, hi1 = (x1, y1) if rank[x1] <= rank[y1] else (y1, x1)
                    lo2, hi2 = (x2, y2) if rank[x2] <= rank[y2] else (y2, x2)
                    lhs = t[lo1 * d + lo2] + t[hi1 * d + hi2]
                    rhs = t[x1 * d + x2] + t[y1 * d + y2]
                    if lhs > rhs:
                        return ((x1, x2), (y1, y2))
    return None


def solve_mincut(instance: VcspInstance, order: tuple) -> SolveResult:
    """Exact optimum through the threshold-indicator cut encoding.

    Requires unary/binary finite terms, all binary tables submodular under
    the order.  The decoded assignment is the canonical minimum cut
    (pointwise lowest in the order among optima); its cost is re-evaluated
    and always equals offset + flow.
    """
    n = instance.node_count
    terms = instance.all_terms()
    if n == 0:
        return SolveResult((), 0, "min_cut", {})
    if not terms:
        raise InputError("instance has no terms; nothing to encode")
    d = terms[0][0].domain_size
    if sorted(order) != list(range(d)):
        raise InputError(f"order {order} is not a permutation of 0..{d - 1}")
    unary = [[0] * d for _ in range(n)]  # rank space
    binary_terms = []
    for f, scope in terms:
        if f.arity > 2:
            raise InputError(f"{f.name}: min-cut route handles arity <= 2 only")
        if not f.is_finite_valued():
            raise InputError(f"{f.name}: min-cut route requires finite tables")
        if f.arity == 1:
            for r in range(d):
                unary[scope[0]][r] += f.table[order[r]]
        elif scope[0] == scope[1]:
            for r in range(d):
                unary[scope[0]][r] += f.table[order[r] * d + order[r]]
        else:
            bad = submodularity_violation(f, order)
            if bad is not None:
                raise InputError(
                    f"{f.name} on scope {scope} is not submodular under {order}: "
                    f"violating pair {bad}"
                )
            binary_terms.append((f, scope))

    k = d - 1  # thresholds per variable
    net = FlowNetwork(2 + n * k)
    source, sink = 0, 1

    def node_id(v, t):  # t in 1..k
        return 2 + v * k + (t - 1)

    offset = 0
    linear = [[0] * (k + 1) for _ in range(n)]  # index by threshold 1..k
    for v in range(n):
        offset += unary[v][0]
        for t in range(1, d):
            linear[v][t] += unary[v][t] - unary[v][t - 1]
    for f, (u, v) in binary_terms:
        t_ = f.table
        B = [[t_[order[s] * d + order[t]] for t in range(d)] for s in range(d)]
        offset += B[0][0]
        for s in range(1, d):
            linear[u][s] += B[s][0] - B[s - 1][0]
        for t in range(1, d):
            linear[v][t] += B[0][t] - B[0][t - 1]
        for s in range(1, d):
            for t in range(1, d):
                dd = B[s][t] - B[s - 1][t] - B[s][t - 1] + B[s - 1][t - 1]
                if dd > 0:  # cannot happen after the submodularity check
                    raise InputError(f"{f.name}: non-submodular second difference")
                if dd != 0:
                    linear[u][s] += dd
                    net.add_arc(node_id(u, s), node_id(v, t), -dd)
    for v in range(n):
        for t in range(1, d):
            a = linear[v][t]
            if a > 0:
                net.add_arc(node_id(v, t), sink, a)
            elif a < 0:
                offset += a
                net.add_arc(source, node_id(v, t), -a)
        for t in range(1, d - 1):
            net.add_arc(node_id(v, t + 1), node_id(v, t), INF)

    value, source_side, cut_value = max_flow(net, source, sink)
    assert value is not INF, "finite-table encoding cannot have an infinite cut"
    assignment = []
    for v in range(n):
        indicators = [1 if node_id(v, t) in source_side else 0 for t in range(1, d)]
        assert all(
            indicators[i] >= indicators[i + 1] for i in range(len(indicators) - 1)
        ), "threshold indicators must form a staircase"
        assignment.append(order[sum(indicators)])
    assignment = tuple(assignment)
    cost = offset + value
    check = evaluate(instance, assignment)
    assert check == cost, f"decoded cost {check} != offset+flow {cost}"
    return SolveResult(
        assignment,
        cost,
        "min_cut",
        {"flow": value, "cut": cut_value, "offset": offset},
    )


def solve(
    instance: VcspInstance,
    classification: "dichotomy.Classification",
    budget: int = DEFAULT_BRUTE_BUDGET,
) -> SolveResult:
    """Dispatch: min-cut when the language is tractable with a known order
    and the instance is pairwise; exact enumeration otherwise."""
    order = classification.submodular_order
    pairwise = all(f.arity <= 2 for f, _ in instance.all_terms())
    finite = all(f.is_finite_valued() for f, _ in instance.all_terms())
    if (
        classification.verdict == dichotomy.TRACTABLE
        and order is not None
        and pairwise
        and finite
        and instance.node_count > 0
        and instance.all_terms()
    ):
        return solve_mincut(instance, order)
    try:
        return brute_force(instance, budget)
    except BudgetExceeded as exc:
        raise IntractableAtScale(
            f"no polynomial route for a {classification.verdict} language "
            f"instance of this size: {exc}"
        ) from exc
