"""Pair graph over ordered label pairs, with soft/hard edge classification.

Nodes are ordered pairs of distinct labels.  An edge between (a, b) and
(a', b') is witnessed by a binary view f satisfying the strict exchange
inequality f(a,a') + f(b,b') > f(a,b') + f(b,a') with both mixed entries
finite; the edge is soft when at least one of the two aligned entries is
also finite.  Detected edges are closed under two inference rules:

  mirror: an edge {p, q} forces {bar(p), bar(q)} with the same softness;
  chain:  edges {p, q} and {q, r} force {p, bar(r)}, soft if either parent
          is soft.

Both rules can also be replayed numerically (transpose / unary rebalancing /
middle-pinned chaining) to produce an explicit witness view for any closed
edge, which is how soft self-loop witnesses are extracted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .model import INF, Language
from .express import (
    BinaryView,
    Pool,
    PoolBudget,
    add_unaries_view,
    enumerate_binary_pool,
    min_chain,
    transpose_view,
)


def bar(p: tuple) -> tuple:
    return (p[1], p[0])


def _edge_key(p: tuple, q: tuple) -> tuple:
    return (p, q) if p <= q else (q, p)


@dataclass(frozen=True)
class PairEdge:
    endpoints: tuple  # canonical (min node, max node); equal for self-loops
    soft: bool
    provenance: tuple  # ("detected", view, quad) | ("mirror", key) | ("chain", ...)

    @property
    def is_self_loop(self) -> bool:
        return self.endpoints[0] == self.endpoints[1]


@dataclass(frozen=True)
class PairGraph:
    domain_size: int
    nodes: tuple
    edges: tuple
    M: tuple
    m_bar: tuple
    truncated: bool

    @cached_property
    def edge_map(self) -> dict:
        return {e.endpoints: e for e in self.edges}

    def soft_count(self) -> int:
        return sum(1 for e in self.edges if e.soft)

    def neighbors_in_m(self) -> dict:
        """Adjacency over M restricted to edges with both endpoints in M."""
        m_set = set(self.M)
        adj = {p: [] for p in self.M}
        for e in self.edges:
            p, q = e.endpoints
            if p in m_set and q in m_set and p != q:
                adj[p].append(q)
                adj[q].append(p)
        for p in adj:
            adj[p] = sorted(set(adj[p]))
        return adj


def all_pair_nodes(domain_size: int) -> tuple:
    return tuple(
        (a, b) for a in range(domain_size) for b in range(domain_size) if a != b
    )


def _exchange_violation(view: BinaryView, quad: tuple):
    """Return (is_edge, is_soft) of the exchange inequality at a quadruple."""
    a, b, a2, b2 = quad
    t = view.table.table
    d = view.domain_size
    cross1 = t[a * d + b2]
    cross2 = t[b * d + a2]
    if cross1 is INF or cross2 is INF:
        return False, False
    diag1 = t[a * d + a2]
    diag2 = t[b * d + b2]
    if not diag1 + diag2 > cross1 + cross2:
        return False, False
    return True, diag1 is not INF or diag2 is not INF


def detect_edges(views, domain_size: int) -> list:
    """Scan every view and quadruple; merge duplicates keeping soft over hard."""
    found: dict = {}
    pairs = all_pair_nodes(domain_size)
    for view in views:
        if view.domain_size != domain_size:
            raise ValueError(f"view {view.table.name} has a mismatched domain size")
        for p in pairs:
            for q in pairs:
                quad = (p[0], p[1], q[0], q[1])
                hit, soft = _exchange_violation(view, quad)
                if not hit:
                    continue
                key = _edge_key(p, q)
                existing = found.get(key)
                if existing is None or (soft and not existing.soft):
                    found[key] = PairEdge(key, soft, ("detected", view, quad))
    return [found[k] for k in sorted(found)]


def close_edges(edges) -> list:
    """Smallest superset closed under the mirror and chain rules.

    Softness propagates: a hard edge re-derived softly is upgraded in place
    (its provenance switches to the soft derivation so witnesses stay
    extractable).
    """
    state: dict = {}
    queue: list = []

    def insert(key, soft, provenance):
        existing = state.get(key)
        if existing is None:
            state[key] = PairEdge(key, soft, provenance)
            queue.append(key)
        elif soft and not existing.soft:
            state[key] = PairEdge(key, soft, provenance)
            queue.append(key)

    for e in edges:
        insert(e.endpoints, e.soft, e.provenance)

    def orientations(key):
        p, q = key
        return ((p, q),) if p == q else ((p, q), (q, p))

    head = 0
    while head < len(queue):
        key = queue[head]
        head += 1
        edge = state[key]
        p, q = key
        mirror_key = _edge_key(bar(p), bar(q))
        insert(mirror_key, edge.soft, ("mirror", key))
        for other_key in sorted(state):
            other = state[other_key]
            for o1 in orientations(key):
                for o2 in orientations(other_key):
                    if o1[1] == o2[0]:
                        derived = _edge_key(o1[0], bar(o2[1]))
                        insert(
                            derived,
                            edge.soft or other.soft,
                            ("chain", o1, key, o2, other_key),
                        )
                    if o2[1] == o1[0]:
                        derived = _edge_key(o2[0], bar(o1[1]))
                        insert(
                            derived,
                            edge.soft or other.soft,
                            ("chain", o2, other_key, o1, key),
                        )
    return [state[k] for k in sorted(state)]


def compute_m(domain_size: int, edges) -> tuple:
    """Split the pair nodes into loop-free (M) and self-looped (M-bar) sets."""
    loops = {e.endpoints[0] for e in edges if e.is_self_loop}
    nodes = all_pair_nodes(domain_size)
    m = tuple(p for p in nodes if p not in loops)
    m_bar = tuple(p for p in nodes if p in loops)
    return m, m_bar


@dataclass(frozen=True)
class GraphBuild:
    graph: PairGraph
    pool: Pool


def build_graph(lang: Language, budget: PoolBudget = PoolBudget()) -> GraphBuild:
    pool = enumerate_binary_pool(lang, budget)
    detected = detect_edges(pool.views, lang.domain_size)
    closed = close_edges(detected)
    m, m_bar = compute_m(lang.domain_size, closed)
    graph = PairGraph(
        domain_size=lang.domain_size,
        nodes=all_pair_nodes(lang.domain_size),
        edges=tuple(closed),
        M=m,
        m_bar=m_bar,
        truncated=pool.truncated,
    )
    return GraphBuild(graph=graph, pool=pool)


def _balance_block(view: BinaryView, quad: tuple) -> BinaryView:
    """Rebalance a witness with unaries so its 2x2 block is chain-ready.

    After rebalancing, the two mixed entries are equal and both aligned
    entries strictly exceed them (infinite entries trivially do).  The
    exchange-inequality margin is preserved because unary additions shift
    both sides of the inequality by the same amount.
    """
    a1, b1, a2, b2 = quad
    t = view.table.table
    d = view.domain_size
    alpha = t[a1 * d + a2]
    alpha2 = t[b1 * d + b2]
    g12 = t[a1 * d + b2]
    g21 = t[b1 * d + a2]
    if g12 is INF or g21 is INF:
        raise ValueError("witness quadruple has an infinite mixed entry")
    if alpha is INF and alpha2 is INF:
        vm = wm = 0
    elif alpha is INF:
        vm, wm = 0, max(0, g21 - alpha2 + 1)
    elif alpha2 is INF:
        wm, vm = 0, max(0, g12 - alpha + 1)
    else:
        # split the (positive) total margin evenly between the two sides
        gap = Fraction(g12 - alpha + alpha2 - g21, 2)
        vm = max(0, gap)
        wm = vm - gap
    delta = g21 - g12 + vm - wm
    sm = max(0, delta)
    tm = sm - delta
    u1 = [0] * d
    u2 = [0] * d
    u1[a1], u1[b1] = sm, tm
    u2[a2], u2[b2] = vm, wm
    return add_unaries_view(view, u1, u2)


def materialize_edge_witness(edge_map: dict, key: tuple, ordered: tuple):
    """Produce (view, quad) witnessing the edge in a requested orientation.

    The returned view satisfies the exchange inequality for the quadruple
    (u0, u1, v0, v1) where ordered = ((u0, u1), (v0, v1)); softness of the
    original edge carries over to the witness.
    """
    edge = edge_map[key]
    want = tuple(ordered)
    prov = edge.provenance
    kind = prov[0]
    if kind == "detected":
        view, quad = prov[1], prov[2]
        x, y = (quad[0], quad[1]), (quad[2], quad[3])
        if want == (x, y):
            return view, quad
        if want == (y, x):
            return transpose_view(view), (quad[2], quad[3], quad[0], quad[1])
        raise ValueError(f"edge {key} cannot witness orientation {want}")
    if kind == "mirror":
        parent_key = prov[1]
        w, q = materialize_edge_witness(edge_map, parent_key, (bar(want[0]), bar(want[1])))
        return w, (q[1], q[0], q[3], q[2])
    if kind == "chain":
        o1, k1, o2, k2 = prov[1], prov[2], prov[3], prov[4]
        p, q_node = o1
        r = o2[1]
        fv, fq = materialize_edge_witness(edge_map, k1, o1)
        gv, gq = materialize_edge_witness(edge_map, k2, o2)
        fhat = _balance_block(fv, fq)
        ghat = _balance_block(gv, gq)
        h = min_chain(fhat, ghat, (q_node[0], q_node[1]))
        quad = (p[0], p[1], r[1], r[0])
        if want == (p, bar(r)):
            return h, quad
        if want == (bar(r), p):
            return transpose_view(h), (quad[2], quad[3], quad[0], quad[1])
        raise ValueError(f"edge {key} cannot witness orientation {want}")
    raise ValueError(f"unknown edge provenance {kind!r}")


@dataclass(frozen=True)
class SoftLoopWitness:
    node: tuple
    view: BinaryView
    quad: tuple


def find_soft_self_loop(graph: PairGraph):
    """Extract an explicit soft self-loop witness, or None.

    Detected loops are preferred; derived loops are replayed through their
    derivation chain.  Views whose pin penalty leaked are skipped (they are
    sound for edge detection but unsuitable as hardness witnesses).  The
    extracted witness is re-verified before being returned.
    """
    edge_map = graph.edge_map
    loops = [e for e in graph.edges if e.is_self_loop and e.soft]
    loops.sort(key=lambda e: (e.provenance[0] != "detected", e.endpoints))
    for edge in loops:
        p = edge.endpoints[0]
        try:
            view, quad = materialize_edge_witness(edge_map, edge.endpoints, (p, p))
        except ValueError:
            continue
        if view.penalty_leaked:
            continue
        hit, soft = _exchange_violation(view, quad)
        if hit and soft:
            return SoftLoopWitness(node=p, view=view, quad=quad)
    return None


@dataclass(frozen=True)
class GraphDiagnostic:
    rule: str
    message: str
    witness: tuple


def _bipartition(graph: PairGraph):
    """Two-color (M, E[M]); returns (colors, components, odd_cycle | None)."""
    adj = graph.neighbors_in_m()
    colors: dict = {}
    component: dict = {}
    parents: dict = {}
    comp_id = 0
    odd_cycle = None
    for start in graph.M:
        if start in colors:
            continue
        colors[start] = 0
        component[start] = comp_id
        parents[start] = None
        frontier = [start]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v not in colors:
                        colors[v] = 1 - colors[u]
                        component[v] = comp_id
                        parents[v] = u
                        nxt.append(v)
                    elif colors[v] == colors[u] and odd_cycle is None:
                        odd_cycle = _cycle_through(parents, u, v)
            frontier = nxt
        comp_id += 1
    return colors, component, odd_cycle


def _path_to_root(parents: dict, u: tuple) -> list:
    path = [u]
    while parents[path[-1]] is not None:
        path.append(parents[path[-1]])
    return path


def _cycle_through(parents: dict, u: tuple, v: tuple) -> tuple:
    pu = _path_to_root(parents, u)
    pv = _path_to_root(parents, v)
    common = None
    pv_set = set(pv)
    for node in pu:
        if node in pv_set:
            common = node
            break
    up = pu[: pu.index(common) + 1]
    down = pv[: pv.index(common)]
    return tuple(up + list(reversed(down)))


def check_graph_invariants(graph: PairGraph) -> list:
    """Structural diagnostics on a closed graph with no soft self-loop.

    Violations indicate a closure bug: the inference rules are exactly what
    forces these properties, so a properly closed graph cannot fail them.
    """
    out = []
    m_set = set(graph.M)
    for e in graph.edges:
        p, q = e.endpoints
        if (p in m_set) != (q in m_set):
            out.append(
                GraphDiagnostic(
                    "boundary-edge",
                    f"edge {p}--{q} crosses between loop-free and looped nodes",
                    e.endpoints,
                )
            )
    colors, component, odd_cycle = _bipartition(graph)
    if odd_cycle is not None:
        out.append(
            GraphDiagnostic(
                "odd-cycle",
                f"loop-free subgraph has an odd cycle {odd_cycle}",
                odd_cycle,
            )
        )
    for p in graph.M:
        pb = bar(p)
        if p < pb and component.get(p) is not None and component.get(p) == component.get(pb):
            if colors[p] == colors[pb]:
                out.append(
                    GraphDiagnostic(
                        "swap-parity",
                        f"{p} and {pb} share a component but sit in the same class",
                        (p, pb),
                    )
                )
    m_bar_set = set(graph.m_bar)
    for e in graph.edges:
        if e.soft and (e.endpoints[0] in m_bar_set or e.endpoints[1] in m_bar_set):
            out.append(
                GraphDiagnostic(
                    "soft-at-loop",
                    f"soft edge {e.endpoints} touches a self-looped node",
                    e.endpoints,
                )
            )
    return out


def mirror_symmetric(graph: PairGraph) -> bool:
    edge_map = graph.edge_map
    for e in graph.edges:
        p, q = e.endpoints
        partner = edge_map.get(_edge_key(bar(p), bar(q)))
        if partner is None or partner.soft != e.soft:
            return False
    return True


def to_dot(graph: PairGraph) -> str:
    """Deterministic DOT rendering: soft solid, hard dashed, looped shaded."""
    m_bar_set = set(graph.m_bar)
    lines = ["graph pair_graph {"]
    for p in graph.nodes:
        label = f"{p[0]}|{p[1]}"
        if p in m_bar_set:
            lines.append(f'  "{label}" [style=filled, fillcolor=gray80];')
        else:
            lines.append(f'  "{label}";')
    for e in sorted(graph.edges, key=lambda e: e.endpoints):
        p, q = e.endpoints
        style = "" if e.soft else " [style=dashed]"
        lines.append(f'  "{p[0]}|{p[1]}" -- "{q[0]}|{q[1]}"{style};')
    lines.append("}")
    return "\n".join(lines) + "\n"
