"""NP-hardness gadget reductions from a soft self-loop witness.

A soft self-loop at pair (a, b) yields, after symmetrization and unary
rebalancing, a binary h with equal diagonal entries strictly above equal
off-diagonal entries (both finite), or the crisp variant with three zero
entries and an infinite corner.  The first encodes max-cut, the second
maximum independent set; each reduction ships an explicit affine decoder so
correctness can be replayed bit-exactly against combinatorial brute force.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import INF, CostFunction, InputError, VcspInstance, is_finite
from .express import BinaryView, add_unaries_view, shift_view, symmetrize
from .pairgraph import _exchange_violation


class WitnessNormalizationError(InputError):
    """The view cannot be brought into a canonical gadget form."""


def _is_symmetric(view: BinaryView) -> bool:
    d = view.domain_size
    t = view.table.table
    return all(t[x * d + y] == t[y * d + x] for x in range(d) for y in range(x + 1, d))


@dataclass(frozen=True)
class SourceGraph:
    vertex_count: int
    edges: tuple  # sorted (u, v) with u < v, no duplicates

    def __post_init__(self):
        seen = set()
        norm = []
        for u, v in self.edges:
            if u == v:
                raise InputError(f"self-loop {u} not allowed in a source graph")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise InputError(f"edge ({u}, {v}) outside vertex range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InputError(f"duplicate edge {key}")
            seen.add(key)
            norm.append(key)
        object.__setattr__(self, "edges", tuple(sorted(norm)))


@dataclass(frozen=True)
class HardnessWitness:
    pair_node: tuple
    view: BinaryView
    kind: str  # "both_finite" | "one_infinite"
    normalized: BinaryView

    def block(self):
        a, b = self.pair_node
        t = self.normalized.table
        return (t.value((a, a)), t.value((a, b)), t.value((b, a)), t.value((b, b)))


@dataclass(frozen=True)
class Decoder:
    """decoded = (offset - optimum) / slope, exactly."""

    kind: str
    offset: object
    slope: object

    def decode(self, optimum):
        if optimum is INF:
            raise InputError("cannot decode an infeasible optimum")
        return Fraction(self.offset - optimum) / Fraction(self.slope)


def normalize_witness(view: BinaryView, a: int, b: int) -> HardnessWitness:
    """Canonicalize a soft self-loop witness at pair (a, b).

    Both-diagonals-finite: symmetrize, then equalize the diagonals with a
    half-gap unary on the cheaper label.  One-diagonal-infinite: orient the
    infinite corner second, require the finite block to be flat (otherwise
    reject and let the caller look for a cleaner witness), then zero it by
    an exact shift.
    """
    hit, soft = _exchange_violation(view, (a, b, a, b))
    if not hit or not soft:
        raise InputError(f"view is not a soft self-loop witness at ({a}, {b})")
    g = view if _is_symmetric(view) else symmetrize(view)
    d = g.domain_size
    gaa, gbb, gab = g.value(a, a), g.value(b, b), g.value(a, b)
    if is_finite(gaa) and is_finite(gbb):
        if gaa == gbb:
            h = g
        else:
            cheap = a if gaa < gbb else b
            correction = Fraction(abs(gbb - gaa), 2)
            u = [0] * d
            u[cheap] = correction
            h = add_unaries_view(g, u, u)
        haa, hab = h.value(a, a), h.value(a, b)
        assert haa == h.value(b, b) and hab == h.value(b, a) and haa > hab
        return HardnessWitness((a, b), view, "both_finite", h)
    # exactly one diagonal is infinite: put it at the second label
    s, t = (a, b) if gbb is INF else (b, a)
    flat = g.value(s, s)
    if flat != gab:
        raise WitnessNormalizationError(
            "finite block is not flat after symmetrization; trying another witness"
        )
    h = g
    if d > 2:
        pen = [0 if z in (s, t) else gab + 1 for z in range(d)]
        h = add_unaries_view(h, pen, pen)
    if gab != 0:
        h = shift_view(h, -gab)
    assert h.value(s, s) == h.value(s, t) == h.value(t, s) == 0
    assert h.value(t, t) is INF
    return HardnessWitness((s, t), view, "one_infinite", h)


def witness_from_loop(pool_views, node: tuple):
    """Scan pool views for a normalizable soft self-loop witness at a node."""
    a, b = node
    for view in pool_views:
        if view.penalty_leaked:
            continue
        hit, soft = _exchange_violation(view, (a, b, a, b))
        if not (hit and soft):
            continue
        try:
            return normalize_witness(view, a, b)
        except WitnessNormalizationError:
            continue
    return None


def _restriction_unary(name: str, d: int, keep: tuple, penalty) -> CostFunction:
    return CostFunction(name, 1, d, tuple(0 if z in keep else penalty for z in range(d)))


def reduce_maxcut(src: SourceGraph, witness: HardnessWitness):
    """One node per vertex, the normalized h per edge; cut size decodes affinely.

    Within the two witness labels each uncut edge pays the diagonal value and
    each cut edge the (smaller) off-diagonal value, so the optimum is
    |E| * h(a,a) - maxcut * (h(a,a) - h(a,b)).  A finite steep unary keeps
    every node on the two labels.
    """
    if witness.kind != "both_finite":
        raise InputError("max-cut reduction needs a both-finite witness")
    a, b = witness.pair_node
    h = witness.normalized.table
    haa, hab = h.value((a, a)), h.value((a, b))
    if not (haa == h.value((b, b)) and hab == h.value((b, a)) and haa > hab):
        raise InputError("witness is not in normalized max-cut form")
    d = h.domain_size
    n_edges = len(src.edges)
    penalty = 1 + n_edges * haa
    restrict = _restriction_unary("keep_ab", d, (a, b), penalty)
    terms = [(h, (u, v)) for u, v in src.edges]
    terms.extend((restrict, (v,)) for v in range(src.vertex_count))
    instance = VcspInstance(node_count=src.vertex_count, terms=tuple(terms))
    decoder = Decoder(kind="maxcut", offset=n_edges * haa, slope=haa - hab)
    return instance, decoder


def reduce_mis(src: SourceGraph, witness: HardnessWitness):
    """Independent-set gadget: the infinite corner forbids adjacent picks.

    Each vertex pays 1 unless assigned the second witness label; edge terms
    cost nothing on the zero block, so the optimum is n - mis.
    """
    if witness.kind != "one_infinite":
        raise InputError("independent-set reduction needs a one-infinite witness")
    s, t = witness.pair_node
    h = witness.normalized.table
    if not (
        h.value((s, s)) == h.value((s, t)) == h.value((t, s)) == 0
        and h.value((t, t)) is INF
    ):
        raise InputError("witness is not in normalized independent-set form")
    d = h.domain_size
    n = src.vertex_count
    penalty = 1 + n
    unary = [penalty] * d
    unary[s], unary[t] = 1, 0
    choose = CostFunction("prefer_in_set", 1, d, tuple(unary))
    terms = [(h, (u, v)) for u, v in src.edges]
    terms.extend((choose, (v,)) for v in range(n))
    instance = VcspInstance(node_count=n, terms=tuple(terms))
    decoder = Decoder(kind="mis", offset=n, slope=1)
    return instance, decoder


@dataclass(frozen=True)
class ReductionMismatch:
    expected: object
    decoded: object
    optimum: object


def verify_reduction(src: SourceGraph, reduced: VcspInstance, decoder: Decoder, reference):
    """Compare the decoded optimum against an exact combinatorial reference."""
    if src.vertex_count > 16:
        raise InputError("verification is exact-only; graphs are capped at 16 vertices")
    from .solver import brute_force

    expected = reference(src)
    result = brute_force(reduced)
    decoded = decoder.decode(result.cost)
    if decoded != expected:
        return ReductionMismatch(expected=expected, decoded=decoded, optimum=result.cost)
    return None


def exact_max_cut(src: SourceGraph) -> int:
    best = 0
    for mask in range(1 << src.vertex_count):
        cut = sum(1 for u, v in src.edges if ((mask >> u) ^ (mask >> v)) & 1)
        if cut > best:
            best = cut
    return best


def exact_max_independent_set(src: SourceGraph) -> int:
    best = 0
    adj_masks = [0] * src.vertex_count
    for u, v in src.edges:
        adj_masks[u] |= 1 << v
        adj_masks[v] |= 1 << u
    for mask in range(1 << src.vertex_count):
        ok = True
        for v in range(src.vertex_count):
            if (mask >> v) & 1 and adj_masks[v] & mask:
                ok = False
                break
        if ok:
            size = mask.bit_count()
            if size > best:
                best = size
    return best
