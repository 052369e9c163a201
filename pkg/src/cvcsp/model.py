"""Core value types for valued constraint languages and instances.

Costs are exact: a finite cost is a Python int or Fraction (never a float),
and infinity is the distinguished singleton INF rather than a large sentinel.
All comparisons and sums over costs are therefore bit-exact, which the
classifier relies on (tractable vs NP-hard hinges on strict inequalities).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

MAX_DOMAIN_SIZE = 16
MAX_ARITY = 4


class InputError(ValueError):
    """Malformed user input: bad tables, out-of-range labels, bad scopes."""


class BudgetExceeded(RuntimeError):
    """A configured enumeration or search budget would be overrun."""


class Infinite:
    """The infinite cost.  Absorbing under addition, larger than any finite cost."""

    _instance = None
    __slots__ = ()

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __add__(self, other):
        if isinstance(other, (int, Fraction, Infinite)):
            return self
        return NotImplemented

    __radd__ = __add__

    def __lt__(self, other):
        if isinstance(other, (int, Fraction, Infinite)):
            return False
        return NotImplemented

    def __le__(self, other):
        if isinstance(other, (int, Fraction, Infinite)):
            return other is self
        return NotImplemented

    def __gt__(self, other):
        if isinstance(other, (int, Fraction, Infinite)):
            return other is not self
        return NotImplemented

    def __ge__(self, other):
        if isinstance(other, (int, Fraction, Infinite)):
            return True
        return NotImplemented

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("cvcsp-infinite-cost")

    def __repr__(self):
        return "INF"


INF = Infinite()

Cost = Union[int, Fraction, Infinite]
Assignment = tuple  # labels, one per node


def is_finite(c: Cost) -> bool:
    return c is not INF


def as_cost(value) -> Cost:
    """Normalize a table entry to canonical cost form (int when integral)."""
    if value is INF:
        return INF
    if isinstance(value, bool):
        raise InputError(f"boolean is not a cost: {value!r}")
    if isinstance(value, int):
        num = value
    elif isinstance(value, Fraction):
        num = int(value) if value.denominator == 1 else value
    else:
        raise InputError(f"cost must be int, Fraction or INF, got {type(value).__name__}")
    if num < 0:
        raise InputError(f"costs must be non-negative, got {num}")
    return num


@dataclass(frozen=True)
class CostFunction:
    """A dense cost table over D^arity, row-major (last coordinate fastest)."""

    name: str
    arity: int
    domain_size: int
    table: tuple

    def __post_init__(self):
        if self.domain_size < 2 or self.domain_size > MAX_DOMAIN_SIZE:
            raise InputError(f"domain size {self.domain_size} outside 2..{MAX_DOMAIN_SIZE}")
        if self.arity < 0 or self.arity > MAX_ARITY:
            raise InputError(f"arity {self.arity} outside 0..{MAX_ARITY}")
        expected = self.domain_size ** self.arity
        if len(self.table) != expected:
            raise InputError(
                f"{self.name}: table has {len(self.table)} entries, expected {expected}"
            )
        object.__setattr__(self, "table", tuple(as_cost(v) for v in self.table))

    def index(self, args: Sequence[int]) -> int:
        idx = 0
        for a in args:
            if not 0 <= a < self.domain_size:
                raise InputError(f"label {a} outside domain 0..{self.domain_size - 1}")
            idx = idx * self.domain_size + a
        return idx

    def value(self, args: Sequence[int]) -> Cost:
        return self.table[self.index(args)]

    def tuples(self) -> Iterable[tuple]:
        return itertools.product(range(self.domain_size), repeat=self.arity)

    def effective_domain(self) -> list:
        """All argument tuples with finite cost."""
        return [t for t, v in zip(self.tuples(), self.table) if v is not INF]

    def is_finite_valued(self) -> bool:
        return all(v is not INF for v in self.table)

    def max_finite(self) -> Cost:
        finite = [v for v in self.table if v is not INF]
        return max(finite) if finite else 0

    def sum_finite(self) -> Cost:
        return sum(v for v in self.table if v is not INF)

    def renamed(self, name: str) -> "CostFunction":
        return CostFunction(name, self.arity, self.domain_size, self.table)


@dataclass(frozen=True)
class Language:
    """A finite set of cost functions over a shared domain.

    All finite-valued unary cost functions are implicitly members
    (conservativity); listed unaries are kept but never drive classification.
    """

    domain_size: int
    functions: tuple

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        seen = set()
        for f in self.functions:
            if f.domain_size != self.domain_size:
                raise InputError(
                    f"{f.name}: domain size {f.domain_size} != language domain {self.domain_size}"
                )
            if f.name in seen:
                raise InputError(f"duplicate function name {f.name!r}")
            seen.add(f.name)

    @property
    def mode(self) -> str:
        return "finite_valued" if self.is_finite_valued() else "general_valued"

    def is_finite_valued(self) -> bool:
        return all(f.is_finite_valued() for f in self.functions)

    def get(self, name: str) -> CostFunction:
        for f in self.functions:
            if f.name == name:
                return f
        raise InputError(f"unknown function {name!r}")

    def non_unary_functions(self) -> tuple:
        return tuple(f for f in self.functions if f.arity >= 2)

    def unary_functions(self) -> tuple:
        return tuple(f for f in self.functions if f.arity == 1)


@dataclass(frozen=True)
class VcspInstance:
    """A sum of cost-function terms applied to scopes over a node set."""

    node_count: int
    terms: tuple  # of (CostFunction, scope tuple)
    unary_terms: Optional[tuple] = None  # per-node unary CostFunction or None

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple((f, tuple(scope)) for f, scope in self.terms)
        )
        for f, scope in self.terms:
            if len(scope) != f.arity:
                raise InputError(
                    f"term {f.name}: scope length {len(scope)} != arity {f.arity}"
                )
            for v in scope:
                if not 0 <= v < self.node_count:
                    raise InputError(f"term {f.name}: node {v} outside 0..{self.node_count - 1}")
        if self.unary_terms is not None:
            unaries = tuple(self.unary_terms)
            if len(unaries) != self.node_count:
                raise InputError("unary_terms must list one entry per node (None allowed)")
            for u in unaries:
                if u is not None and u.arity != 1:
                    raise InputError(f"unary term {u.name} has arity {u.arity}")
            object.__setattr__(self, "unary_terms", unaries)

    def domain_size(self) -> int:
        for f, _ in self.terms:
            return f.domain_size
        if self.unary_terms:
            for u in self.unary_terms:
                if u is not None:
                    return u.domain_size
        raise InputError("instance has no terms; domain size is undetermined")

    def all_terms(self) -> list:
        """Terms plus per-node unary terms, as (function, scope) pairs."""
        out = list(self.terms)
        if self.unary_terms:
            for node, u in enumerate(self.unary_terms):
                if u is not None:
                    out.append((u, (node,)))
        return out


def evaluate(instance: VcspInstance, x: Assignment) -> Cost:
    """Total cost of an assignment: the infinity-absorbing sum over all terms."""
    if len(x) != instance.node_count:
        raise InputError(f"assignment length {len(x)} != node count {instance.node_count}")
    total: Cost = 0
    for f, scope in instance.all_terms():
        v = f.value(tuple(x[i] for i in scope))
        if v is INF:
            return INF
        total = total + v
    return total


@dataclass(frozen=True)
class LanguageReport:
    """Report-only diagnostics for a language; never raises."""

    mode: str
    issues: tuple
    dom_summary: tuple  # (name, finite entry count, table size) per function

    @property
    def ok(self) -> bool:
        return not self.issues


def validate_language(lang: Language) -> LanguageReport:
    issues = []
    summary = []
    for f in lang.functions:
        size = f.domain_size ** f.arity
        if len(f.table) != size:
            # unreachable through the constructor; kept for raw-table callers
            issues.append(f"{f.name}: table size {len(f.table)} != {size}")
        finite = sum(1 for v in f.table if v is not INF)
        if finite == 0:
            issues.append(f"{f.name}: empty effective domain (all entries infinite)")
        summary.append((f.name, finite, size))
    return LanguageReport(mode=lang.mode, issues=tuple(issues), dom_summary=tuple(summary))


def shift_costs(f: CostFunction, delta) -> CostFunction:
    """Add an exact constant to every finite entry; infinite entries unchanged.

    Strict-inequality structure between entries is preserved, so the
    classification of any language containing the result is unchanged.
    """
    if not isinstance(delta, (int, Fraction)):
        raise InputError("shift delta must be an exact rational")
    shifted = []
    for v in f.table:
        if v is INF:
            shifted.append(INF)
            continue
        nv = v + delta
        if nv < 0:
            raise InputError(f"{f.name}: shifting {v} by {delta} gives a negative cost")
        shifted.append(nv)
    return CostFunction(f"{f.name}_shift", f.arity, f.domain_size, tuple(shifted))


def fixed_value_unary(d: int, c, domain_size: int) -> CostFunction:
    """The unary that is 0 at label d and a fixed non-zero cost c elsewhere."""
    if not 0 <= d < domain_size:
        raise InputError(f"label {d} outside domain 0..{domain_size - 1}")
    c = as_cost(c)
    if c is INF or c == 0:
        raise InputError("fixed-value cost must be finite and non-zero")
    table = tuple(0 if x == d else c for x in range(domain_size))
    return CostFunction(f"u_{d}", 1, domain_size, table)


def unary_from_table(name: str, values: Sequence, domain_size: int) -> CostFunction:
    return CostFunction(name, 1, domain_size, tuple(values))
