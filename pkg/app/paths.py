"""
Groupoid-dim 경로 모듈

Finite paths, eventually periodic infinite paths prefix·cycle^∞,
cylinder sets and shift-equivalence lag sets.
"""

import logging
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from math import lcm
from typing import Optional, Union

from . import config
from .errors import (
    CapExceededError,
    GraphMismatchError,
    InvalidPathError,
    NotAReturnPathError,
    PreconditionError,
    VerificationError,
)
from .graph_core import (
    DirectedGraph,
    check_return_path,
    enumerate_simple_cycles,
    sources,
    stably_finite_fast,
    cycle_vertices,
)


logger = logging.getLogger(__name__)

PREFIX_SEPARATOR = "."
CYCLE_MARKER = "^"
VERTEX_MARKER = "@"


def same_graph(a: DirectedGraph, b: DirectedGraph) -> bool:
    return a is b or a == b


def _require_same_graph(a: DirectedGraph, b: DirectedGraph) -> None:
    if not same_graph(a, b):
        raise GraphMismatchError("paths belong to different graphs")


@dataclass(frozen=True)
class FinitePath:
    graph: DirectedGraph = field(compare=False, repr=False)
    edges: tuple
    base_vertex: str

    @classmethod
    def of(cls, g: DirectedGraph, edges=(), base_vertex: Optional[str] = None) -> "FinitePath":
        edges = tuple(edges)
        for e in edges:
            if not g.has_edge(e):
                raise InvalidPathError(f"unknown edge {e!r}")
        for a, b in zip(edges, edges[1:]):
            if g.s(a) != g.r(b):
                raise InvalidPathError(f"s({a}) != r({b})", witness=edges)
        if edges:
            base = g.r(edges[0])
            if base_vertex is not None and base_vertex != base:
                raise InvalidPathError(f"path starts at {base!r}, not {base_vertex!r}")
        else:
            if base_vertex not in g.vertices:
                raise InvalidPathError(f"length-0 path needs a vertex, got {base_vertex!r}")
            base = base_vertex
        return cls(graph=g, edges=edges, base_vertex=base)

    @classmethod
    def vertex(cls, g: DirectedGraph, v: str) -> "FinitePath":
        return cls.of(g, (), v)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def range(self) -> str:
        return self.base_vertex

    @property
    def source(self) -> str:
        return self.graph.s(self.edges[-1]) if self.edges else self.base_vertex

    def concat(self, other: "FinitePath") -> "FinitePath":
        _require_same_graph(self.graph, other.graph)
        if self.source != other.range:
            raise InvalidPathError(f"cannot join: s = {self.source!r}, r = {other.range!r}")
        return FinitePath.of(self.graph, self.edges + other.edges, self.range)

    def is_prefix_of(self, other: "FinitePath") -> bool:
        return self.range == other.range and other.edges[: len(self.edges)] == self.edges

    def __str__(self) -> str:
        return format_path(self)


def primitive_cycle(cycle: tuple) -> tuple:
    """Shortest c with cycle == c repeated."""
    n = len(cycle)
    for p in range(1, n + 1):
        if n % p == 0 and cycle[:p] * (n // p) == cycle:
            return cycle[:p]
    return cycle


def _rotate(cycle: tuple, m: int) -> tuple:
    m %= len(cycle)
    return cycle[m:] + cycle[:m]


@dataclass(frozen=True)
class EPPath:
    """The infinite path prefix·cycle·cycle·…; both stored as edge id tuples."""

    graph: DirectedGraph = field(compare=False, repr=False)
    prefix: tuple
    cycle: tuple
    canonical: bool = field(default=False, compare=False)

    @classmethod
    def of(cls, g: DirectedGraph, prefix, cycle, canonical_form: bool = True) -> "EPPath":
        prefix, cycle = tuple(prefix), tuple(cycle)
        try:
            check_return_path(g, cycle)
        except NotAReturnPathError as e:
            raise InvalidPathError(f"tail is not a return path: {e.message}") from None
        if prefix:
            FinitePath.of(g, prefix)
        if prefix and g.s(prefix[-1]) != g.r(cycle[0]):
            raise InvalidPathError(
                f"prefix ends at {g.s(prefix[-1])!r} but the cycle starts at {g.r(cycle[0])!r}"
            )
        path = cls(graph=g, prefix=prefix, cycle=cycle)
        return canonicalize(path) if canonical_form else path

    @property
    def range(self) -> str:
        first = self.prefix[0] if self.prefix else self.cycle[0]
        return self.graph.r(first)

    @property
    def primitive_period(self) -> int:
        return len(primitive_cycle(self.cycle))

    def symbol(self, i: int) -> str:
        """Edge at 0-based position i."""
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def unroll(self, n: int) -> tuple:
        return tuple(self.symbol(i) for i in range(n))

    def drop(self, n: int) -> "EPPath":
        """The tail x_{n+1} x_{n+2} …, canonical."""
        if n <= len(self.prefix):
            path = replace(self, prefix=self.prefix[n:], canonical=False)
        else:
            m = n - len(self.prefix)
            path = replace(self, prefix=(), cycle=_rotate(self.cycle, m), canonical=False)
        return canonicalize(path)

    def head(self, n: int) -> FinitePath:
        if n == 0:
            return FinitePath.vertex(self.graph, self.range)
        return FinitePath.of(self.graph, self.unroll(n))

    def sort_key(self) -> tuple:
        return (len(self.prefix), self.prefix, self.cycle)

    def __str__(self) -> str:
        return format_path(self)


@dataclass(frozen=True)
class LagSet:
    """{offset + m*modulus : m in Z}, or nothing."""

    empty: bool
    offset: int = 0
    modulus: int = 1

    @classmethod
    def none(cls) -> "LagSet":
        return cls(empty=True)

    def __contains__(self, k: int) -> bool:
        return not self.empty and (k - self.offset) % self.modulus == 0

    def negate(self) -> "LagSet":
        if self.empty:
            return self
        return LagSet(False, (-self.offset) % self.modulus, self.modulus)

    def window(self, width: int) -> list:
        """Members offset + m*modulus with |m| <= width."""
        if self.empty:
            return []
        return [self.offset + m * self.modulus for m in range(-width, width + 1)]


class CylinderRelation(str, Enum):
    DISJOINT = "disjoint"
    SUBSET = "subset"        # Z(mu) inside Z(nu)
    SUPERSET = "superset"    # Z(nu) inside Z(mu)
    EQUAL = "equal"


def canonicalize(p: EPPath) -> EPPath:
    if p.canonical:
        return p
    cycle = primitive_cycle(p.cycle)
    prefix = p.prefix
    while prefix and prefix[-1] == cycle[-1]:
        prefix = prefix[:-1]
        cycle = (cycle[-1],) + cycle[:-1]
    return EPPath(graph=p.graph, prefix=prefix, cycle=cycle, canonical=True)


def comparison_length(p: EPPath, q: EPPath) -> int:
    return len(p.prefix) + len(q.prefix) + 2 * lcm(len(p.cycle), len(q.cycle))


def ep_equal(p: EPPath, q: EPPath, cross_check: bool = False) -> bool:
    _require_same_graph(p.graph, q.graph)
    a, b = canonicalize(p), canonicalize(q)
    equal = a.prefix == b.prefix and a.cycle == b.cycle
    if cross_check:
        n = comparison_length(p, q)
        by_symbols = p.unroll(n) == q.unroll(n)
        if by_symbols != equal:
            raise VerificationError(
                "canonical equality disagrees with symbol comparison",
                witness=(str(p), str(q)),
            )
    return equal


def shift_lags(x: EPPath, y: EPPath) -> LagSet:
    """
    All k with x_i = y_{i+k} for large i.

    With x = p·c^∞ and y = q·d^∞ canonical, the tails agree up to shift
    iff d is a rotation c[r:] + c[:r]; then k = |q| - |p| - r mod |c|.
    """
    _require_same_graph(x.graph, y.graph)
    x, y = canonicalize(x), canonicalize(y)
    c, d = x.cycle, y.cycle
    if len(c) != len(d):
        return LagSet.none()
    n = len(c)
    for r in range(n):
        if _rotate(c, r) == d:
            return LagSet(False, (len(y.prefix) - len(x.prefix) - r) % n, n)
    return LagSet.none()


def shift_class(g: DirectedGraph, cycle: tuple, cap: int) -> set:
    """Every canonical EPPath whose tail is a rotation of cycle."""
    start = [canonicalize(EPPath(g, (), _rotate(cycle, m))) for m in range(len(cycle))]
    seen = set(start)
    queue = deque(start)
    while queue:
        current = queue.popleft()
        for e in sorted(g.out_edges(current.range)):
            extended = canonicalize(EPPath(g, (e,) + current.prefix, current.cycle))
            if extended in seen:
                continue
            seen.add(extended)
            if len(seen) > cap:
                raise CapExceededError(
                    f"more than {cap} paths shift-equivalent to {format_path(start[0])}",
                    cap=cap,
                )
            queue.append(extended)
    return seen


def collect_infinite_paths(g: DirectedGraph, cap: Optional[int] = None) -> list:
    """E^∞ for a graph whose cycles have no entrance; sources are not checked."""
    cap = config.resolve_cap(config.DEFAULT_ORBIT_CAP, cap)
    if not stably_finite_fast(g):
        witness = next(v for v in sorted(cycle_vertices(g)) if len(g.in_edges(v)) > 1)
        raise PreconditionError(
            "a return path has an entrance; the infinite path space is uncountable",
            witness=witness,
        )
    found = set()
    for cycle in enumerate_simple_cycles(g):
        found |= shift_class(g, cycle.edges, cap)
    return sorted(found, key=EPPath.sort_key)


def enumerate_infinite_paths(g: DirectedGraph, cap: Optional[int] = None) -> list:
    present = sources(g)
    if present:
        raise PreconditionError(
            "graph has sources; infinite paths do not cover the unit space",
            witness=sorted(present),
        )
    paths = collect_infinite_paths(g, cap)
    logger.debug("enumerated %d infinite paths", len(paths))
    return paths


def in_cylinder(x: EPPath, mu: FinitePath) -> bool:
    _require_same_graph(x.graph, mu.graph)
    if not mu.edges:
        return x.range == mu.base_vertex
    return x.unroll(len(mu.edges)) == mu.edges


def cylinder_relation(mu: FinitePath, nu: FinitePath) -> CylinderRelation:
    _require_same_graph(mu.graph, nu.graph)
    if mu.range == nu.range and mu.edges == nu.edges:
        return CylinderRelation.EQUAL
    if nu.is_prefix_of(mu):
        return CylinderRelation.SUBSET
    if mu.is_prefix_of(nu):
        return CylinderRelation.SUPERSET
    return CylinderRelation.DISJOINT


# --- literals ---

def _split_ids(text: str) -> tuple:
    text = text.strip()
    return tuple(part.strip() for part in text.split(PREFIX_SEPARATOR)) if text else ()


def parse_path(g: DirectedGraph, text: str) -> Union[FinitePath, EPPath]:
    """
    "e.a^a" is e·a·a^∞, "^a0.a1" is (a0 a1)^∞, "e.a" is a finite
    path and "@v" the length-0 path at v.
    """
    text = text.strip()
    if text.startswith(VERTEX_MARKER):
        return FinitePath.vertex(g, text[len(VERTEX_MARKER):])
    if CYCLE_MARKER in text:
        head, _, tail = text.partition(CYCLE_MARKER)
        cycle = _split_ids(tail)
        if not cycle:
            raise InvalidPathError(f"empty cycle in {text!r}")
        return EPPath.of(g, _split_ids(head), cycle)
    edges = _split_ids(text)
    if not edges:
        raise InvalidPathError("empty path literal; write @v for a vertex")
    return FinitePath.of(g, edges)


def parse_infinite_path(g: DirectedGraph, text: str) -> EPPath:
    path = parse_path(g, text)
    if not isinstance(path, EPPath):
        raise InvalidPathError(f"{text!r} is not an infinite path literal")
    return path


def format_path(p: Union[FinitePath, EPPath]) -> str:
    if isinstance(p, EPPath):
        return PREFIX_SEPARATOR.join(p.prefix) + CYCLE_MARKER + PREFIX_SEPARATOR.join(p.cycle)
    if not p.edges:
        return VERTEX_MARKER + p.base_vertex
    return PREFIX_SEPARATOR.join(p.edges)
