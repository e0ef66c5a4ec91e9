"""
Groupoid-dim 방향 그래프 모듈

Directed graphs E = (E^0, E^1, r, s) under the paths-from-range
convention: a path mu_1 mu_2 ... satisfies s(mu_j) = r(mu_{j+1}).
"""

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Annotated, Optional

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import config
from .errors import (
    CapExceededError,
    DanglingEndpointError,
    DuplicateIdError,
    GraphFormatError,
    NotAReturnPathError,
    PreconditionError,
    UnsupportedGraphError,
    VerificationError,
)


logger = logging.getLogger(__name__)

SOURCE_DEFINITION_NOTE = "source means r^-1(v) = {}: no edge has range v, so no path can extend past v"

NonEmptyId = Annotated[str, Field(min_length=1)]


class EdgeSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: NonEmptyId
    range: NonEmptyId
    source: NonEmptyId


class GraphFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    vertices: list[NonEmptyId]
    edges: list[EdgeSpec] = []


@dataclass(frozen=True)
class Edge:
    id: str
    range: str
    source: str


@dataclass(frozen=True)
class DirectedGraph:
    """Finite directed multigraph; immutable after construction."""

    vertices: frozenset
    edges: tuple

    def __post_init__(self):
        seen = set()
        for edge in self.edges:
            if edge.id in seen:
                raise DuplicateIdError(f"duplicate edge id {edge.id!r}")
            seen.add(edge.id)
            for end in (edge.range, edge.source):
                if end not in self.vertices:
                    raise DanglingEndpointError(
                        f"edge {edge.id!r} has endpoint {end!r} outside the vertex set"
                    )

    @classmethod
    def build(cls, vertices, edges) -> "DirectedGraph":
        """edges: iterable of (id, range, source) triples."""
        vertex_list = list(vertices)
        if len(set(vertex_list)) != len(vertex_list):
            dup = next(v for v in vertex_list if vertex_list.count(v) > 1)
            raise DuplicateIdError(f"duplicate vertex id {dup!r}")
        return cls(
            vertices=frozenset(vertex_list),
            edges=tuple(Edge(e, r, s) for e, r, s in edges),
        )

    @cached_property
    def _by_id(self) -> dict:
        return {edge.id: edge for edge in self.edges}

    @cached_property
    def _in_edges(self) -> dict:
        table = {v: [] for v in self.vertices}
        for edge in self.edges:
            table[edge.range].append(edge.id)
        return {v: tuple(ids) for v, ids in table.items()}

    @cached_property
    def _out_edges(self) -> dict:
        table = {v: [] for v in self.vertices}
        for edge in self.edges:
            table[edge.source].append(edge.id)
        return {v: tuple(ids) for v, ids in table.items()}

    def has_edge(self, edge_id: str) -> bool:
        return edge_id in self._by_id

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._by_id[edge_id]
        except KeyError:
            raise PreconditionError(f"unknown edge id {edge_id!r}") from None

    def r(self, edge_id: str) -> str:
        return self.edge(edge_id).range

    def s(self, edge_id: str) -> str:
        return self.edge(edge_id).source

    def in_edges(self, vertex: str) -> tuple:
        """r^-1(v)"""
        return self._in_edges.get(vertex, ())

    def out_edges(self, vertex: str) -> tuple:
        """s^-1(v)"""
        return self._out_edges.get(vertex, ())

    def sorted_vertices(self) -> list:
        return sorted(self.vertices)

    def to_networkx(self) -> nx.DiGraph:
        """Arc r(e) -> s(e) per edge: walking arcs follows path order."""
        digraph = nx.DiGraph()
        digraph.add_nodes_from(self.sorted_vertices())
        for edge in self.edges:
            digraph.add_edge(edge.range, edge.source)
        return digraph

    def to_dict(self) -> dict:
        return {
            "vertices": self.sorted_vertices(),
            "edges": [
                {"id": e.id, "range": e.range, "source": e.source}
                for e in sorted(self.edges, key=lambda e: e.id)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    def to_dot(self, name: str = "E") -> str:
        lines = [f"digraph {json.dumps(name)} {{"]
        for v in self.sorted_vertices():
            lines.append(f"  {json.dumps(v, ensure_ascii=False)};")
        for e in sorted(self.edges, key=lambda e: e.id):
            lines.append(
                f"  {json.dumps(e.source, ensure_ascii=False)} -> "
                f"{json.dumps(e.range, ensure_ascii=False)} "
                f"[label={json.dumps(e.id, ensure_ascii=False)}];"
            )
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ReturnPath:
    edges: tuple
    simple: bool

    @classmethod
    def of(cls, g: DirectedGraph, edges) -> "ReturnPath":
        edges = tuple(edges)
        check_return_path(g, edges)
        ranges = [g.r(e) for e in edges]
        return cls(edges=edges, simple=len(set(ranges)) == len(ranges))

    def __len__(self) -> int:
        return len(self.edges)

    def vertex_set(self, g: DirectedGraph) -> frozenset:
        return frozenset(g.r(e) for e in self.edges)

    def rotations(self) -> list:
        n = len(self.edges)
        return [self.edges[i:] + self.edges[:i] for i in range(n)]


@dataclass(frozen=True)
class Classification:
    is_row_finite: bool
    source_vertices: frozenset
    has_cycles: bool
    stably_finite: bool
    every_cycle_has_exit: bool
    condition_K: bool
    cycle_classes: tuple = field(default=())  # (ReturnPath, frozenset of vertices)
    source_definition: str = SOURCE_DEFINITION_NOTE

    @property
    def is_af(self) -> bool:
        return not self.has_cycles

    def to_dict(self) -> dict:
        return {
            "is_row_finite": self.is_row_finite,
            "source_vertices": sorted(self.source_vertices),
            "has_cycles": self.has_cycles,
            "stably_finite": self.stably_finite,
            "every_cycle_has_exit": self.every_cycle_has_exit,
            "condition_K": self.condition_K,
            "cycle_classes": [
                {"representative": list(rep.edges), "vertices": sorted(verts)}
                for rep, verts in self.cycle_classes
            ],
            "source_definition": self.source_definition,
        }


def _json_location(text: str, pos: int) -> str:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return f"{line}:{col}"


def _field_location(loc: tuple) -> str:
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out += f".{part}" if out else str(part)
    return out or "<root>"


def validate_document(model: type[BaseModel], text: str, error_cls: type = GraphFormatError):
    """json + pydantic validation; errors carry line:col or the field path."""

    def fail(message: str, location: str):
        if issubclass(error_cls, GraphFormatError):
            return error_cls(message, location=location)
        return error_cls(f"{location}: {message}", location=location)

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise fail(e.msg, _json_location(text, e.pos)) from None
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        raise fail(first["msg"], _field_location(first["loc"])) from None


def load_graph(text: str) -> DirectedGraph:
    """Parse the graph JSON format and return a validated DirectedGraph."""
    spec = validate_document(GraphFile, text)

    for i, v in enumerate(spec.vertices):
        if v in spec.vertices[:i]:
            raise DuplicateIdError(f"duplicate vertex id {v!r}", location=f"vertices[{i}]")
    vertices = frozenset(spec.vertices)
    seen = set()
    for i, e in enumerate(spec.edges):
        if e.id in seen:
            raise DuplicateIdError(f"duplicate edge id {e.id!r}", location=f"edges[{i}].id")
        seen.add(e.id)
        for name in ("range", "source"):
            end = getattr(e, name)
            if end not in vertices:
                raise DanglingEndpointError(
                    f"vertex {end!r} is not declared", location=f"edges[{i}].{name}"
                )

    return DirectedGraph.build(spec.vertices, [(e.id, e.range, e.source) for e in spec.edges])


def check_return_path(g: DirectedGraph, edges: tuple) -> None:
    if not edges:
        raise NotAReturnPathError("a return path has nonzero length")
    for e in edges:
        if not g.has_edge(e):
            raise NotAReturnPathError(f"edge {e!r} is not in the graph")
    for a, b in zip(edges, edges[1:]):
        if g.s(a) != g.r(b):
            raise NotAReturnPathError(f"s({a}) != r({b})")
    if g.s(edges[-1]) != g.r(edges[0]):
        raise NotAReturnPathError("path does not close: s(last) != r(first)")


def sources(g: DirectedGraph) -> frozenset:
    """Vertices with r^-1(v) empty."""
    return frozenset(v for v in g.vertices if not g.in_edges(v))


def cycle_vertices(g: DirectedGraph) -> frozenset:
    """Vertices on some return path: SCCs that contain an internal edge."""
    digraph = g.to_networkx()
    found = set()
    for component in nx.strongly_connected_components(digraph):
        if len(component) > 1:
            found |= component
        else:
            (v,) = component
            if digraph.has_edge(v, v):
                found.add(v)
    return frozenset(found)


def _canonical_rotation(edges: tuple) -> tuple:
    start = min(range(len(edges)), key=lambda i: edges[i])
    return edges[start:] + edges[:start]


def enumerate_simple_cycles(g: DirectedGraph, cap: Optional[int] = None) -> list:
    """
    All simple return paths, one rotation per cycle.

    Vertex cycles come from Johnson's algorithm on each nontrivial SCC;
    parallel edges are expanded into distinct edge sequences.
    """
    cap = config.resolve_cap(config.DEFAULT_CYCLE_CAP, cap)
    if cap < 1:
        raise PreconditionError("cap must be at least 1")

    digraph = g.to_networkx()
    between = {}
    for edge in g.edges:
        between.setdefault((edge.range, edge.source), []).append(edge.id)

    found = []
    for component in nx.strongly_connected_components(digraph):
        sub = digraph.subgraph(component)
        if sub.number_of_edges() == 0:
            continue
        for vertex_cycle in nx.simple_cycles(sub):
            n = len(vertex_cycle)
            choices = [
                sorted(between[(vertex_cycle[i], vertex_cycle[(i + 1) % n])])
                for i in range(n)
            ]
            for edges in product(*choices):
                found.append(_canonical_rotation(tuple(edges)))
                if len(found) > cap:
                    raise CapExceededError(
                        f"more than {cap} simple cycles; graph too cyclic to enumerate",
                        cap=cap,
                    )

    found.sort(key=lambda c: (len(c), c))
    return [ReturnPath(edges=c, simple=True) for c in found]


def has_entrance(g: DirectedGraph, c: ReturnPath) -> bool:
    check_return_path(g, c.edges)
    return any(len(g.in_edges(g.r(e))) > 1 for e in c.edges)


def has_exit(g: DirectedGraph, c: ReturnPath) -> bool:
    check_return_path(g, c.edges)
    return any(len(g.out_edges(g.s(e))) > 1 for e in c.edges)


def stably_finite_fast(g: DirectedGraph) -> bool:
    """No return path has an entrance iff every cycle vertex has in-degree 1."""
    return all(len(g.in_edges(v)) == 1 for v in cycle_vertices(g))


def classify(g: DirectedGraph, cap: Optional[int] = None) -> Classification:
    fast = stably_finite_fast(g)
    try:
        cycles = enumerate_simple_cycles(g, cap)
    except CapExceededError as e:
        raise CapExceededError(
            f"{e.message} (fast check: stably_finite={fast})",
            cap=e.cap,
            stably_finite_fast=fast,
        ) from None

    entrances = [has_entrance(g, c) for c in cycles]
    exhaustive = not any(entrances)
    if fast != exhaustive:
        raise VerificationError(
            "stably-finite checks disagree",
            witness=next((c.edges for c, hit in zip(cycles, entrances) if hit), None),
            fast=fast,
            exhaustive=exhaustive,
        )

    classes = {}
    for c in cycles:
        classes.setdefault(c.vertex_set(g), c)
    cycle_classes = tuple(
        (rep, verts) for verts, rep in sorted(classes.items(), key=lambda kv: kv[1].edges)
    )

    result = Classification(
        is_row_finite=True,
        source_vertices=sources(g),
        has_cycles=bool(cycles),
        stably_finite=fast,
        every_cycle_has_exit=all(has_exit(g, c) for c in cycles),
        condition_K=all(entrances),
        cycle_classes=cycle_classes,
    )
    logger.debug(
        "classified graph: %d vertices, %d cycles, stably_finite=%s",
        len(g.vertices), len(cycles), result.stably_finite,
    )
    return result


def cycle_representatives(g: DirectedGraph, cap: Optional[int] = None) -> list:
    """
    One representative per cycle class, rotated so an exit leaves its
    range vertex; ties go to the lexicographically smallest first edge.
    """
    if not stably_finite_fast(g):
        witness = next(v for v in sorted(cycle_vertices(g)) if len(g.in_edges(v)) > 1)
        raise UnsupportedGraphError("a return path has an entrance", witness=witness)

    representatives = []
    for cycle in enumerate_simple_cycles(g, cap):
        admissible = [
            rot for rot in cycle.rotations()
            if len(g.out_edges(g.r(rot[0]))) > 1
        ]
        if not admissible:
            raise PreconditionError("a return path has no exit", witness=cycle.edges)
        best = min(admissible, key=lambda rot: rot[0])
        representatives.append(ReturnPath(edges=best, simple=True))

    representatives.sort(key=lambda c: c.edges[0])
    return representatives


def enumerate_finite_paths(g: DirectedGraph, max_length: int) -> list:
    """All finite paths up to max_length as (edges, base_vertex) pairs."""
    paths = [((), v) for v in g.sorted_vertices()]
    frontier = [(e.id,) for e in sorted(g.edges, key=lambda e: e.id)]
    length = 1
    while frontier and length <= max_length:
        paths.extend((p, g.r(p[0])) for p in frontier)
        if length == max_length:
            break
        frontier = [
            p + (e,) for p in frontier for e in sorted(g.in_edges(g.s(p[-1])))
        ]
        length += 1
    return paths
