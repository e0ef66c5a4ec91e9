"""
Groupoid-dim unfurl 모듈

Builds the acyclic graph F from an entrance-free graph E: vertices off
the cycles are copied, every cycle representative alpha becomes a ray
w'[alpha]/0 <- w'[alpha]/1 <- ... of edges alpha'/i.  Infinite paths of E
map to aperiodic paths of F, and (x, k, y) maps to (Psi(x), l, Psi(y))
with the isotropy lag forgotten.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import config
from .errors import (
    DepthExceededError,
    InvalidPathError,
    NonComposableError,
    NotShiftEquivalentError,
    PreconditionError,
    VerificationError,
)
from .graph_core import (
    DirectedGraph,
    cycle_representatives,
    cycle_vertices,
    enumerate_finite_paths,
    enumerate_simple_cycles,
)
from .groupoid import (
    BasicBisection,
    GroupoidElement,
    IsotropyGroup,
    composable_pairs,
    compose,
    element_universe,
    format_element,
)
from .paths import (
    EPPath,
    FinitePath,
    canonicalize,
    collect_infinite_paths,
    format_path,
    same_graph,
    shift_lags,
)


logger = logging.getLogger(__name__)


def vertex_name(v: str) -> str:
    return f"{v}'"


def edge_name(e: str) -> str:
    return f"{e}'"


def tail_vertex_name(alpha: str, i: int) -> str:
    return f"w'[{alpha}]/{i}"


def tail_edge_name(alpha: str, i: int) -> str:
    return f"{alpha}'/{i}"


@dataclass(frozen=True, eq=False)
class UnfurledGraph:
    base: DirectedGraph
    materialized: DirectedGraph
    representatives: tuple          # ReturnPath per cycle class, alpha id = first edge
    T: int
    U0: frozenset
    V0_map: dict                    # v -> v'
    edge_map: dict                  # e -> e' for r(e) in V0
    cycle_edge_position: dict       # cycle edge -> (alpha id, index in representative)
    cycle_vertex_position: dict     # cycle vertex -> (alpha id, i) with vertex = w_{alpha,i}
    rep_by_id: dict = field(default_factory=dict)

    def tail_vertex(self, alpha: str, i: int) -> str:
        return tail_vertex_name(alpha, i)

    def tail_edge(self, alpha: str, i: int) -> str:
        return tail_edge_name(alpha, i)

    def vertex_image(self, v: str) -> str:
        if v in self.V0_map:
            return self.V0_map[v]
        alpha, i = self.cycle_vertex_position[v]
        return tail_vertex_name(alpha, i)

    def extended(self, depth: int) -> "UnfurledGraph":
        if depth <= self.T:
            return self
        logger.debug("extending unfurled tails from depth %d to %d", self.T, depth)
        return unfurl(self.base, depth)

    def to_json(self) -> str:
        return self.materialized.to_json()

    def to_dot(self) -> str:
        return self.materialized.to_dot(name="F")


@dataclass(frozen=True)
class UnfurledInfinitePath:
    """prefix · alpha'/j alpha'/(j+1) …; the tail begins at 1-based position tail_position."""

    prefix: tuple
    tail_cycle: str
    tail_start_subscript: int
    tail_position: int

    def symbol(self, i: int) -> str:
        """Edge at 0-based position i."""
        if i < len(self.prefix):
            return self.prefix[i]
        return tail_edge_name(self.tail_cycle, self.tail_start_subscript + i - len(self.prefix))

    def unroll(self, n: int) -> tuple:
        return tuple(self.symbol(i) for i in range(n))

    def drop(self, n: int) -> "UnfurledInfinitePath":
        if n <= len(self.prefix):
            rest = self.prefix[n:]
            return UnfurledInfinitePath(rest, self.tail_cycle, self.tail_start_subscript, len(rest) + 1)
        j = self.tail_start_subscript + n - len(self.prefix)
        return UnfurledInfinitePath((), self.tail_cycle, j, 1)

    def range_in(self, f: UnfurledGraph) -> str:
        if self.prefix:
            return f.materialized.r(self.prefix[0])
        return tail_vertex_name(self.tail_cycle, self.tail_start_subscript)

    def isotropy(self) -> IsotropyGroup:
        return IsotropyGroup(kind="trivial", generator=0)

    def __str__(self) -> str:
        head = ".".join(self.prefix)
        return f"{head}|{self.tail_cycle}'/{self.tail_start_subscript}.."


@dataclass(frozen=True)
class QuotientElement:
    """(X, l, Y) in G_F|_U; l is the unique lag since F has no return paths."""

    X: UnfurledInfinitePath
    l: int
    Y: UnfurledInfinitePath

    @classmethod
    def unit(cls, X: UnfurledInfinitePath) -> "QuotientElement":
        return cls(X, 0, X)

    @property
    def is_unit(self) -> bool:
        return self.l == 0 and self.X == self.Y

    def compose(self, other: "QuotientElement") -> "QuotientElement":
        if self.Y != other.X:
            raise NonComposableError("quotient elements are not composable", witness=(str(self), str(other)))
        return QuotientElement(self.X, self.l + other.l, other.Y)

    def inverse(self) -> "QuotientElement":
        return QuotientElement(self.Y, -self.l, self.X)

    def range_unit(self) -> "QuotientElement":
        return QuotientElement.unit(self.X)

    def source_unit(self) -> "QuotientElement":
        return QuotientElement.unit(self.Y)

    def __str__(self) -> str:
        return f"({self.X} | {self.l} | {self.Y})"


def unfurl(g: DirectedGraph, T: int) -> UnfurledGraph:
    if T < 0:
        raise PreconditionError("depth must be non-negative")
    representatives = tuple(cycle_representatives(g))
    on_cycles = cycle_vertices(g)
    V0 = sorted(g.vertices - on_cycles)

    V0_map = {v: vertex_name(v) for v in V0}
    cycle_edge_position = {}
    cycle_vertex_position = {}
    rep_by_id = {}
    vertices = list(V0_map.values())
    edges = []

    for rep in representatives:
        alpha = rep.edges[0]
        rep_by_id[alpha] = rep.edges
        for i, e in enumerate(rep.edges):
            cycle_edge_position[e] = (alpha, i)
            cycle_vertex_position[g.r(e)] = (alpha, i)
        depth = max(T, len(rep.edges))
        vertices.extend(tail_vertex_name(alpha, i) for i in range(depth + 1))
        edges.extend(
            (tail_edge_name(alpha, i), tail_vertex_name(alpha, i), tail_vertex_name(alpha, i + 1))
            for i in range(depth)
        )

    edge_map = {}
    for edge in sorted(g.edges, key=lambda e: e.id):
        if edge.range not in V0_map:
            continue
        edge_map[edge.id] = edge_name(edge.id)
        if edge.source in V0_map:
            source = V0_map[edge.source]
        else:
            alpha, i = cycle_vertex_position[edge.source]
            source = tail_vertex_name(alpha, i)
        edges.append((edge_map[edge.id], V0_map[edge.range], source))

    U0 = frozenset(V0_map.values()) | frozenset(
        tail_vertex_name(rep.edges[0], i) for rep in representatives for i in range(len(rep.edges))
    )
    materialized = DirectedGraph.build(vertices, edges)
    logger.debug(
        "unfurled graph: %d representatives, %d vertices, %d edges at depth %d",
        len(representatives), len(materialized.vertices), len(materialized.edges), T,
    )
    return UnfurledGraph(
        base=g,
        materialized=materialized,
        representatives=representatives,
        T=T,
        U0=U0,
        V0_map=V0_map,
        edge_map=edge_map,
        cycle_edge_position=cycle_edge_position,
        cycle_vertex_position=cycle_vertex_position,
        rep_by_id=rep_by_id,
    )


def _split_at_cycle(f: UnfurledGraph, edges: tuple) -> tuple:
    """Return (non-cycle part, cycle run); valid paths never leave a cycle once on it."""
    cut = next((t for t, e in enumerate(edges) if e in f.cycle_edge_position), len(edges))
    head, run = edges[:cut], edges[cut:]
    stray = [e for e in run if e not in f.cycle_edge_position]
    if stray:
        raise InvalidPathError(f"edge {stray[0]!r} follows a cycle edge", witness=edges)
    return head, run


def phi(f: UnfurledGraph, mu: FinitePath) -> FinitePath:
    """Length-preserving image of a finite path of E in F."""
    if not same_graph(mu.graph, f.base):
        raise InvalidPathError("path does not belong to the unfurled base graph")
    if not mu.edges:
        return FinitePath.vertex(f.materialized, f.vertex_image(mu.base_vertex))

    head, run = _split_at_cycle(f, mu.edges)
    image = [f.edge_map[e] for e in head]
    depth = f.T
    if run:
        alpha, start = f.cycle_edge_position[run[0]]
        rep = f.rep_by_id[alpha]
        for m, e in enumerate(run):
            if rep[(start + m) % len(rep)] != e:
                raise InvalidPathError(f"edge {e!r} leaves the cycle of {alpha!r}", witness=mu.edges)
            image.append(tail_edge_name(alpha, start + m))
        depth = max(depth, start + len(run))
    target = f.extended(depth)
    return FinitePath.of(target.materialized, image)


def psi(f: UnfurledGraph, x: EPPath) -> UnfurledInfinitePath:
    if not same_graph(x.graph, f.base):
        raise InvalidPathError("path does not belong to the unfurled base graph")
    x = canonicalize(x)
    stray = [e for e in x.prefix if e in f.cycle_edge_position]
    if stray:
        raise InvalidPathError(f"canonical prefix contains cycle edge {stray[0]!r}", witness=format_path(x))
    alpha, j = f.cycle_edge_position[x.cycle[0]]
    prefix = tuple(f.edge_map[e] for e in x.prefix)
    return UnfurledInfinitePath(prefix, alpha, j, len(prefix) + 1)


def _alignment(X: UnfurledInfinitePath, Y: UnfurledInfinitePath) -> int:
    return (Y.tail_position - Y.tail_start_subscript) - (X.tail_position - X.tail_start_subscript)


def lag(f: UnfurledGraph, x: EPPath, y: EPPath, check: bool = True) -> int:
    """The unique l with Psi(x)_i = Psi(y)_{i+l} for large i."""
    if shift_lags(x, y).empty:
        raise NotShiftEquivalentError(
            f"{format_path(x)} and {format_path(y)} are not shift equivalent"
        )
    X, Y = psi(f, x), psi(f, y)
    l = _alignment(X, Y)
    if check:
        n = len(f.rep_by_id[X.tail_cycle])
        start = max(X.tail_position, Y.tail_position - l, 1 - l)
        stop = max(X.tail_position, Y.tail_position) + 2 * n
        for i in range(start, max(stop, start + 2 * n)):
            # 1-based positions
            if X.symbol(i - 1) != Y.symbol(i + l - 1):
                raise VerificationError(
                    "alignment lag disagrees with symbol comparison",
                    witness=(format_path(x), format_path(y), l, i),
                )
    return l


def closed_form_lag(f: UnfurledGraph, x: EPPath, y: EPPath) -> Optional[int]:
    """
    |mu| + 1 - (|nu| + 1 + |beta|) for x = mu e beta_x alpha^∞, y = nu e' beta_y alpha^∞,
    with beta the cycle stretch before the representative's start, read
    off by walking x and y in E. Defined only when both paths carry an
    entry edge; agrees with the lag up to sign modulo |alpha|.
    """
    x, y = canonicalize(x), canonicalize(y)
    if not x.prefix or not y.prefix or shift_lags(x, y).empty:
        return None
    return (len(x.prefix) + _stretch_to_representative(f, x)) - (
        len(y.prefix) + _stretch_to_representative(f, y)
    )


def _stretch_to_representative(f: UnfurledGraph, x: EPPath) -> int:
    """|beta|: tail edges of x in E before it first reads the representative's first edge."""
    rep = next(r.edges for r in f.representatives if x.cycle[0] in r.edges)
    start = len(x.prefix)
    for step in range(len(rep)):
        if x.symbol(start + step) == rep[0]:
            return step
    raise InvalidPathError(f"tail of {format_path(x)} never reaches {rep[0]!r}")


def upsilon(f: UnfurledGraph, g: GroupoidElement) -> QuotientElement:
    return QuotientElement(psi(f, g.x), lag(f, g.x, g.y), psi(f, g.y))


def required_depth(g: DirectedGraph, sample_length: int = config.BISECTION_SAMPLE_LENGTH) -> int:
    representatives = cycle_representatives(g)
    if not representatives:
        return 0
    return max(len(rep.edges) for rep in representatives) + sample_length


def in_unfurled_cylinder(f: UnfurledGraph, X: UnfurledInfinitePath, xi: FinitePath) -> bool:
    if not xi.edges:
        return X.range_in(f) == xi.base_vertex
    return X.unroll(len(xi.edges)) == xi.edges


def in_unfurled_bisection(f: UnfurledGraph, q: QuotientElement, xi: FinitePath, eta: FinitePath) -> bool:
    return (
        q.l == len(eta) - len(xi)
        and in_unfurled_cylinder(f, q.X, xi)
        and in_unfurled_cylinder(f, q.Y, eta)
        and q.X.drop(len(xi)) == q.Y.drop(len(eta))
    )


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    witness: Optional[str] = None

    def to_dict(self) -> dict:
        payload = {"check": self.name, "passed": self.passed, "detail": self.detail}
        if self.witness is not None:
            payload["witness"] = self.witness
        return payload


@dataclass
class VerificationReport:
    depth: int
    required_depth: int
    path_count: int = 0
    universe_size: int = 0
    checks: list = field(default_factory=list)
    lag_table: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def raise_on_failure(self) -> None:
        failed = self.failures()
        if failed:
            first = failed[0]
            raise VerificationError(f"{first.name}: {first.detail}", witness=first.witness)

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "required_depth": self.required_depth,
            "path_count": self.path_count,
            "universe_size": self.universe_size,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "lag_table": self.lag_table,
        }


def verify_unfurl(
    g: DirectedGraph,
    T: int,
    *,
    lag_fn: Optional[Callable] = None,
    window: int = config.LAG_WINDOW,
    sample_length: int = config.BISECTION_SAMPLE_LENGTH,
    sample_pairs: int = config.BISECTION_SAMPLE_PAIRS,
    seed: int = config.DEFAULT_SEED,
    cap: Optional[int] = None,
) -> VerificationReport:
    """
    Check the quotient construction on the finite element universe.

    lag_fn(f, x, y) replaces the alignment lag; tests use it to inject faults.
    """
    needed = required_depth(g, sample_length)
    if needed > T:
        raise DepthExceededError(
            f"verification needs tail depth {needed}, got {T}", required=needed, depth=T
        )
    lag_fn = lag_fn or lag
    f = unfurl(g, T)
    report = VerificationReport(depth=T, required_depth=needed)

    # (a) F 비순환
    cycles = enumerate_simple_cycles(f.materialized, cap)
    report.checks.append(CheckResult(
        "F_acyclic",
        not cycles,
        f"{len(cycles)} return paths in the materialized unfurled graph",
        witness=".".join(cycles[0].edges) if cycles else None,
    ))

    # (b) Psi 단사
    paths = collect_infinite_paths(g, cap)
    report.path_count = len(paths)
    psi_of = {x: psi(f, x) for x in paths}
    seen = {}
    collision = None
    outside = None
    for x, X in psi_of.items():
        if X in seen and collision is None:
            collision = f"{format_path(seen[X])} and {format_path(x)}"
        seen.setdefault(X, x)
        if X.range_in(f) not in f.U0 and outside is None:
            outside = format_path(x)
    report.checks.append(CheckResult(
        "psi_injective", collision is None, f"{len(paths)} infinite paths", witness=collision
    ))
    report.checks.append(CheckResult(
        "psi_range_in_U0", outside is None, "ranges of unfurled paths lie in U0", witness=outside
    ))

    universe = element_universe(g, window, paths)
    report.universe_size = len(universe)
    lag_of = {}

    def lag_between(x: EPPath, y: EPPath) -> int:
        if (x, y) not in lag_of:
            lag_of[(x, y)] = lag_fn(f, x, y)
        return lag_of[(x, y)]

    def quotient(el: GroupoidElement) -> QuotientElement:
        return QuotientElement(psi_of[el.x], lag_between(el.x, el.y), psi_of[el.y])

    # (c) 준동형
    pairs = composable_pairs(universe)
    broken = None
    for a, b in pairs:
        direct = quotient(compose(a, b))
        if direct != quotient(a).compose(quotient(b)):
            broken = f"{format_element(a)} * {format_element(b)}"
            break
    report.checks.append(CheckResult(
        "upsilon_homomorphism", broken is None, f"{len(pairs)} composable pairs", witness=broken
    ))

    # (d) 핵 = isotropy
    by_image, by_ends = {}, {}
    for idx, el in enumerate(universe):
        by_image.setdefault(quotient(el), []).append(idx)
        by_ends.setdefault((el.x, el.y), []).append(idx)
    image_blocks = {frozenset(v) for v in by_image.values()}
    end_blocks = {frozenset(v) for v in by_ends.values()}
    mismatch = None
    if image_blocks != end_blocks:
        block = sorted(image_blocks ^ end_blocks, key=min)[0]
        mismatch = format_element(universe[min(block)])
    report.checks.append(CheckResult(
        "upsilon_kernel_is_isotropy",
        mismatch is None,
        f"{len(image_blocks)} classes over {len(universe)} elements",
        witness=mismatch,
    ))

    # (e) bisection 역상
    report.checks.append(_check_bisection_preimages(
        f, universe, quotient, sample_length, sample_pairs, seed
    ))

    # closed-form lag table; the closed form only walks E
    inconsistent = None
    for x in paths:
        for y in paths:
            if shift_lags(x, y).empty:
                continue
            aligned = lag_between(x, y)
            closed = closed_form_lag(f, x, y)
            n = x.primitive_period
            consistent = closed is None or (closed + aligned) % n == 0
            report.lag_table.append({
                "x": format_path(x),
                "y": format_path(y),
                "alignment": aligned,
                "closed_form": closed,
                "consistent": consistent,
            })
            if not consistent and inconsistent is None:
                inconsistent = f"{format_path(x)}, {format_path(y)}"
    report.checks.append(CheckResult(
        "closed_form_lag",
        inconsistent is None,
        "closed form + lag vanishes modulo the cycle length",
        witness=inconsistent,
    ))

    logger.info(
        "verify_unfurl: %d paths, %d elements, passed=%s", len(paths), len(universe), report.passed
    )
    return report


def _check_bisection_preimages(f, universe, quotient, sample_length, sample_pairs, seed) -> CheckResult:
    g = f.base
    finite = [
        FinitePath.of(g, edges, base) for edges, base in enumerate_finite_paths(g, sample_length)
    ]
    image = {p: phi(f, p) for p in finite}
    eligible = [
        (xi, eta)
        for xi in finite
        for eta in finite
        if xi.source == eta.source and image[xi].source == image[eta].source
    ]
    if len(eligible) > sample_pairs:
        rng = np.random.default_rng(seed)
        chosen = np.sort(rng.choice(len(eligible), size=sample_pairs, replace=False))
        eligible = [eligible[i] for i in chosen]

    images = [quotient(el) for el in universe]
    for xi, eta in eligible:
        b = BasicBisection.of(xi, eta)
        xi_f, eta_f = image[xi], image[eta]
        for el, q in zip(universe, images):
            if b.contains_modulo_isotropy(el) != in_unfurled_bisection(f, q, xi_f, eta_f):
                return CheckResult(
                    "bisection_preimages",
                    False,
                    f"preimage of Z({format_path(xi_f)}, {format_path(eta_f)}) differs",
                    witness=format_element(el),
                )
    return CheckResult("bisection_preimages", True, f"{len(eligible)} sampled bisections")
