"""
Groupoid-dim 그래프 groupoid 모듈

Exact arithmetic on G_E = {(x, k, y) : x ~_k y}.
"""

import logging
import re
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional

from . import config
from .errors import (
    InvalidPathError,
    NonComposableError,
    NotABisectionError,
    NotShiftEquivalentError,
    PreconditionError,
)
from .graph_core import DirectedGraph
from .paths import (
    EPPath,
    FinitePath,
    LagSet,
    canonicalize,
    enumerate_infinite_paths,
    ep_equal,
    format_path,
    in_cylinder,
    parse_infinite_path,
    same_graph,
    shift_class,
    shift_lags,
)


logger = logging.getLogger(__name__)

ELEMENT_PATTERN = re.compile(r"^\(\s*(?P<x>[^|]+?)\s*\|\s*(?P<k>[+-]?\d+)\s*\|\s*(?P<y>[^|]+?)\s*\)$")


@dataclass(frozen=True)
class GroupoidElement:
    x: EPPath
    k: int
    y: EPPath

    @classmethod
    def of(cls, x: EPPath, k: int, y: EPPath) -> "GroupoidElement":
        x, y = canonicalize(x), canonicalize(y)
        lags = shift_lags(x, y)
        if k not in lags:
            raise NotShiftEquivalentError(
                f"{format_path(x)} and {format_path(y)} are not shift equivalent with lag {k}",
                lags=_describe_lags(lags),
            )
        return cls(x=x, k=int(k), y=y)

    @classmethod
    def unit(cls, x: EPPath) -> "GroupoidElement":
        x = canonicalize(x)
        return cls(x=x, k=0, y=x)

    @property
    def range(self) -> EPPath:
        return self.x

    @property
    def source(self) -> EPPath:
        return self.y

    @property
    def is_unit(self) -> bool:
        return self.k == 0 and self.x == self.y

    def sort_key(self) -> tuple:
        return (self.x.sort_key(), self.k, self.y.sort_key())

    def __str__(self) -> str:
        return format_element(self)


@dataclass(frozen=True)
class IsotropyGroup:
    """kind "Z" with a positive generator; "trivial" carries generator 0."""

    kind: str
    generator: int


@dataclass(frozen=True)
class BasicBisection:
    """Z(mu, nu): elements (mu·z, |nu| - |mu|, nu·z)."""

    mu: FinitePath
    nu: FinitePath

    @classmethod
    def of(cls, mu: FinitePath, nu: FinitePath) -> "BasicBisection":
        if not same_graph(mu.graph, nu.graph):
            raise PreconditionError("bisection paths belong to different graphs")
        if mu.source != nu.source:
            raise NotABisectionError(
                f"s(mu) = {mu.source!r} differs from s(nu) = {nu.source!r}"
            )
        return cls(mu=mu, nu=nu)

    @property
    def lag(self) -> int:
        return len(self.nu) - len(self.mu)

    def _tails_match(self, g: GroupoidElement) -> bool:
        return (
            in_cylinder(g.x, self.mu)
            and in_cylinder(g.y, self.nu)
            and g.x.drop(len(self.mu)) == g.y.drop(len(self.nu))
        )

    def contains(self, g: GroupoidElement) -> bool:
        return g.k == self.lag and self._tails_match(g)

    def contains_modulo_isotropy(self, g: GroupoidElement) -> bool:
        """g in Z(mu, nu)·Iso: matching tails, any lag (lags differ by isotropy)."""
        return self._tails_match(g)

    def inverse(self) -> "BasicBisection":
        return BasicBisection(mu=self.nu, nu=self.mu)


def _describe_lags(lags: LagSet) -> str:
    if lags.empty:
        return "none"
    return f"{lags.offset} mod {lags.modulus}"


def compose(g: GroupoidElement, h: GroupoidElement) -> GroupoidElement:
    if not ep_equal(g.y, h.x):
        raise NonComposableError(
            f"s(g) = {format_path(g.y)} but r(h) = {format_path(h.x)}",
            witness=(str(g), str(h)),
        )
    return GroupoidElement.of(g.x, g.k + h.k, h.y)


def inverse(g: GroupoidElement) -> GroupoidElement:
    return GroupoidElement(x=g.y, k=-g.k, y=g.x)


def is_isotropy(g: GroupoidElement) -> bool:
    return ep_equal(g.x, g.y)


def isotropy_group(x: EPPath) -> IsotropyGroup:
    return IsotropyGroup(kind="Z", generator=canonicalize(x).primitive_period)


def orbit(x: EPPath, cap: Optional[int] = None) -> frozenset:
    cap = config.resolve_cap(config.DEFAULT_ORBIT_CAP, cap)
    x = canonicalize(x)
    return frozenset(shift_class(x.graph, x.cycle, cap))


def strata(g: DirectedGraph, cap: Optional[int] = None) -> dict:
    """n -> X_{=n}, the infinite paths whose orbit has n points."""
    paths = enumerate_infinite_paths(g, cap)
    remaining = set(paths)
    layers = defaultdict(set)
    for x in paths:
        if x not in remaining:
            continue
        members = orbit(x, cap)
        layers[len(members)] |= members
        remaining -= members
    return {n: frozenset(layers[n]) for n in sorted(layers)}


def quotient_equal(g: GroupoidElement, h: GroupoidElement) -> bool:
    return ep_equal(g.x, h.x) and ep_equal(g.y, h.y)


def bisection_members(b: BasicBisection, universe) -> list:
    return [g for g in universe if b.contains(g)]


def element_universe(
    g: DirectedGraph,
    window: int = config.LAG_WINDOW,
    paths: Optional[list] = None,
) -> list:
    """
    {(x, k, y) : x ~ y, k = offset + m*modulus, |m| <= window}.

    The groupoid is infinite; exhaustive checks quantify over this
    finite fragment.
    """
    if paths is None:
        paths = enumerate_infinite_paths(g)
    universe = []
    for x in paths:
        for y in paths:
            for k in shift_lags(x, y).window(window):
                universe.append(GroupoidElement(x=x, k=k, y=y))
    logger.debug("element universe: %d paths, %d elements", len(paths), len(universe))
    return universe


def composable_pairs(universe) -> list:
    by_range = defaultdict(list)
    for h in universe:
        by_range[h.x].append(h)
    return [(g, h) for g in universe for h in by_range.get(g.y, ())]


def open_isotropy_witness(g: GroupoidElement) -> BasicBisection:
    """
    A basic bisection around a nontrivial isotropy element containing
    only isotropy: mu is the prefix of x, nu is mu followed by k tail edges.
    """
    if not is_isotropy(g) or g.k == 0:
        raise PreconditionError("expected an isotropy element with nonzero lag", witness=str(g))
    if g.k < 0:
        return open_isotropy_witness(inverse(g)).inverse()
    x = g.x
    mu = x.head(len(x.prefix))
    nu = x.head(len(x.prefix) + g.k)
    return BasicBisection.of(mu, nu)


# --- literals ---

def parse_element(graph: DirectedGraph, text: str) -> GroupoidElement:
    """Parse "(x | k | y)" with infinite path literals for x and y."""
    match = ELEMENT_PATTERN.match(text.strip())
    if not match:
        raise InvalidPathError(f"malformed element literal {text!r}; expected (x | k | y)")
    x = parse_infinite_path(graph, match["x"])
    y = parse_infinite_path(graph, match["y"])
    return GroupoidElement.of(x, int(match["k"]), y)


def format_element(g: GroupoidElement) -> str:
    return f"({format_path(g.x)} | {g.k} | {format_path(g.y)})"
