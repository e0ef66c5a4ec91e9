"""
Groupoid-dim dad 인증서 및 bound 평가 모듈

Dynamic asymptotic dimension certificates on finite groupoid fragments
("precompact" means the generated subgroupoid closes up within a cap),
the nuclear-dimension bound formulas, and the certified pipeline for
graph algebras.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from . import config
from .chain import CITED, UNSUPPORTED, VERIFIED, CertificateChain
from .errors import (
    CapExceededError,
    MissingInputError,
    NegativeInputError,
    PreconditionError,
    VerificationError,
)
from .finite_groupoid import FiniteGroupoid
from .graph_core import DirectedGraph, classify, enumerate_finite_paths
from .groupoid import (
    GroupoidElement,
    compose as compose_elements,
    element_universe,
    format_element,
    inverse as inverse_element,
    is_isotropy,
    isotropy_group,
    open_isotropy_witness,
)
from .paths import FinitePath, enumerate_infinite_paths, format_path, in_cylinder
from .unfurl import QuotientElement, required_depth, unfurl, upsilon, verify_unfurl


logger = logging.getLogger(__name__)


# ============================================================================
# Fragment
# ============================================================================

@dataclass(frozen=True, eq=False)
class GroupoidFragment:
    """
    Finite, inverse-closed, unit-containing subset W of a groupoid given
    by oracles; compose returns None for non-composable pairs.
    """

    elements: frozenset
    compose: Callable[[Any, Any], Optional[Any]]
    inverse: Callable[[Any], Any]
    range: Callable[[Any], Any]
    source: Callable[[Any], Any]

    @classmethod
    def generate(cls, seeds, compose, inverse, range, source) -> "GroupoidFragment":
        """Smallest fragment containing seeds: adds inverses and the units they touch."""
        members = set()
        for g in seeds:
            members.update((g, inverse(g), range(g), source(g)))
        return cls(frozenset(members), compose, inverse, range, source)

    def __post_init__(self):
        for g in self.elements:
            if self.inverse(g) not in self.elements:
                raise PreconditionError("fragment is not closed under inverse", witness=str(g))
            if self.range(g) not in self.elements or self.source(g) not in self.elements:
                raise PreconditionError("fragment misses the range or source of a member", witness=str(g))

    @property
    def units(self) -> frozenset:
        return frozenset(self.range(g) for g in self.elements) | frozenset(
            self.source(g) for g in self.elements
        )

    def __len__(self) -> int:
        return len(self.elements)


def _graph_compose(a: GroupoidElement, b: GroupoidElement):
    return compose_elements(a, b) if a.y == b.x else None


def graph_fragment(elements) -> GroupoidFragment:
    """Fragment of G_E."""
    return GroupoidFragment.generate(
        elements,
        _graph_compose,
        inverse_element,
        lambda g: GroupoidElement.unit(g.x),
        lambda g: GroupoidElement.unit(g.y),
    )


def quotient_fragment(elements) -> GroupoidFragment:
    """Fragment of G_F|_U built from quotient elements."""
    return GroupoidFragment.generate(
        elements,
        lambda a, b: a.compose(b) if a.Y == b.X else None,
        QuotientElement.inverse,
        QuotientElement.range_unit,
        QuotientElement.source_unit,
    )


def finite_fragment(G: FiniteGroupoid, elements=None) -> GroupoidFragment:
    seeds = range(G.size) if elements is None else elements
    return GroupoidFragment.generate(
        [int(g) for g in seeds],
        G.multiply,
        lambda g: int(G.inverse[g]),
        lambda g: int(G.r[g]),
        lambda g: int(G.s[g]),
    )


# ============================================================================
# 생성 부분 groupoid / 인증서
# ============================================================================

def generated_subgroupoid(frag: GroupoidFragment, U, cap: Optional[int] = None) -> frozenset:
    """Closure of {g in W : r(g), s(g) in U} under composition and inverse."""
    cap = config.resolve_cap(config.DEFAULT_CLOSURE_CAP, cap)
    if cap < len(frag):
        raise PreconditionError(f"cap {cap} is smaller than the fragment ({len(frag)})")
    U = set(U)
    seeds = sorted(
        (g for g in frag.elements if frag.range(g) in U and frag.source(g) in U), key=str
    )
    closure = set()
    by_range, by_source = {}, {}
    queue = []

    def add(g):
        if g in closure:
            return
        closure.add(g)
        if len(closure) > cap:
            raise CapExceededError(
                f"generated subgroupoid exceeds {cap} elements; not verifiably precompact",
                cap=cap,
            )
        by_range.setdefault(frag.range(g), []).append(g)
        by_source.setdefault(frag.source(g), []).append(g)
        queue.append(g)

    for g in seeds:
        add(g)
    while queue:
        g = queue.pop()
        add(frag.inverse(g))
        for h in list(by_source.get(frag.range(g), ())):
            add(frag.compose(h, g))
        for h in list(by_range.get(frag.source(g), ())):
            add(frag.compose(g, h))
    return frozenset(closure)


@dataclass(frozen=True)
class DadCertificate:
    fragment: GroupoidFragment
    d: int
    covers: tuple        # U_0..U_d
    closures: tuple      # H_0..H_d

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "covers": [sorted(str(u) for u in U) for U in self.covers],
            "closure_sizes": [len(H) for H in self.closures],
        }


@dataclass(frozen=True)
class CertificateVerdict:
    valid: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.valid


def build_certificate(frag: GroupoidFragment, covers, cap: Optional[int] = None) -> DadCertificate:
    covers = tuple(frozenset(U) for U in covers)
    closures = tuple(generated_subgroupoid(frag, U, cap) for U in covers)
    return DadCertificate(frag, len(covers) - 1, covers, closures)


def verify_dad_certificate(c: DadCertificate, cap: Optional[int] = None) -> CertificateVerdict:
    if len(c.covers) != c.d + 1:
        return CertificateVerdict(False, f"expected {c.d + 1} cover sets, got {len(c.covers)}")
    covered = frozenset().union(*c.covers)
    missing = c.fragment.units - covered
    if missing:
        return CertificateVerdict(False, f"cover misses unit {sorted(map(str, missing))[0]}")
    for i, U in enumerate(c.covers):
        try:
            closure = generated_subgroupoid(c.fragment, U, cap)
        except CapExceededError as e:
            return CertificateVerdict(False, f"closure H_{i} is not finite within cap {e.cap}")
        if i < len(c.closures) and closure != c.closures[i]:
            return CertificateVerdict(False, f"recorded closure H_{i} differs from the recomputed one")
    return CertificateVerdict(True)


@dataclass(frozen=True)
class DadSearchResult:
    d: Optional[int]
    certificate: Optional[DadCertificate]
    strategy: str
    inconclusive: bool = False   # some closure hit the cap

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "strategy": self.strategy,
            "inconclusive": self.inconclusive,
            "certificate": self.certificate.to_dict() if self.certificate else None,
        }


def _set_partitions(items: list, max_blocks: int):
    """Restricted growth strings: each item joins an open block or opens a new one."""
    assignment = [0] * len(items)

    def walk(i: int, used: int):
        if i == len(items):
            blocks = [[] for _ in range(used)]
            for item, b in zip(items, assignment):
                blocks[b].append(item)
            yield [frozenset(b) for b in blocks]
            return
        for b in range(min(used + 1, max_blocks)):
            assignment[i] = b
            yield from walk(i + 1, max(used, b + 1))

    yield from walk(0, 0)


def search_dad(
    frag: GroupoidFragment,
    d_max: int,
    cap: Optional[int] = None,
    seed: int = config.DEFAULT_SEED,
) -> DadSearchResult:
    """
    Least d <= d_max with a certificate among unit partitions; None means
    not found, never a proof of absence.  Covers may be taken to be
    partitions since shrinking a cover set never enlarges its closure.
    """
    units = sorted(frag.units, key=str)
    memo = {}
    hit_cap = False

    def finite(block: frozenset) -> bool:
        nonlocal hit_cap
        if block not in memo:
            try:
                generated_subgroupoid(frag, block, cap)
                memo[block] = True
            except CapExceededError:
                memo[block] = False
                hit_cap = True
        return memo[block]

    exhaustive = len(units) <= config.EXHAUSTIVE_UNIT_LIMIT
    strategy = "exhaustive" if exhaustive else "hill-climb"
    rng = np.random.default_rng(seed)

    for d in range(d_max + 1):
        found = None
        if exhaustive:
            for blocks in _set_partitions(units, d + 1):
                if all(finite(b) for b in blocks):
                    found = blocks
                    break
        else:
            found = _hill_climb(units, d, finite, rng)
        if found is not None:
            covers = list(found) + [frozenset()] * (d + 1 - len(found))
            certificate = build_certificate(frag, covers, cap)
            logger.debug("dad search: d=%d certified (%s)", d, strategy)
            return DadSearchResult(d, certificate, strategy, hit_cap)

    return DadSearchResult(None, None, strategy, hit_cap)


def _hill_climb(units: list, d: int, finite: Callable, rng) -> Optional[list]:
    colors = rng.integers(0, d + 1, size=len(units))

    def blocks_of(assignment) -> list:
        return [frozenset(u for u, c in zip(units, assignment) if c == k) for k in range(d + 1)]

    def score(assignment) -> int:
        return sum(not finite(b) for b in blocks_of(assignment) if b)

    current = score(colors)
    for _ in range(config.HILL_CLIMB_STEPS):
        if current == 0:
            return [b for b in blocks_of(colors) if b]
        trial = colors.copy()
        trial[rng.integers(len(units))] = rng.integers(0, d + 1)
        trial_score = score(trial)
        if trial_score <= current:
            colors, current = trial, trial_score
    return [b for b in blocks_of(colors) if b] if current == 0 else None


# ============================================================================
# Bound 공식
# ============================================================================

@dataclass(frozen=True)
class Formula:
    inputs: tuple
    compute: Callable[[dict], int]
    description: str


FORMULAS = {
    "prop-4.2": Formula(
        ("d", "n"),
        lambda v: (v["d"] + 1) * (v["n"] + 1) - 1,
        "subalgebra approximation: (d+1)(n+1)-1",
    ),
    "thm-main": Formula(
        ("supPrim", "dimG0", "dad"),
        lambda v: (v["supPrim"] + 1) * (v["dimG0"] + 1) * (v["dad"] + 1) - 1,
        "sup dim+1 Prim C*(G(u)) · dim+1 G0 · dad+1 (G/Iso) - 1",
    ),
    "cor-abelian": Formula(
        ("dimDual", "dimG0", "dad"),
        lambda v: (v["dimDual"] + 1) * (v["dimG0"] + 1) * (v["dad"] + 1) - 1,
        "abelian isotropy: dim+1 of the dual · dim+1 G0 · dad+1 - 1",
    ),
    "cor-compact": Formula(
        ("dimG0", "dad"),
        lambda v: (v["dimG0"] + 1) * (v["dad"] + 1) - 1,
        "compact isotropy: dim+1 G0 · dad+1 - 1",
    ),
    "thm-subhomog": Formula(
        ("dimG0", "supPrim"),
        lambda v: (v["dimG0"] + 1) * (v["supPrim"] + 1) - 1,
        "subhomogeneous groupoid: dim+1 G0 · sup dim+1 Prim - 1",
    ),
    "cor-subhomog-abelian": Formula(
        ("dimG0", "dimDual"),
        lambda v: (v["dimG0"] + 1) * (v["dimDual"] + 1) - 1,
        "subhomogeneous, abelian isotropy: dim+1 G0 · dim+1 of the dual - 1",
    ),
    "cor-subhomog-compact": Formula(
        ("dimG0",),
        lambda v: v["dimG0"],
        "subhomogeneous, compact isotropy: dim G0",
    ),
    "cor-twist": Formula(
        ("dimG0",),
        lambda v: v["dimG0"],
        "twisted subhomogeneous groupoid: dim+1 G0 - 1",
    ),
    "thm-twist": Formula(
        ("dad", "dimG0"),
        lambda v: (v["dad"] + 1) * (v["dimG0"] + 1) - 1,
        "twist over a principal groupoid: dad+1 · dim+1 G0 - 1",
    ),
    "lemma-ext": Formula(
        ("dimI", "dimQuotient"),
        lambda v: max(v["dimI"], v["dimQuotient"]),
        "extension by a subhomogeneous ideal: max of ideal and quotient",
    ),
    "prop-nonunital": Formula(
        ("d", "n", "dimM"),
        lambda v: (v["d"] + 1) * (v["dimM"] + v["n"] + 2) - 1,
        "non-unital subalgebras: (d+1)(dim M + n + 2) - 1",
    ),
    "prop-nonunital-subhomog": Formula(
        ("d", "n", "dimM"),
        lambda v: (v["d"] + 1) * (max(v["n"], v["dimM"]) + 1) - 1,
        "non-unital subhomogeneous subalgebras: (d+1)(max(n, dim M) + 1) - 1",
    ),
}


@dataclass
class BoundReport:
    formula: str
    bound: Optional[int]
    facts: dict = field(default_factory=dict)
    chain: list = field(default_factory=list)
    status: str = VERIFIED

    def to_dict(self) -> dict:
        return {
            "facts": self.facts,
            "formula": self.formula,
            "bound": self.bound,
            "status": self.status,
            "chain": self.chain,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)


def evaluate_bound(formula: str, inputs: dict) -> BoundReport:
    """Inputs are plain dimensions; the +1 convention is applied here."""
    if formula not in FORMULAS:
        raise PreconditionError(f"unknown formula {formula!r}", known=", ".join(sorted(FORMULAS)))
    spec = FORMULAS[formula]
    values = {}
    for name in spec.inputs:
        if name not in inputs or inputs[name] is None:
            raise MissingInputError(f"formula {formula} needs input {name!r}")
        value = int(inputs[name])
        if value < 0:
            raise NegativeInputError(f"input {name!r} must be non-negative, got {value}")
        values[name] = value
    bound = spec.compute(values)
    return BoundReport(
        formula=formula,
        bound=bound,
        facts=values,
        chain=[{"step": "evaluate", "status": VERIFIED, "description": spec.description}],
    )


# ============================================================================
# 인증 파이프라인
# ============================================================================

AF_CITATION = "graph has no return paths: C*(E) is AF, nuclear dimension 0"
CONDITION_K_CITATION = "every return path has an entrance (condition K): nuclear dimension at most 2"
UNSUPPORTED_REASON = (
    "isotropy not continuously varying: return paths with and without entrances coexist, "
    "so the quotient by isotropy is not locally compact Hausdorff"
)
CYLINDER_CHECK_LENGTH = 3


def _clopen_cylinder_partition(g: DirectedGraph, paths: list) -> Optional[str]:
    """Cylinders of each length up to 3 partition E^∞; returns a failing path or None."""
    by_length = {}
    for edges, base in enumerate_finite_paths(g, CYLINDER_CHECK_LENGTH):
        by_length.setdefault(len(edges), []).append(FinitePath.of(g, edges, base))
    for n in range(CYLINDER_CHECK_LENGTH + 1):
        cylinders = by_length.get(n, [])
        for x in paths:
            hits = sum(in_cylinder(x, mu) for mu in cylinders)
            if hits != 1:
                return f"{format_path(x)} lies in {hits} cylinders of length {n}"
    return None


def certified_pipeline(
    g: DirectedGraph,
    depth: Optional[int] = None,
    seed: int = config.DEFAULT_SEED,
    cap: Optional[int] = None,
) -> BoundReport:
    chain = CertificateChain()
    chain.start()

    # 1. 분류
    classification = classify(g)
    facts = {"classification": classification.to_dict()}
    chain.add_step("classify", VERIFIED, "return-path structure of the graph")

    if not classification.has_cycles:
        chain.add_step("af-bound", CITED, AF_CITATION)
        chain.end()
        return BoundReport("cited-af", 0, facts, chain.get_summary(), CITED)

    if not classification.stably_finite:
        if classification.condition_K:
            chain.add_step("condition-k-bound", CITED, CONDITION_K_CITATION)
            chain.end()
            return BoundReport("cited-condition-K", 2, facts, chain.get_summary(), CITED)
        chain.add_step("unsupported", UNSUPPORTED, UNSUPPORTED_REASON)
        chain.end()
        return BoundReport("unsupported", None, facts, chain.get_summary(), UNSUPPORTED)

    if classification.source_vertices:
        raise PreconditionError(
            "graph has sources", witness=sorted(classification.source_vertices)
        )
    if not classification.every_cycle_has_exit:
        raise PreconditionError("a return path has no exit")

    # 2. isotropy 열림
    paths = enumerate_infinite_paths(g, cap)
    universe = element_universe(g, config.LAG_WINDOW, paths)
    witnesses = 0
    for el in universe:
        if el.k == 0 or not is_isotropy(el):
            continue
        b = open_isotropy_witness(el)
        members = [h for h in universe if b.contains(h)]
        if el not in members or not all(is_isotropy(h) for h in members):
            raise VerificationError("open isotropy witness fails", witness=format_element(el))
        witnesses += 1
    chain.add_step(
        "open-isotropy", VERIFIED,
        "every nontrivial isotropy element sits in a basic bisection of isotropy",
        details={"elements": witnesses},
    )

    # 3. unfurl + quotient 검증
    T = depth if depth is not None else required_depth(g)
    report = verify_unfurl(g, T, seed=seed, cap=cap)
    report.raise_on_failure()
    chain.add_step(
        "unfurl-quotient", VERIFIED,
        "G_E/Iso embeds in the groupoid of the acyclic unfurled graph",
        details={"checks": [c.name for c in report.checks], "depth": T},
    )

    # 4. dad 인증서 (d = 0)
    f = unfurl(g, T)
    images = {upsilon(f, el) for el in universe}
    frag = quotient_fragment(sorted(images, key=str))
    certificate = build_certificate(frag, [frag.units], cap)
    verdict = verify_dad_certificate(certificate, cap)
    if not verdict:
        raise VerificationError("d = 0 certificate on the unfurled fragment fails", witness=verdict.reason)
    chain.add_step(
        "dad-certificate", VERIFIED,
        "d = 0: the fragment of the unfurled groupoid generates a finite subgroupoid",
        details=certificate.to_dict(),
    )

    # 5. 단위공간 차원
    failure = _clopen_cylinder_partition(g, paths)
    if failure is not None:
        raise VerificationError("cylinder sets do not partition the path space", witness=failure)
    chain.add_step(
        "unit-space-dimension", VERIFIED,
        "cylinders of each length form a clopen partition: dim G0 = 0",
    )

    # 6. isotropy
    generators = {format_path(x): isotropy_group(x).generator for x in paths}
    chain.add_step(
        "isotropy-dual", VERIFIED,
        "every isotropy group is Z; its dual is the circle, dimension 1",
    )

    # 7. bound
    inputs = {"dimDual": 1, "dimG0": 0, "dad": 0}
    bound = evaluate_bound("cor-abelian", inputs)
    chain.add_step(
        "bound", VERIFIED,
        f"({inputs['dimDual']}+1)({inputs['dimG0']}+1)({inputs['dad']}+1)-1 = {bound.bound}",
    )
    chain.end()

    facts.update(inputs)
    facts["isotropy_generators"] = generators
    facts["infinite_paths"] = len(paths)
    facts["universe_size"] = len(universe)
    facts["lag_table"] = report.lag_table
    return BoundReport("cor-abelian", bound.bound, facts, chain.get_summary(), VERIFIED)


def isotropy_blowup_fragment(x) -> GroupoidFragment:
    """The fragment {(x, p, x)^±1, x} with p the isotropy generator."""
    p = isotropy_group(x).generator
    return graph_fragment([GroupoidElement.of(x, p, x)])


__all__ = [
    "GroupoidFragment",
    "DadCertificate",
    "BoundReport",
    "FORMULAS",
    "build_certificate",
    "certified_pipeline",
    "evaluate_bound",
    "finite_fragment",
    "generated_subgroupoid",
    "graph_fragment",
    "isotropy_blowup_fragment",
    "quotient_fragment",
    "search_dad",
    "verify_dad_certificate",
]
