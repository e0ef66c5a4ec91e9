"""
Groupoid-dim 명령행 모듈

    groupoid-dim analyze GRAPH [--depth T]
    groupoid-dim unfurl GRAPH --depth T [--format json|dot]
    groupoid-dim paths GRAPH
    groupoid-dim compose GRAPH ELEMENT [ELEMENT]
    groupoid-dim spectrum (--group NAME | --group-file F | --model M | --action F)
    groupoid-dim twist (...groupoid...) (--cocycle F | --klein4) [--bound M]
    groupoid-dim dad GRAPH [--element LITERAL ...] [--d-max N]
    groupoid-dim bound FORMULA --name value ...

Path literals: "e.a^a" (prefix, "^", repeating cycle), "@v" for a vertex.
Element literals: "(x | k | y)".

Exit codes: 0 success, 1 precondition / inconclusive, 2 verification
failure, 64 usage error.
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, TextIO

from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import config
from .dad_bounds import (
    FORMULAS,
    certified_pipeline,
    evaluate_bound,
    graph_fragment,
    quotient_fragment,
    search_dad,
)
from .errors import (
    GroupoidDimError,
    InvalidActionError,
    InvalidCocycleError,
    InvalidGroupError,
    MissingInputError,
)
from .finite_groupoid import (
    FiniteGroup,
    FiniteGroupoid,
    abelian_cores,
    composition_series,
    is_subhomogeneous,
    orbits,
    sign_model,
    spectrum,
    transformation_groupoid,
)
from .graph_core import DirectedGraph, load_graph, validate_document
from .groupoid import (
    compose,
    element_universe,
    format_element,
    inverse,
    parse_element,
    strata,
)
from .paths import enumerate_infinite_paths, format_path
from .twists import (
    TwoCocycle,
    check_twist_bound,
    klein4_cocycle,
    twisted_algebra,
    wedderburn_degrees,
)
from .unfurl import required_depth, unfurl, upsilon


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 64

MODELS = {"s3-sign": "S3", "z2-sign": "Z/2"}


# ============================================================================
# 입력 파일 모델
# ============================================================================

class GroupFile(BaseModel):
    """One of: a named group, a multiplication table, or permutations."""

    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    table: Optional[list[list[int]]] = None
    labels: Optional[list[str]] = None
    permutations: Optional[list[list[int]]] = None

    @model_validator(mode="after")
    def _one_source(self):
        given = [f for f in ("name", "table", "permutations") if getattr(self, f) is not None]
        if len(given) != 1:
            raise ValueError("give exactly one of name, table, permutations")
        return self

    def build(self) -> FiniteGroup:
        if self.name is not None:
            return FiniteGroup.named(self.name)
        if self.table is not None:
            return FiniteGroup.from_table(self.table, self.labels)
        return FiniteGroup.from_permutations([tuple(p) for p in self.permutations])


class ActionFile(BaseModel):
    """action[h][i] is the index of h·points[i]."""

    model_config = ConfigDict(extra="forbid")

    group: GroupFile
    points: list[str] = Field(min_length=1)
    action: list[list[int]]

    def build(self) -> FiniteGroupoid:
        return transformation_groupoid(self.group.build(), self.points, self.action)


class CocycleFile(BaseModel):
    """Angles in turns: [a, b, "p/q"] sets sigma(a, b) = exp(2 pi i p/q)."""

    model_config = ConfigDict(extra="forbid")

    angles: list[tuple[str, str, str]] = []

    def build(self, G: FiniteGroupoid) -> TwoCocycle:
        index = {label: i for i, label in enumerate(G.labels)}
        angles = {}
        for a, b, text in self.angles:
            for label in (a, b):
                if label not in index:
                    raise InvalidCocycleError(f"unknown groupoid element {label!r}")
            try:
                angles[(index[a], index[b])] = Fraction(text)
            except (ValueError, ZeroDivisionError):
                raise InvalidCocycleError(f"angle {text!r} is not a rational number") from None
        return TwoCocycle.from_fractions(G, angles)


# ============================================================================
# argparse
# ============================================================================

class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=config.DEFAULT_SEED, help="seed for numerical routines")
    p.add_argument("--cap", type=int, default=None, help=f"closure/enumeration cap (env {config.CAP_ENV_VAR})")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")


def _groupoid_source(p: argparse.ArgumentParser):
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--group", help="named group: S3, S4, A4, Q8, Klein4, Z/n, D<n>")
    source.add_argument("--group-file", type=Path, help="group JSON: name, table or permutations")
    source.add_argument("--model", choices=sorted(MODELS), help="sign-action transformation groupoid")
    source.add_argument("--action", type=Path, help="action JSON: group, points, action table")
    p.add_argument("--radius", type=int, default=None, help="radius of the sign model")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="groupoid-dim", description="Graph groupoids, unfurling and nuclear-dimension bounds")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="certified bound for a graph algebra")
    p.add_argument("graph", type=Path)
    p.add_argument("--depth", type=int, default=None, help="unfurl depth (default: the required depth)")
    _common(p)

    p = sub.add_parser("unfurl", help="emit the unfurled graph truncated at a depth")
    p.add_argument("graph", type=Path)
    p.add_argument("--depth", type=int, default=None)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--format", choices=["json", "dot"], default="json")
    fmt.add_argument("--json", dest="format", action="store_const", const="json")
    fmt.add_argument("--dot", dest="format", action="store_const", const="dot")
    _common(p)

    p = sub.add_parser("paths", help="list the infinite path space")
    p.add_argument("graph", type=Path)
    p.add_argument("--json", action="store_true", help="include orbit strata")
    _common(p)

    p = sub.add_parser("compose", help="compose or invert groupoid elements")
    p.add_argument("graph", type=Path)
    p.add_argument("elements", nargs="+", help='"(x | k | y)" literals')
    p.add_argument("--inverse", action="store_true", help="invert a single element")
    p.add_argument("--quotient", action="store_true", help="also print the image in the unfurled groupoid")
    _common(p)

    p = sub.add_parser("spectrum", help="irreducible representations of a finite groupoid")
    _groupoid_source(p)
    p.add_argument("--subhomogeneous", type=int, metavar="M", default=None)
    p.add_argument("--series", action="store_true", help="composition series by dimension")
    _common(p)

    p = sub.add_parser("twist", help="twisted groupoid algebra and its Wedderburn degrees")
    _groupoid_source(p)
    cocycle = p.add_mutually_exclusive_group()
    cocycle.add_argument("--cocycle", type=Path, help='cocycle JSON: {"angles": [[a, b, "p/q"], ...]}')
    cocycle.add_argument("--klein4", action="store_true", help="nondegenerate cocycle on Klein4")
    p.add_argument("--bound", type=int, metavar="M", default=None)
    _common(p)

    p = sub.add_parser("dad", help="search a dad certificate on a groupoid fragment")
    p.add_argument("graph", type=Path)
    p.add_argument("--element", action="append", default=[], help="fragment generator literal (repeatable)")
    p.add_argument("--d-max", type=int, default=2)
    _common(p)

    p = sub.add_parser("bound", help="evaluate a bound formula")
    p.add_argument("formula", choices=sorted(FORMULAS))
    names = sorted({name for f in FORMULAS.values() for name in f.inputs})
    for name in names:
        p.add_argument(f"--{name}", type=int, default=None)
    p.add_argument("--json", action="store_true")
    _common(p)

    return parser


# ============================================================================
# 명령 처리
# ============================================================================

def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise MissingInputError(f"cannot read {path}: {e.strerror}") from None


def _graph(args) -> DirectedGraph:
    return load_graph(_read(args.graph))


def _dump(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)


def _groupoid(args) -> FiniteGroupoid:
    if args.group:
        return FiniteGroupoid.from_group(FiniteGroup.named(args.group))
    if args.group_file:
        return FiniteGroupoid.from_group(validate_document(GroupFile, _read(args.group_file), InvalidGroupError).build())
    if args.model:
        radius = args.radius if args.radius is not None else (2 if args.model == "s3-sign" else 1)
        return sign_model(MODELS[args.model], radius)
    return validate_document(ActionFile, _read(args.action), InvalidActionError).build()


def cmd_analyze(args, out: TextIO) -> int:
    report = certified_pipeline(_graph(args), depth=args.depth, seed=args.seed, cap=args.cap)
    out.write(report.to_json() + "\n")
    return EXIT_OK if report.bound is not None else 1


def cmd_unfurl(args, out: TextIO) -> int:
    g = _graph(args)
    depth = args.depth if args.depth is not None else max(required_depth(g), 1)
    f = unfurl(g, depth)
    out.write((f.to_dot() if args.format == "dot" else f.to_json()) + "\n")
    return EXIT_OK


def cmd_paths(args, out: TextIO) -> int:
    g = _graph(args)
    paths = enumerate_infinite_paths(g, args.cap)
    if args.json:
        layers = strata(g, args.cap)
        out.write(_dump({
            "paths": [format_path(x) for x in paths],
            "strata": {str(n): sorted(format_path(x) for x in layer) for n, layer in layers.items()},
        }) + "\n")
    else:
        for x in paths:
            out.write(format_path(x) + "\n")
    return EXIT_OK


def cmd_compose(args, out: TextIO) -> int:
    g = _graph(args)
    elements = [parse_element(g, text) for text in args.elements]
    if args.inverse:
        if len(elements) != 1:
            raise UsageError("--inverse takes exactly one element")
        result = inverse(elements[0])
    else:
        result = elements[0]
        for el in elements[1:]:
            result = compose(result, el)
    out.write(format_element(result) + "\n")
    if args.quotient:
        f = unfurl(g, max(required_depth(g), 1))
        out.write(str(upsilon(f, result)) + "\n")
    return EXIT_OK


def cmd_spectrum(args, out: TextIO) -> int:
    G = _groupoid(args)
    entries = spectrum(G, args.seed)
    payload = {
        "elements": G.size,
        "units": G.unit_labels(G.units),
        "orbits": [G.unit_labels(o) for o in orbits(G)],
        "spectrum": [e.to_dict(G) for e in entries],
        "max_dimension": max(e.induced_dimension for e in entries),
    }
    if args.subhomogeneous is not None:
        payload["subhomogeneous"] = {
            "M": args.subhomogeneous,
            "holds": is_subhomogeneous(G, args.subhomogeneous, args.seed),
            "abelian_cores": [c.to_dict(G) for c in abelian_cores(G, args.seed)],
        }
    if args.series:
        payload["composition_series"] = composition_series(G, args.seed).to_dict(G)
    out.write(_dump(payload) + "\n")
    return EXIT_OK


def cmd_twist(args, out: TextIO) -> int:
    G = _groupoid(args)
    if args.klein4:
        sigma = klein4_cocycle(G)
    elif args.cocycle:
        sigma = validate_document(CocycleFile, _read(args.cocycle), InvalidCocycleError).build(G)
    else:
        sigma = TwoCocycle.trivial(G)
    payload = {
        "elements": G.size,
        "cocycle": {"exact": sigma.exact, "angles": sigma.angle_labels()},
    }
    if args.bound is not None:
        payload["bound"] = check_twist_bound(G, sigma, args.bound, args.seed).to_dict()
        payload["degrees"] = payload["bound"]["degrees"]
    else:
        payload["degrees"] = wedderburn_degrees(twisted_algebra(G, sigma, args.seed), args.seed)
    out.write(_dump(payload) + "\n")
    return EXIT_OK


def cmd_dad(args, out: TextIO) -> int:
    g = _graph(args)
    if args.element:
        frag = graph_fragment([parse_element(g, text) for text in args.element])
        kind = "graph"
    else:
        f = unfurl(g, max(required_depth(g), 1))
        universe = element_universe(g, config.LAG_WINDOW, enumerate_infinite_paths(g, args.cap))
        frag = quotient_fragment(sorted({upsilon(f, el) for el in universe}, key=str))
        kind = "unfurled-quotient"
    result = search_dad(frag, args.d_max, args.cap, args.seed)
    payload = {"fragment": kind, "fragment_size": len(frag), "units": len(frag.units)}
    payload.update(result.to_dict())
    out.write(_dump(payload) + "\n")
    return EXIT_OK if result.d is not None else 1


def cmd_bound(args, out: TextIO) -> int:
    inputs = {name: getattr(args, name) for name in FORMULAS[args.formula].inputs}
    report = evaluate_bound(args.formula, inputs)
    out.write((report.to_json() if args.json else str(report.bound)) + "\n")
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "unfurl": cmd_unfurl,
    "paths": cmd_paths,
    "compose": cmd_compose,
    "spectrum": cmd_spectrum,
    "twist": cmd_twist,
    "dad": cmd_dad,
    "bound": cmd_bound,
}


def run(argv: Optional[list] = None, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        err.write(f"{e}\n")
        return EXIT_USAGE
    except SystemExit as e:      # --help
        return int(e.code or 0)

    if args.verbose:
        logging.basicConfig(
            level=logging.DEBUG,
            stream=err,
            format="%(levelname)s %(name)s: %(message)s",
            force=True,
        )

    try:
        return COMMANDS[args.command](args, out)
    except UsageError as e:
        err.write(f"{parser.prog} {args.command}: {e}\n")
        return EXIT_USAGE
    except GroupoidDimError as e:
        logger.debug("command %s failed", args.command, exc_info=True)
        err.write(_dump(e.to_dict()) + "\n")
        return e.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
