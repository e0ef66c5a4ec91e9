import pytest
from hypothesis import given, settings, strategies as st

from app.errors import (
    CapExceededError,
    InvalidPathError,
    NonComposableError,
    NotABisectionError,
    NotShiftEquivalentError,
    PreconditionError,
)
from app.graph_core import DirectedGraph
from app.groupoid import (
    BasicBisection,
    GroupoidElement,
    bisection_members,
    composable_pairs,
    compose,
    element_universe,
    format_element,
    inverse,
    is_isotropy,
    isotropy_group,
    open_isotropy_witness,
    orbit,
    parse_element,
    quotient_equal,
    strata,
)
from app.paths import EPPath, FinitePath, collect_infinite_paths, enumerate_infinite_paths

from .strategies import entrance_free_graphs


class TestElements:
    def test_compose(self, exit_x, loop_x):
        g = GroupoidElement.of(exit_x, 2, loop_x)
        h = GroupoidElement.of(loop_x, -5, exit_x)
        assert compose(g, h) == GroupoidElement.of(exit_x, -3, exit_x)

    def test_compose_needs_matching_ends(self, exit_x, loop_x):
        g = GroupoidElement.of(exit_x, 0, loop_x)
        with pytest.raises(NonComposableError):
            compose(g, g)

    def test_inverse(self, exit_x, loop_x):
        g = GroupoidElement.of(exit_x, 4, loop_x)
        assert inverse(g) == GroupoidElement.of(loop_x, -4, exit_x)
        assert compose(g, inverse(g)) == GroupoidElement.unit(exit_x)
        assert compose(inverse(g), g).is_unit

    def test_lag_must_be_admissible(self, two_cycle):
        x = EPPath.of(two_cycle, (), ("c0", "c1"))
        y = EPPath.of(two_cycle, (), ("c1", "c0"))
        GroupoidElement.of(x, 1, y)
        with pytest.raises(NotShiftEquivalentError):
            GroupoidElement.of(x, 2, y)

    def test_different_tails_rejected(self):
        g = DirectedGraph.build(["v", "w"], [("a", "v", "v"), ("b", "w", "w")])
        x, y = enumerate_infinite_paths(g)
        with pytest.raises(NotShiftEquivalentError):
            GroupoidElement.of(x, 0, y)

    def test_isotropy(self, exit_x, loop_x):
        assert is_isotropy(GroupoidElement.of(exit_x, 7, exit_x))
        assert not is_isotropy(GroupoidElement.of(exit_x, 0, loop_x))

    def test_isotropy_group(self, exit_x, two_cycle):
        assert isotropy_group(exit_x).kind == "Z"
        assert isotropy_group(exit_x).generator == 1
        assert isotropy_group(EPPath.of(two_cycle, ("f",), ("c1", "c0"))).generator == 2


class TestOrbits:
    def test_orbit(self, exit_x, loop_x):
        assert orbit(exit_x) == {exit_x, loop_x}
        with pytest.raises(CapExceededError):
            orbit(exit_x, cap=1)

    def test_strata(self, e1, loop_x, exit_x, two_cycle):
        assert strata(e1) == {2: frozenset({loop_x, exit_x})}
        assert list(strata(two_cycle)) == [3]

    def test_strata_of_two_loops(self):
        g = DirectedGraph.build(["v", "w"], [("a", "v", "v"), ("b", "w", "w")])
        assert list(strata(g)) == [1]
        assert len(strata(g)[1]) == 2


class TestQuotientAndBisections:
    def test_quotient_equal(self, exit_x, loop_x):
        a = GroupoidElement.of(exit_x, 0, loop_x)
        b = GroupoidElement.of(exit_x, 5, loop_x)
        assert quotient_equal(a, b)
        assert not quotient_equal(a, GroupoidElement.unit(loop_x))

    def test_bisection_members(self, e1, exit_x, loop_x):
        b = BasicBisection.of(FinitePath.of(e1, ("e",)), FinitePath.vertex(e1, "w"))
        assert b.lag == -1
        assert bisection_members(b, element_universe(e1)) == [GroupoidElement.of(exit_x, -1, loop_x)]
        assert b.contains_modulo_isotropy(GroupoidElement.of(exit_x, 0, loop_x))
        assert not b.contains(GroupoidElement.of(exit_x, 0, loop_x))

    def test_bisection_needs_common_source(self, e1):
        with pytest.raises(NotABisectionError):
            BasicBisection.of(FinitePath.of(e1, ("e",)), FinitePath.vertex(e1, "u"))

    def test_universe_size(self, e1):
        # four pairs of shift-equivalent paths, each with a full lag class
        assert len(element_universe(e1, window=1)) == 12
        assert len(element_universe(e1)) == 28

    def test_open_isotropy_witness(self, e1, exit_x, loop_x):
        universe = element_universe(e1)
        for g in (
            GroupoidElement.of(exit_x, 1, exit_x),
            GroupoidElement.of(exit_x, -2, exit_x),
            GroupoidElement.of(loop_x, 3, loop_x),
        ):
            b = open_isotropy_witness(g)
            members = bisection_members(b, universe)
            assert g in members
            assert all(is_isotropy(h) for h in members)

    def test_open_isotropy_witness_rejects_units(self, loop_x):
        with pytest.raises(PreconditionError):
            open_isotropy_witness(GroupoidElement.unit(loop_x))


class TestLiterals:
    def test_parse_and_format(self, e1, exit_x, loop_x):
        g = parse_element(e1, "(e^a | 2 | ^a)")
        assert g == GroupoidElement.of(exit_x, 2, loop_x)
        assert format_element(g) == "(e^a | 2 | ^a)"
        assert parse_element(e1, format_element(inverse(g))) == inverse(g)

    def test_malformed(self, e1):
        with pytest.raises(InvalidPathError):
            parse_element(e1, "(e^a, 2, ^a)")
        with pytest.raises(InvalidPathError):
            parse_element(e1, "(e | 0 | ^a)")


@settings(max_examples=25, deadline=None)
@given(entrance_free_graphs(max_cycles=2), st.data())
def test_groupoid_axioms(g, data):
    universe = element_universe(g, window=1, paths=collect_infinite_paths(g))
    pairs = composable_pairs(universe)
    a, b = data.draw(st.sampled_from(pairs))
    ab = compose(a, b)
    assert ab.range == a.range and ab.source == b.source
    assert compose(ab, inverse(b)) == a
    assert compose(GroupoidElement.unit(a.range), a) == a

    c = data.draw(st.sampled_from([h for h in universe if h.x == b.y]))
    assert compose(compose(a, b), c) == compose(a, compose(b, c))
