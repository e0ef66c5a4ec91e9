import pytest
from hypothesis import given, settings, strategies as st

from app.errors import CapExceededError, GraphMismatchError, InvalidPathError, PreconditionError
from app.graph_core import DirectedGraph
from app.paths import (
    CylinderRelation,
    EPPath,
    FinitePath,
    canonicalize,
    collect_infinite_paths,
    cylinder_relation,
    enumerate_infinite_paths,
    ep_equal,
    format_path,
    in_cylinder,
    parse_path,
    shift_class,
    shift_lags,
)

from .strategies import entrance_free_graphs


class TestCanonicalize:
    def test_prefix_absorbed_into_cycle(self, e1):
        p = EPPath.of(e1, ("e", "a"), ("a",), canonical_form=False)
        c = canonicalize(p)
        assert c.prefix == ("e",) and c.cycle == ("a",)

    def test_primitive_period(self, e1):
        c = EPPath.of(e1, (), ("a", "a"))
        assert c.cycle == ("a",)
        assert c.primitive_period == 1

    def test_idempotent(self, exit_x):
        assert canonicalize(exit_x) is exit_x
        assert canonicalize(canonicalize(exit_x)) == exit_x

    def test_rotation_when_prefix_ends_like_cycle(self, two_cycle):
        p = EPPath.of(two_cycle, ("f", "c1", "c0"), ("c1", "c0"))
        assert p.prefix == ("f",) and p.cycle == ("c1", "c0")

    def test_invalid_tail(self, e1):
        with pytest.raises(InvalidPathError):
            EPPath.of(e1, (), ("e",))

    def test_prefix_must_meet_cycle(self, e1):
        with pytest.raises(InvalidPathError):
            EPPath.of(e1, ("a", "e"), ("a",))


class TestEquality:
    def test_examples(self, e1, loop_x, exit_x):
        long_form = EPPath.of(e1, ("e", "a"), ("a",), canonical_form=False)
        assert ep_equal(exit_x, long_form, cross_check=True)
        assert not ep_equal(loop_x, exit_x, cross_check=True)
        assert ep_equal(loop_x, loop_x)

    def test_different_graphs(self, e1, two_cycle, loop_x):
        other = EPPath.of(two_cycle, (), ("c0", "c1"))
        with pytest.raises(GraphMismatchError):
            ep_equal(loop_x, other)

    @settings(max_examples=30, deadline=None)
    @given(entrance_free_graphs(), st.data())
    def test_equivalence_relation(self, g, data):
        paths = collect_infinite_paths(g)
        x, y, z = (data.draw(st.sampled_from(paths)) for _ in range(3))
        # unroll one more cycle into the prefix; equality must not notice
        y_long = EPPath.of(g, y.prefix + y.cycle, y.cycle, canonical_form=False)
        assert ep_equal(x, x, cross_check=True)
        assert ep_equal(y, y_long, cross_check=True)
        assert ep_equal(x, y, cross_check=True) == ep_equal(y, x, cross_check=True)
        if ep_equal(x, y) and ep_equal(y, z):
            assert ep_equal(x, z)


class TestInfinitePaths:
    def test_e1(self, e1, loop_x, exit_x):
        assert enumerate_infinite_paths(e1) == [loop_x, exit_x]

    def test_two_loops(self):
        g = DirectedGraph.build(["v", "w"], [("a", "v", "v"), ("b", "w", "w")])
        assert [format_path(x) for x in enumerate_infinite_paths(g)] == ["^a", "^b"]

    def test_entrance_rejected(self, condition_k_graph):
        with pytest.raises(PreconditionError):
            enumerate_infinite_paths(condition_k_graph)

    def test_sources_rejected(self, acyclic_chain):
        with pytest.raises(PreconditionError):
            enumerate_infinite_paths(acyclic_chain)

    def test_two_cycle(self, two_cycle):
        assert [format_path(x) for x in enumerate_infinite_paths(two_cycle)] == [
            "^c0.c1", "^c1.c0", "f^c1.c0",
        ]

    def test_shift_class_cap(self, e1):
        assert len(shift_class(e1, ("a",), cap=10)) == 2
        with pytest.raises(CapExceededError):
            shift_class(e1, ("a",), cap=1)

    @settings(max_examples=30, deadline=None)
    @given(entrance_free_graphs())
    def test_path_count(self, g):
        tree = [v for v in g.vertices if v.startswith("v")]
        cycle_edges = [e for e in g.edges if e.id.startswith("a")]
        assert len(enumerate_infinite_paths(g)) == len(tree) + len(cycle_edges)


class TestShiftLags:
    def test_same_loop(self, loop_x):
        lags = shift_lags(loop_x, loop_x)
        assert (lags.offset, lags.modulus) == (0, 1)

    def test_exit_and_loop(self, exit_x, loop_x):
        lags = shift_lags(exit_x, loop_x)
        assert not lags.empty and lags.modulus == 1
        assert 5 in lags and -3 in lags

    def test_two_cycle_odd_lags(self, two_cycle):
        x = EPPath.of(two_cycle, (), ("c0", "c1"))
        y = EPPath.of(two_cycle, (), ("c1", "c0"))
        lags = shift_lags(x, y)
        assert (lags.offset, lags.modulus) == (1, 2)
        assert 1 in lags and -1 in lags and 2 not in lags

    def test_not_equivalent(self):
        g = DirectedGraph.build(["v", "w"], [("a", "v", "v"), ("b", "w", "w")])
        x, y = enumerate_infinite_paths(g)
        assert shift_lags(x, y).empty
        assert shift_lags(x, y).window(3) == []

    @settings(max_examples=30, deadline=None)
    @given(entrance_free_graphs(), st.data())
    def test_lags_match_symbol_alignment(self, g, data):
        paths = collect_infinite_paths(g)
        x = data.draw(st.sampled_from(paths))
        y = data.draw(st.sampled_from(paths))
        lags = shift_lags(x, y)
        start = len(x.prefix) + len(y.prefix) + 1
        for k in range(-4, 5):
            aligned = all(
                x.symbol(i) == y.symbol(i + k)
                for i in range(start + 4, start + 8)
            )
            assert aligned == (k in lags)


class TestCylinders:
    def test_membership(self, e1, loop_x, exit_x):
        assert in_cylinder(exit_x, FinitePath.of(e1, ("e", "a")))
        assert not in_cylinder(loop_x, FinitePath.of(e1, ("e",)))
        assert in_cylinder(loop_x, FinitePath.vertex(e1, "w"))

    def test_relations(self, e1):
        ea = FinitePath.of(e1, ("e", "a"))
        e = FinitePath.of(e1, ("e",))
        a = FinitePath.of(e1, ("a",))
        assert cylinder_relation(ea, e) is CylinderRelation.SUBSET
        assert cylinder_relation(e, ea) is CylinderRelation.SUPERSET
        assert cylinder_relation(e, a) is CylinderRelation.DISJOINT
        assert cylinder_relation(a, FinitePath.of(e1, ("a",))) is CylinderRelation.EQUAL

    def test_finite_path_validation(self, e1):
        with pytest.raises(InvalidPathError):
            FinitePath.of(e1, ("a", "e"))
        with pytest.raises(InvalidPathError):
            FinitePath.vertex(e1, "z")


class TestLiterals:
    def test_parse_infinite(self, e1, exit_x):
        assert parse_path(e1, "e.a^a") == exit_x
        assert parse_path(e1, " e ^ a ") == exit_x

    def test_parse_finite_and_vertex(self, e1):
        assert parse_path(e1, "e.a") == FinitePath.of(e1, ("e", "a"))
        assert parse_path(e1, "@w") == FinitePath.vertex(e1, "w")

    def test_format(self, e1, exit_x):
        assert format_path(exit_x) == "e^a"
        assert format_path(FinitePath.vertex(e1, "u")) == "@u"

    def test_bad_literals(self, e1):
        with pytest.raises(InvalidPathError):
            parse_path(e1, "e^")
        with pytest.raises(InvalidPathError):
            parse_path(e1, "")

    def test_drop_and_head(self, exit_x, loop_x):
        assert exit_x.drop(1) == loop_x
        assert exit_x.drop(5) == loop_x
        assert exit_x.head(2).edges == ("e", "a")
        assert exit_x.unroll(3) == ("e", "a", "a")
